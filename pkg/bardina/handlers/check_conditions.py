from bardina.core.application import BardinaApplication
from bardina.core.dispatch import CommandDispatch
from bardina.managers.experiment_manager import ExperimentManager
from bardina.managers.report_manager import ReportManager
from bardina.models.command import CliCommand
from bardina.models.records import ConditionReport
from bardina.rules.theorem_rules import THEOREM_RULES
from bardina.utils.constants import Commands

dp = CommandDispatch(title=Commands.CHECK_CONDITIONS,
                     description="Evaluate the convergence conditions for the first iteration")

_TITLES = {rule.code: rule.title for rule in THEOREM_RULES}


def format_report(report: ConditionReport) -> str:
    lines = [f"{'code':<5}  {'lhs':>24}  {'rhs':>24}  {'margin':>24}  ok  condition"]
    for result in report:
        lines.append(
            f"{result.code:<5}  {result.lhs:>24.17g}  {result.rhs:>24.17g}  {result.margin:>24.17g}  "
            f"{'1' if result.satisfied else '0':>2}  {_TITLES.get(result.code, '')}"
        )
    return "\n".join(lines)


@dp.wrap_handler()
def check_conditions(cmd: CliCommand, app: BardinaApplication) -> int:
    cfg = app.load_config(cmd)
    outcome = ExperimentManager.first_iteration_conditions(cfg)
    ReportManager(cfg.output_dir).write_outcome(outcome)

    selection = outcome.selection
    if selection is not None:
        window = selection.window
        print(
            f"eta_1 = {selection.eta:.6g}, N_1 = {selection.N}, N~_1 = {window.N_tilde}, "
            f"zeta_1 = {window.zeta:.6g}, window nodes [{window.i_n}, {window.i_hat}, {window.i_np1}]"
        )
        print(format_report(selection.report))
    print(f"status: {outcome.report.status}")
    for note in outcome.report.notes:
        print(note)
    return outcome.report.exit_code
