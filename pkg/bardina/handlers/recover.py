from bardina.core.application import BardinaApplication
from bardina.core.dispatch import CommandDispatch
from bardina.managers.experiment_manager import ExperimentManager
from bardina.managers.report_manager import ReportManager
from bardina.models.command import CliCommand
from bardina.models.experiment import RunReport
from bardina.utils.constants import Commands

dp = CommandDispatch(title=Commands.RECOVER,
                     description="Recursive recovery of alpha from the observation stream")


def _format_optional(value) -> str:
    return "n/a" if value is None else f"{value:.6g}"


def print_iterations(report: RunReport) -> None:
    print(f"{'n':>3}  {'t_n':>9}  {'eta_n':>8}  {'N_n':>3}  {'beta_{n+1}^2':>20}  {'|err|':>10}  conditions  status")
    for r in report.iterations:
        error = "n/a" if r.abs_beta_sq_err is None else f"{r.abs_beta_sq_err:.3e}"
        print(
            f"{r.n:>3}  {r.t_n:>9.4g}  {r.eta_n:>8.4g}  {r.N_n:>3}  {r.beta_np1_sq:>20.15g}  "
            f"{error:>10}  {r.condition_report.passed_string():>10}  {r.status.value}"
        )


@dp.wrap_handler()
def recover(cmd: CliCommand, app: BardinaApplication) -> int:
    cfg = app.load_config(cmd)
    outcome = ExperimentManager.run_twin_experiment(cfg)
    ReportManager(cfg.output_dir).write_outcome(outcome)

    report = outcome.report
    print_iterations(report)
    print(f"status: {report.status}, beta^2 = {report.beta_sq_final:.17g}, alpha^2 = {report.alpha_sq_true:.17g}")
    print(
        f"contraction ratio = {_format_optional(report.fitted_contraction_ratio)}, "
        f"g ratio = {_format_optional(report.fitted_g_ratio)}"
    )
    for note in report.notes:
        print(note)
    return report.exit_code
