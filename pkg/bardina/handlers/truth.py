from bardina.core.application import BardinaApplication
from bardina.core.dispatch import CommandDispatch
from bardina.managers.experiment_manager import ExperimentManager
from bardina.managers.report_manager import ReportManager
from bardina.models.command import CliCommand
from bardina.utils.constants import Commands

dp = CommandDispatch(title=Commands.TRUTH,
                     description="Simulate the truth and dump its trajectory")


@dp.wrap_handler()
def truth(cmd: CliCommand, app: BardinaApplication) -> int:
    cfg = app.load_config(cmd)
    outcome = ExperimentManager.run_truth(cfg)
    ReportManager(cfg.output_dir).write_outcome(outcome)

    report = outcome.report
    for note in report.notes:
        print(note)
    print(f"dt = {report.dt:.17g}, envelope violations = {sum(report.envelope_violations.values())}")
    return report.exit_code
