from bardina.core.application import BardinaApplication
from bardina.core.dispatch import CommandDispatch
from bardina.managers.experiment_manager import ExperimentManager
from bardina.managers.report_manager import ReportManager
from bardina.models.command import CliCommand
from bardina.utils.constants import Commands

dp = CommandDispatch(title=Commands.ASSIMILATE,
                     description="Nudged run with a fixed beta against the truth")


@dp.wrap_handler()
def assimilate(cmd: CliCommand, app: BardinaApplication) -> int:
    cfg = app.load_config(cmd)
    outcome = ExperimentManager.run_assimilation(cfg)
    ReportManager(cfg.output_dir).write_outcome(outcome)

    report = outcome.report
    if not outcome.sync.empty:
        last = outcome.sync.iloc[-1]
        print(f"t = {last['t']:.6g}: ||g||^2 + beta^2 ||grad g||^2 = {last['lyapunov']:.6e}")
    rate = "n/a" if report.fitted_sync_rate is None else f"{report.fitted_sync_rate:.6g}"
    print(f"fitted synchronization rate = {rate}")
    for note in report.notes:
        print(note)
    return report.exit_code
