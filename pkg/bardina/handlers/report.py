from bardina.core.application import BardinaApplication
from bardina.core.dispatch import CommandDispatch
from bardina.managers.report_manager import ReportManager
from bardina.models.command import CliCommand
from bardina.utils.constants import Commands, ExitCodes

dp = CommandDispatch(title=Commands.REPORT,
                     description="Rebuild the plots from the CSV files in output.dir")


@dp.wrap_handler()
def report(cmd: CliCommand, app: BardinaApplication) -> int:
    cfg = app.load_config(cmd)
    for path in ReportManager(cfg.output_dir).rebuild_plots():
        print(path)
    return ExitCodes.OK
