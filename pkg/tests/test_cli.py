import pytest
from loguru import logger

from bardina.core.dispatch import CommandDispatch
from bardina.instance import init_app
from bardina.utils.constants import DEGENERATE_EXPLANATION, ExitCodes
from tests.conftest import DEGENERATE_CONFIG, SMALL_CONFIG, write_config


class TestCommands:
    def test_truth(self, app, tmp_path):
        path = write_config(tmp_path, SMALL_CONFIG)
        assert app.run(["truth", "--config", str(path)]) == ExitCodes.OK
        assert (tmp_path / "out" / "truth" / "index.txt").is_file()
        assert (tmp_path / "out" / "resolved.cfg").is_file()
        assert (tmp_path / "out" / "report.json").is_file()

    def test_check_conditions(self, app, tmp_path, capsys):
        path = write_config(tmp_path, SMALL_CONFIG)
        assert app.run(["check-conditions", "--config", str(path)]) == ExitCodes.OK
        out = capsys.readouterr().out
        for code in ("4.3", "4.10"):
            assert code in out

    def test_degenerate_recover(self, app, tmp_path, capsys):
        path = write_config(tmp_path, DEGENERATE_CONFIG)
        assert app.run(["recover", "--config", str(path)]) == ExitCodes.DEGENERATE
        assert DEGENERATE_EXPLANATION in capsys.readouterr().out
        assert (tmp_path / "out" / "iterations.csv").is_file()

    def test_recover_then_report(self, app, tmp_path):
        path = write_config(tmp_path, SMALL_CONFIG)
        assert app.run(["recover", "--config", str(path), "time.T_final=1.5"]) == ExitCodes.OK
        assert app.run(["report", "--config", str(path)]) == ExitCodes.OK
        assert (tmp_path / "out" / "plots" / "beta_error.svg").is_file()

    def test_assimilate(self, app, tmp_path):
        path = write_config(tmp_path, SMALL_CONFIG)
        assert app.run(["assimilate", "--config", str(path), "recovery.beta1_sq=0.0625"]) == ExitCodes.OK
        assert (tmp_path / "out" / "sync.csv").is_file()


class TestFailures:
    def test_report_without_tables(self, app, tmp_path):
        path = write_config(tmp_path, SMALL_CONFIG)
        assert app.run(["report", "--config", str(path)]) == ExitCodes.ERROR

    def test_corrupt_config(self, app, tmp_path):
        path = tmp_path / "broken.cfg"
        path.write_text("physics.nu 0.1\n", encoding="utf-8")
        assert app.run(["recover", "--config", str(path)]) == ExitCodes.ERROR

    def test_bad_override(self, app, tmp_path):
        path = write_config(tmp_path, SMALL_CONFIG)
        assert app.run(["recover", "--config", str(path), "recovery.epsilon=1"]) == ExitCodes.ERROR

    @pytest.mark.parametrize("argv", [[], ["simulate"], ["recover"]])
    def test_bad_command_line(self, app, argv):
        assert app.run(argv) == ExitCodes.ERROR

    def test_crashing_handler(self, tmp_path):
        dp = CommandDispatch(title="explode", description="always fails")

        @dp.wrap_handler()
        def explode(cmd, app):
            raise RuntimeError("boom")

        path = write_config(tmp_path, SMALL_CONFIG)
        application = init_app(log_dir=str(tmp_path / "logs"), log_level="CRITICAL").setup(commands=[dp])
        try:
            assert application.run(["explode", "--config", str(path)]) == ExitCodes.ERROR
        finally:
            logger.remove()
        assert "boom" in (tmp_path / "logs" / "errors.log").read_text(encoding="utf-8")

    def test_run_requires_setup(self, tmp_path):
        with pytest.raises(RuntimeError):
            init_app(log_dir=str(tmp_path / "logs")).run(["truth"])
