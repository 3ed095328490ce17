
import math

import pytest

from bardina.managers.experiment_manager import SYNC_COLUMNS, ExperimentManager
from bardina.managers.report_manager import ITERATIONS_FILE, SYNC_FILE, ReportManager
from bardina.models.records import IterationStatus
from bardina.services.config_service import ConfigService
from bardina.utils.constants import DEGENERATE_EXPLANATION, ExitCodes
from bardina.utils.tools import non_increasing
from tests.conftest import DEGENERATE_CONFIG, REFERENCE_CONFIG, SMALL_CONFIG, config_text

ALPHA_SQ = 0.0625
ENVELOPES = ("energy_M1", "enstrophy_M2", "time_derivative_M3", "observer_M4")


def load(base: str, tmp_path, *overrides: str):
    return ConfigService.parse_text(config_text(base, tmp_path / "out"), overrides)


class TestTwinExperiment:
    def test_small_recovery(self, tmp_path):
        outcome = ExperimentManager.run_twin_experiment(load(SMALL_CONFIG, tmp_path))
        report = outcome.report
        assert report.exit_code == ExitCodes.OK
        assert report.status == IterationStatus.HALTED_FINAL_TIME.value
        assert report.alpha_sq_true == pytest.approx(ALPHA_SQ)
        assert [r.n for r in report.iterations] == [1, 2]
        assert all(r.abs_beta_sq_err is not None for r in report.iterations)
        assert report.iterations[0].abs_beta_sq_err < abs(0.04 - ALPHA_SQ)
        assert report.fitted_contraction_ratio is None
        for name in ENVELOPES:
            assert report.envelope_checks[name] > 0
            assert report.envelope_violations[name] == 0
        assert list(outcome.sync.columns) == SYNC_COLUMNS
        assert set(outcome.sync["n"]) == {1, 2}

    def test_fixed_point(self, tmp_path):
        cfg = load(
            SMALL_CONFIG, tmp_path, "observer.w0 = truth", f"recovery.beta1_sq = {ALPHA_SQ}", "time.T_final = 3.75",
        )
        report = ExperimentManager.run_twin_experiment(cfg).report
        assert len(report.iterations) == 5
        for record in report.iterations:
            assert record.abs_beta_sq_err <= 1e-10
            assert record.g_norm_combo <= 1e-10
        assert report.fitted_contraction_ratio is None

    def test_degenerate_stops_immediately(self, tmp_path):
        report = ExperimentManager.run_twin_experiment(load(DEGENERATE_CONFIG, tmp_path)).report
        assert report.exit_code == ExitCodes.DEGENERATE
        assert report.status == IterationStatus.HALTED_DEGENERATE.value
        assert len(report.iterations) == 1
        assert report.beta_sq_final == 0.04
        assert DEGENERATE_EXPLANATION in report.notes

    def test_measured_derivatives(self, tmp_path):
        report = ExperimentManager.run_twin_experiment(
            load(SMALL_CONFIG, tmp_path, "observer.derivatives = measured")
        ).report
        assert report.exit_code == ExitCodes.OK
        assert report.iterations[0].abs_beta_sq_err < abs(0.04 - ALPHA_SQ)

    def test_reuses_truth_dump(self, tmp_path):
        cfg = load(SMALL_CONFIG, tmp_path)
        truth = ExperimentManager.run_truth(cfg)
        assert truth.report.exit_code == ExitCodes.OK
        assert (tmp_path / "out" / "truth" / "index.txt").is_file()

        direct = ExperimentManager.run_twin_experiment(cfg).report
        replayed = ExperimentManager.run_twin_experiment(
            load(SMALL_CONFIG, tmp_path, f"truth.dump_dir = {tmp_path / 'out' / 'truth'}")
        ).report
        assert replayed.beta_sq_final == pytest.approx(direct.beta_sq_final, rel=1e-12)
        assert replayed.dt == pytest.approx(direct.dt, rel=1e-12)


class TestAssimilation:
    def test_known_alpha_synchronizes(self, tmp_path):
        cfg = load(SMALL_CONFIG, tmp_path, f"recovery.beta1_sq = {ALPHA_SQ}")
        outcome = ExperimentManager.run_assimilation(cfg)
        lyapunov = outcome.sync["lyapunov"].to_numpy()
        assert lyapunov[-1] <= 1e-6 * lyapunov[0]
        assert outcome.report.fitted_sync_rate < 0.0
        assert outcome.report.envelope_violations["observer_M4"] == 0


class TestConditions:
    def test_first_iteration(self, tmp_path):
        outcome = ExperimentManager.first_iteration_conditions(load(SMALL_CONFIG, tmp_path))
        selection = outcome.selection
        assert outcome.report.exit_code == ExitCodes.OK
        assert (selection.eta, selection.N) == (20.0, 4)
        assert [r.code for r in selection.report] == ["4.3", "4.4", "4.5", "4.6", "4.7", "4.8", "4.9", "4.10"]
        # 20/4^2 > 0.1/2
        assert not selection.report["4.4"].satisfied

    def test_degenerate_window(self, tmp_path):
        outcome = ExperimentManager.first_iteration_conditions(load(DEGENERATE_CONFIG, tmp_path))
        assert outcome.report.exit_code == ExitCodes.DEGENERATE


@pytest.mark.slow
class TestReferenceExperiment:
    def test_recovery_converges(self, tmp_path):
        report = ExperimentManager.run_twin_experiment(load(REFERENCE_CONFIG, tmp_path)).report
        updated = [r for r in report.iterations if r.status == IterationStatus.UPDATED]
        errors = [abs(0.04 - ALPHA_SQ)] + [r.abs_beta_sq_err for r in updated]
        assert len(updated) >= 6
        assert non_increasing(errors, floor=1e-12)
        assert report.fitted_contraction_ratio <= 0.75
        assert abs(report.beta_sq_final - ALPHA_SQ) / ALPHA_SQ <= 1e-3
        assert report.fitted_g_ratio <= 0.75

    def test_synchronization_rate(self, tmp_path):
        cfg = load(REFERENCE_CONFIG, tmp_path, f"recovery.beta1_sq = {ALPHA_SQ}")
        outcome = ExperimentManager.run_assimilation(cfg)
        assert outcome.report.fitted_sync_rate <= -20.0 / 4.0

        sync = outcome.sync
        lyapunov = sync["lyapunov"].to_numpy()
        initial = lyapunov[0]
        # после установления 5/eta, выборка через 0.1
        settled = lyapunov[sync["t"].to_numpy() >= 0.25][::10]
        assert non_increasing(list(settled), floor=1e-12 * initial)
        assert lyapunov.min() <= 1e-10 * initial
        assert lyapunov[-1] <= 1e-10 * initial

    @pytest.mark.parametrize("seed", range(1, 6))
    def test_envelopes_on_long_forced_runs(self, tmp_path, seed):
        cfg = load(REFERENCE_CONFIG, tmp_path, f"seed = {seed}", "time.T_final = 20")
        report = ExperimentManager.run_assimilation(cfg).report
        for name in ENVELOPES:
            assert report.envelope_checks[name] >= 2000
            assert report.envelope_violations[name] == 0

    def test_same_seed_same_bytes(self, tmp_path):
        files = []
        for k in range(2):
            cfg = load(REFERENCE_CONFIG, tmp_path / f"run{k}", "time.T_final = 3")
            ReportManager(cfg.output_dir).write_outcome(ExperimentManager.run_assimilation(cfg))
            files.append(cfg.output_dir / SYNC_FILE)
        assert files[0] != files[1]
        assert files[0].read_bytes() == files[1].read_bytes()

    def test_same_seed_same_iterations(self, tmp_path):
        files = []
        for k in range(2):
            cfg = load(REFERENCE_CONFIG, tmp_path / f"run{k}", "time.T_final = 3.25")
            ReportManager(cfg.output_dir).write_outcome(ExperimentManager.run_twin_experiment(cfg))
            files.append(cfg.output_dir / ITERATIONS_FILE)
        assert files[0].read_bytes() == files[1].read_bytes()

    def test_time_step_refinement(self, tmp_path):
        # первая итерация: t_hat = 0.25, t_2 = 1.25
        finals = []
        for k, dt in enumerate((0.01, 0.005, 0.0025, 0.00125)):
            cfg = ConfigService.parse_text(
                config_text(REFERENCE_CONFIG, tmp_path / f"out{k}"),
                ["time.T_final=1.25", f"time.dt={dt}"],
            )
            report = ExperimentManager.run_twin_experiment(cfg).report
            assert report.dt == pytest.approx(dt, rel=1e-12)
            assert len(report.iterations) == 1
            finals.append(report.beta_sq_final)

        diffs = [abs(a - b) for a, b in zip(finals, finals[1:])]
        orders = [math.log2(a / b) for a, b in zip(diffs, diffs[1:])]
        assert min(orders) >= 1.8
