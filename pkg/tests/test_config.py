import math

import pytest

from bardina.core.errors import ConfigError
from bardina.models.observation import StageObservation
from bardina.models.physics import ForcingKind
from bardina.models.schedule import RecoveryMode
from bardina.services.config_service import ConfigService
from tests.conftest import SMALL_CONFIG, write_config

MINIMAL = """\
physics.nu = 0.1
physics.alpha_true = 0.25
recovery.alpha0 = 0.2
recovery.alpha1 = 0.3
recovery.beta1_sq = 0.04
"""


class TestParsing:
    def test_minimal_config_gets_defaults(self):
        cfg = ConfigService.parse_text(MINIMAL)
        assert cfg.grid.n_grid == 32
        assert cfg.grid.L == pytest.approx(2.0 * math.pi, rel=1e-15)
        assert cfg.physics.forcing.kind is ForcingKind.MANUFACTURED_STEADY
        assert cfg.physics.forcing.amplitude == 0.5
        assert cfg.schedule.epsilon == pytest.approx(0.02)
        assert cfg.schedule.mode is RecoveryMode.PRACTICAL
        assert cfg.observer.stage_observation is StageObservation.PREDICTOR
        assert cfg.sample_every == 50
        assert cfg.truth_dump_dir is None

    def test_comments_and_blank_lines(self):
        cfg = ConfigService.parse_text("# header\n\n" + MINIMAL + "seed = 11  # trailing\n")
        assert cfg.seed == 11

    @pytest.mark.parametrize("text, expected", [
        ("2*pi", 2.0 * math.pi),
        ("pi", math.pi),
        ("pi/2", math.pi / 2.0),
        ("1/3", 1.0 / 3.0),
        ("1e-2", 0.01),
    ])
    def test_numeric_expressions(self, text, expected):
        cfg = ConfigService.parse_text(MINIMAL + f"domain.L = {text}\n")
        assert cfg.grid.L == pytest.approx(expected, rel=1e-15)

    def test_lists(self):
        cfg = ConfigService.parse_text(MINIMAL + "recovery.eta = 10, 20\nrecovery.N_obs = 6,8\n")
        assert cfg.schedule.eta == (10.0, 20.0)
        assert cfg.schedule.N_at(1) == 6
        assert cfg.schedule.N_at(5) == 8

    def test_overrides_win(self, tmp_path):
        path = write_config(tmp_path, SMALL_CONFIG)
        cfg = ConfigService.parse_config(path, ["recovery.eta=10", "seed=3"])
        assert cfg.schedule.eta == (10.0,)
        assert cfg.seed == 3
        assert cfg.output_dir == tmp_path / "out"


class TestErrors:
    def test_epsilon_out_of_range(self):
        with pytest.raises(ConfigError) as info:
            ConfigService.parse_text(MINIMAL + "recovery.epsilon = 0.05\n")
        assert info.value.key == "recovery.epsilon"
        assert "0<ε<α₀²" in str(info.value)

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as info:
            ConfigService.parse_text(MINIMAL + "physics.viscosity = 1\n")
        assert info.value.key == "physics.viscosity"

    def test_duplicate_key(self):
        with pytest.raises(ConfigError):
            ConfigService.parse_text(MINIMAL + "physics.nu = 0.2\n")

    def test_missing_required_key(self):
        text = MINIMAL.replace("physics.alpha_true = 0.25\n", "")
        with pytest.raises(ConfigError) as info:
            ConfigService.parse_text(text)
        assert info.value.key == "physics.alpha_true"

    def test_bad_integer(self):
        with pytest.raises(ConfigError) as info:
            ConfigService.parse_text(MINIMAL + "grid.n_grid = 16.5\n")
        assert info.value.key == "grid.n_grid"

    def test_missing_equals_sign(self):
        with pytest.raises(ConfigError):
            ConfigService.parse_text(MINIMAL + "seed 3\n")

    def test_initial_guess_outside_bounds(self):
        with pytest.raises(ConfigError):
            ConfigService.parse_text(MINIMAL, ["recovery.beta1_sq=0.2"])

    def test_strict_mode_needs_constant(self):
        with pytest.raises(ConfigError) as info:
            ConfigService.parse_text(MINIMAL + "recovery.mode = strict\n")
        assert info.value.key == "recovery.c_gn"
        cfg = ConfigService.parse_text(MINIMAL + "recovery.mode = strict\nrecovery.c_gn = 0.5\n")
        assert cfg.schedule.strict

    def test_cutoff_beyond_grid(self):
        with pytest.raises(ConfigError):
            ConfigService.parse_text(MINIMAL + "grid.n_grid = 8\nrecovery.N_obs = 6\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            ConfigService.parse_config(tmp_path / "absent.cfg")

    def test_bad_override(self):
        with pytest.raises(ConfigError):
            ConfigService.parse_text(MINIMAL, ["seed"])


class TestDump:
    def test_resolved_config_reparses(self, tmp_path):
        cfg = ConfigService.parse_text(SMALL_CONFIG + f"output.dir = {tmp_path}\n")
        path = ConfigService.write_resolved(cfg)
        assert path == tmp_path / "resolved.cfg"
        assert ConfigService.parse_config(path) == cfg

    def test_summary(self):
        lines = ConfigService.summary(ConfigService.parse_text(SMALL_CONFIG))
        assert any("n_grid=8" in line for line in lines)
