"""
Общие фикстуры: маленькие сетки, случайные поля, тексты конфигураций.
"""
import math
from pathlib import Path

import numpy as np
import pytest
from loguru import logger

from bardina.handlers import handlers
from bardina.instance import init_app
from bardina.models.field import SpectralField
from bardina.models.grid import GridSpec
from bardina.models.physics import ForcingKind, ForcingSpec, PhysicalParams, SpectrumProfile
from bardina.models.observation import ObservationStream
from bardina.services.bardina import iterate_truth
from bardina.services.spectral import enforce_hermitian, random_divfree_field

TWO_PI = 2.0 * math.pi

SMALL_CONFIG = """\
# laminar forced run on an 8^3 grid
domain.L = 2*pi
grid.n_grid = 8
physics.nu = 0.1
physics.alpha_true = 0.25
forcing.kind = manufactured_steady
forcing.amplitude = 0.5
initial.kind = random
initial.amplitude = 0.1
recovery.alpha0 = 0.2
recovery.alpha1 = 0.3
recovery.beta1_sq = 0.04
recovery.eta = 20
recovery.N_obs = 4
time.dt = 0.01
time.window = 0.5
time.T_final = 1.5
seed = 7
"""

DEGENERATE_CONFIG = """\
domain.L = 2*pi
grid.n_grid = 8
physics.nu = 0.1
physics.alpha_true = 0.25
forcing.kind = none
initial.kind = shear
initial.amplitude = 0.1
recovery.alpha0 = 0.2
recovery.alpha1 = 0.3
recovery.beta1_sq = 0.04
recovery.eta = 20
recovery.N_obs = 4
time.dt = 0.01
time.window = 0.5
time.T_final = 1.5
"""

REFERENCE_CONFIG = """\
domain.L = 2*pi
grid.n_grid = 32
physics.nu = 0.1
physics.alpha_true = 0.25
forcing.kind = manufactured_steady
forcing.amplitude = 0.5
initial.kind = random
initial.amplitude = 0.1
recovery.alpha0 = 0.2
recovery.alpha1 = 0.3
recovery.beta1_sq = 0.04
recovery.eta = 20
recovery.N_obs = 8
time.dt = 0.01
time.window = 1
time.T_final = 10
seed = 1
"""


def config_text(base: str, output_dir: Path, *extra: str) -> str:
    """Текст конфигурации с output.dir и дополнительными строками."""
    lines = [base, f"output.dir = {output_dir}"]
    lines.extend(extra)
    return "\n".join(lines) + "\n"


def write_config(directory: Path, base: str, *extra: str, name: str = "experiment.cfg") -> Path:
    path = directory / name
    path.write_text(config_text(base, directory / "out", *extra), encoding="utf-8")
    return path


def random_field(grid: GridSpec, seed: int, dealiased: bool = True, norm: float = 1.0) -> SpectralField:
    return random_divfree_field(grid, SpectrumProfile(slope=1.0, k_cut=8.0), seed, norm=norm, dealiased=dealiased)


def random_raw_field(grid: GridSpec, seed: int) -> SpectralField:
    """Эрмитово поле без проекции Лере."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return SpectralField(grid, enforce_hermitian(raw, grid))


def truth_stream(grid: GridSpec, params: PhysicalParams, u0: SpectralField, N_obs: int, dt: float, steps: int):
    """Поток наблюдений истины и сами состояния u в узлах 0..steps."""
    stream = ObservationStream(grid, N_obs, dt)
    states = []
    for _, t, u, u_t in iterate_truth(u0, dt, steps, params):
        stream.append(t, u, u_t)
        states.append(u)
    return stream, states


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    scale = float(np.max(np.abs(expected)))
    diff = float(np.max(np.abs(actual - expected)))
    return diff / scale if scale else diff


@pytest.fixture
def grid8() -> GridSpec:
    return GridSpec(L=TWO_PI, n_grid=8)


@pytest.fixture
def grid16() -> GridSpec:
    return GridSpec(L=TWO_PI, n_grid=16)


@pytest.fixture
def unit_grid() -> GridSpec:
    return GridSpec(L=1.0, n_grid=8)


@pytest.fixture
def unforced() -> PhysicalParams:
    return PhysicalParams(nu=0.1, alpha=0.25)


@pytest.fixture
def steady_params() -> PhysicalParams:
    return PhysicalParams(
        nu=0.1,
        alpha=0.25,
        forcing=ForcingSpec(kind=ForcingKind.MANUFACTURED_STEADY, amplitude=0.5),
    )


@pytest.fixture
def lowmode_params() -> PhysicalParams:
    return PhysicalParams(
        nu=0.1,
        alpha=0.25,
        forcing=ForcingSpec(kind=ForcingKind.STEADY_LOWMODE, amplitude=0.2),
    )


@pytest.fixture
def app(tmp_path):
    application = init_app(log_dir=str(tmp_path / "logs"), log_level="WARNING")
    application.setup(commands=handlers)
    yield application
    logger.remove()
