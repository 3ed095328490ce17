"""
Бинарные снимки полей и дампы траекторий.

Файл снимка: заголовок {magic "BRDF1", L: <f8, n_grid: <u4, flags: <u4},
затем коэффициенты <c16 на полной решетке в порядке FFT (C-порядок),
блок x, затем y, затем z. Флаги: бит 0 - бездивергентное, бит 1 - деалиасированное.
"""
import math
from pathlib import Path
from typing import Iterable, Iterator, Optional, Tuple

import numpy as np
import pandas as pd

from bardina.core.errors import FieldError, GridMismatchError
from bardina.models.field import SpectralField
from bardina.models.grid import GridSpec
from bardina.models.observation import ObservationStream
from bardina.services.bardina import TruthNorms
from bardina.utils.constants import Sections
from bardina.utils.logger import AlignedLogger

log = AlignedLogger.section(Sections.SNAPSHOT)

MAGIC = b"BRDF1"
HEADER_DTYPE = np.dtype([("magic", "S5"), ("L", "<f8"), ("n_grid", "<u4"), ("flags", "<u4")])
COEFF_DTYPE = np.dtype("<c16")

FLAG_DIVERGENCE_FREE = 1
FLAG_DEALIASED = 2

INDEX_FILE = "index.txt"
INDEX_COLUMNS = ["time", "filename", "norm_u", "norm_grad_u", "norm_A_u", "norm_u_t"]


class SnapshotService:

    @classmethod
    def write_field(cls, path: Path, field: SpectralField) -> Path:
        path = Path(path)
        header = np.zeros(1, dtype=HEADER_DTYPE)
        header["magic"] = MAGIC
        header["L"] = field.grid.L
        header["n_grid"] = field.grid.n_grid
        header["flags"] = (FLAG_DIVERGENCE_FREE if field.divergence_free else 0) | (
            FLAG_DEALIASED if field.dealiased else 0
        )
        with path.open("wb") as fh:
            fh.write(header.tobytes())
            fh.write(np.ascontiguousarray(field.coeffs, dtype=COEFF_DTYPE).tobytes())
        return path

    @classmethod
    def read_field(cls, path: Path, grid: Optional[GridSpec] = None) -> SpectralField:
        """
        Читает снимок.

        Args:
            path: Файл .brdf
            grid: Ожидаемая сетка (None - сетка строится по заголовку)

        Raises:
            FieldError: Неверный magic или размер файла
            GridMismatchError: Заголовок не совпадает с grid
        """
        data = Path(path).read_bytes()
        if len(data) < HEADER_DTYPE.itemsize:
            raise FieldError(f"{path}: file is shorter than the snapshot header")
        header = np.frombuffer(data[:HEADER_DTYPE.itemsize], dtype=HEADER_DTYPE)[0]
        if bytes(header["magic"]) != MAGIC:
            raise FieldError(f"{path}: bad magic {bytes(header['magic'])!r}")

        L, n_grid, flags = float(header["L"]), int(header["n_grid"]), int(header["flags"])
        if grid is None:
            grid = GridSpec(L=L, n_grid=n_grid)
        elif grid.n_grid != n_grid or not math.isclose(grid.L, L, rel_tol=1e-15, abs_tol=0.0):
            raise GridMismatchError(f"{path}: snapshot grid (L={L}, n={n_grid}) differs from (L={grid.L}, n={grid.n_grid})")

        body = data[HEADER_DTYPE.itemsize:]
        expected = 3 * n_grid ** 3 * COEFF_DTYPE.itemsize
        if len(body) != expected:
            raise FieldError(f"{path}: expected {expected} coefficient bytes, found {len(body)}")
        coeffs = np.frombuffer(body, dtype=COEFF_DTYPE).reshape(grid.shape)
        return SpectralField(
            grid,
            coeffs,
            divergence_free=bool(flags & FLAG_DIVERGENCE_FREE),
            dealiased=bool(flags & FLAG_DEALIASED),
        )

    @classmethod
    def dump_trajectory(
        cls,
        directory: Path,
        nodes: Iterable[Tuple[float, SpectralField, SpectralField]],
    ) -> pd.DataFrame:
        """
        Пишет u_XXXXXX.brdf и ut_XXXXXX.brdf для каждого узла и index.txt.

        Узлы потребляются по одному, траектория целиком в памяти не держится.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        rows = []
        for i, (t, u, u_t) in enumerate(nodes):
            name = f"u_{i:06d}.brdf"
            cls.write_field(directory / name, u)
            cls.write_field(directory / f"ut_{i:06d}.brdf", u_t)
            norms = TruthNorms.of(u, u_t)
            rows.append((t, name, norms.norm_u, norms.norm_grad, norms.norm_A, norms.norm_ut))

        index = pd.DataFrame(rows, columns=INDEX_COLUMNS)
        index.to_csv(directory / INDEX_FILE, sep=" ", index=False, float_format="%.17g")
        log.info(f"trajectory dumped: {len(index)} snapshots to {directory}")
        return index

    @classmethod
    def read_index(cls, directory: Path) -> pd.DataFrame:
        path = Path(directory) / INDEX_FILE
        if not path.is_file():
            raise FieldError(f"{directory}: no {INDEX_FILE} in the truth dump")
        index = pd.read_csv(path, sep=" ")
        missing = [c for c in INDEX_COLUMNS if c not in index.columns]
        if missing:
            raise FieldError(f"{path}: missing columns {missing}")
        return index

    @classmethod
    def iter_dump(cls, directory: Path, grid: GridSpec) -> Iterator[Tuple[float, SpectralField, SpectralField]]:
        """Узлы дампа (t, u, u_t) в порядке index.txt, по одному."""
        directory = Path(directory)
        index = cls.read_index(directory)
        for t, name in zip(index["time"], index["filename"]):
            u = cls.read_field(directory / name, grid)
            u_t = cls.read_field(directory / ("ut_" + name[len("u_"):]), grid)
            yield float(t), u, u_t

    @classmethod
    def stream_from_dump(cls, directory: Path, grid: GridSpec, N_obs: int) -> Tuple[ObservationStream, pd.DataFrame]:
        """
        Поток наблюдений из дампа: из каждого снимка берутся только моды 0 < |K| < N_obs.

        Raises:
            FieldError: Дамп пуст или время в нем неравномерно
        """
        directory = Path(directory)
        index = cls.read_index(directory)
        if len(index) < 2:
            raise FieldError(f"{directory}: a truth dump needs at least two snapshots")
        times = index["time"].to_numpy(dtype=np.float64)
        steps = np.diff(times)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise FieldError(f"{directory}: snapshot times are not uniform")

        stream = ObservationStream(grid, N_obs, float(steps[0]), t0=float(times[0]))
        for t, u, u_t in cls.iter_dump(directory, grid):
            stream.append(t, u, u_t)
        log.info(f"observation stream loaded from {directory}: {len(stream)} nodes, N_obs={N_obs}")
        return stream, index


__all__ = [
    'MAGIC',
    'HEADER_DTYPE',
    'INDEX_COLUMNS',
    'SnapshotService',
]
