"""
Артефакты команды: iterations.csv, sync.csv, report.json и plots/*.svg.

Все числа в CSV пишутся с 17 значащими цифрами.
"""
from pathlib import Path
from typing import Any, Iterable, List, Optional

import matplotlib
import msgspec
import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from bardina.core.errors import ArtifactError
from bardina.managers.experiment_manager import SYNC_COLUMNS, ExperimentOutcome
from bardina.models.experiment import RunReport
from bardina.models.records import IterationRecord
from bardina.utils.constants import Sections
from bardina.utils.logger import AlignedLogger

log = AlignedLogger.section(Sections.REPORT)

ITERATIONS_FILE = "iterations.csv"
SYNC_FILE = "sync.csv"
REPORT_FILE = "report.json"
PLOTS_DIR = "plots"

ITERATION_COLUMNS = [
    "n",
    "t_n",
    "t_hat_n",
    "t_np1",
    "eta_n",
    "N_n",
    "N_tilde_n",
    "beta_n_sq",
    "beta_np1_sq",
    "abs_beta_sq_err",
    "delta_n",
    "zeta_n",
    "g_norm_combo",
    "conditions_passed",
    "status",
]

FLOAT_FORMAT = "%.17g"

# стабильные id в SVG
matplotlib.rcParams["svg.hashsalt"] = "bardina"


def _enc_hook(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise NotImplementedError(f"cannot encode {type(obj).__name__}")


class ReportManager:
    """
    Пишет и перечитывает артефакты одного каталога output.dir.

    Example:
        >>> manager = ReportManager(cfg.output_dir)
        >>> manager.write_outcome(outcome)
    """

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)

    @property
    def plots_dir(self) -> Path:
        return self.output_dir / PLOTS_DIR

    # --- Таблицы ---
    @staticmethod
    def iterations_frame(records: Iterable[IterationRecord]) -> pd.DataFrame:
        rows = [
            (
                r.n, r.t_n, r.t_hat_n, r.t_np1, r.eta_n, r.N_n, r.N_tilde_n,
                r.beta_n_sq, r.beta_np1_sq, r.abs_beta_sq_err, r.delta_n, r.zeta_n,
                r.g_norm_combo, r.condition_report.passed_string(), r.status.value,
            )
            for r in records
        ]
        return pd.DataFrame(rows, columns=ITERATION_COLUMNS)

    @staticmethod
    def write_csv(frame: pd.DataFrame, path: Path) -> Path:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return path

    def read_iterations(self) -> pd.DataFrame:
        path = self.output_dir / ITERATIONS_FILE
        frame = pd.read_csv(path, dtype={"conditions_passed": str, "status": str})
        self._check_columns(frame, ITERATION_COLUMNS, path)
        return frame

    def read_sync(self) -> pd.DataFrame:
        path = self.output_dir / SYNC_FILE
        frame = pd.read_csv(path)
        self._check_columns(frame, SYNC_COLUMNS, path)
        return frame

    @staticmethod
    def _check_columns(frame: pd.DataFrame, columns: List[str], path: Path) -> None:
        missing = [c for c in columns if c not in frame.columns]
        if missing:
            raise ArtifactError(f"{path}: missing columns {missing}")

    # --- report.json ---
    def write_report(self, report: RunReport) -> Path:
        path = self.output_dir / REPORT_FILE
        payload = msgspec.json.encode(report, enc_hook=_enc_hook)
        path.write_bytes(msgspec.json.format(payload, indent=2))
        return path

    # --- Графики ---
    def plot_beta_error(self, iterations: pd.DataFrame) -> Optional[Path]:
        """|beta_{n+1}^2 - alpha^2| по n в логарифмическом масштабе."""
        data = iterations.dropna(subset=["abs_beta_sq_err"])
        data = data[data["abs_beta_sq_err"] > 0.0]
        if data.empty:
            log.debug("beta error plot skipped: no positive errors")
            return None

        fig = Figure(figsize=(6.0, 4.0))
        ax = fig.subplots()
        ax.semilogy(data["n"], data["abs_beta_sq_err"], marker="o", label="|beta_{n+1}^2 - alpha^2|")
        combos = data.dropna(subset=["g_norm_combo"])
        combos = combos[combos["g_norm_combo"] > 0.0]
        if not combos.empty:
            ax.semilogy(combos["n"], combos["g_norm_combo"], marker="s", linestyle="--", label="||g_n(t_n)|| + beta_n ||grad g_n(t_n)||")
        ax.set_xlabel("iteration n")
        ax.set_ylabel("error")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        return self._save(fig, "beta_error.svg")

    def plot_sync(self, sync: pd.DataFrame) -> Optional[Path]:
        """||g||^2 + beta^2 ||grad g||^2 по времени в логарифмическом масштабе."""
        data = sync[sync["lyapunov"] > 0.0].sort_values("t", kind="stable")
        if data.empty:
            log.debug("sync plot skipped: no positive errors")
            return None

        fig = Figure(figsize=(6.0, 4.0))
        ax = fig.subplots()
        for n, part in data.groupby("n", sort=True):
            ax.semilogy(part["t"], part["lyapunov"], label=f"n={n}")
        ax.set_xlabel("t")
        ax.set_ylabel("||g||^2 + beta^2 ||grad g||^2")
        ax.grid(True, which="both", alpha=0.3)
        if data["n"].nunique() <= 10:
            ax.legend()
        return self._save(fig, "sync_error.svg")

    def _save(self, fig: Figure, name: str) -> Path:
        self.plots_dir.mkdir(parents=True, exist_ok=True)
        path = self.plots_dir / name
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        return path

    # --- Сценарии ---
    def write_outcome(self, outcome: ExperimentOutcome) -> List[Path]:
        """Пишет все артефакты команды и возвращает их пути."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        written: List[Path] = []

        iterations = self.iterations_frame(outcome.report.iterations)
        if outcome.result is not None:
            written.append(self.write_csv(iterations, self.output_dir / ITERATIONS_FILE))
        if not outcome.sync.empty:
            written.append(self.write_csv(outcome.sync, self.output_dir / SYNC_FILE))
        written.append(self.write_report(outcome.report))

        for path in (
            self.plot_beta_error(iterations) if not iterations.empty else None,
            self.plot_sync(outcome.sync) if not outcome.sync.empty else None,
        ):
            if path is not None:
                written.append(path)

        log.info(f"{len(written)} artifacts written to {self.output_dir}")
        return written

    def rebuild_plots(self) -> List[Path]:
        """
        Перестраивает plots/ по CSV в output_dir.

        Raises:
            ArtifactError: В каталоге нет ни iterations.csv, ни sync.csv
        """
        has_iterations = (self.output_dir / ITERATIONS_FILE).is_file()
        has_sync = (self.output_dir / SYNC_FILE).is_file()
        if not (has_iterations or has_sync):
            raise ArtifactError(f"{self.output_dir}: neither {ITERATIONS_FILE} nor {SYNC_FILE} found")

        written: List[Path] = []
        if has_iterations:
            path = self.plot_beta_error(self.read_iterations())
            if path is not None:
                written.append(path)
        if has_sync:
            path = self.plot_sync(self.read_sync())
            if path is not None:
                written.append(path)
        log.info(f"{len(written)} plots rebuilt in {self.plots_dir}")
        return written


__all__ = [
    'ITERATIONS_FILE',
    'SYNC_FILE',
    'REPORT_FILE',
    'ITERATION_COLUMNS',
    'ReportManager',
]
