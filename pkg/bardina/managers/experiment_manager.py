"""
Эксперимент-двойник.

Проход 1 считает истину со скрытым alpha и строит поток наблюдений,
проход 2 восстанавливает alpha только по потоку, проход 3 повторяет
истину и сравнивает ее со снимками наблюдателя. Величины, требующие
знания истины (g_n, |beta_n^2 - alpha^2|, оценки ошибки), считаются
только здесь и добавляются в записи после восстановления.
"""
import math
import time
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import pandas as pd

from bardina.models.envelope import BoundsEnvelope
from bardina.models.experiment import (
    DerivativeSource,
    ExperimentConfig,
    InitialKind,
    ObserverStart,
    RunReport,
)
from bardina.models.field import SpectralField
from bardina.models.observation import NudgedState, ObservationStream
from bardina.models.physics import ObserverPhysics
from bardina.models.records import (
    ConditionReport,
    IterationRecord,
    IterationStatus,
    ObserverSnapshot,
    RecoveryResult,
)
from bardina.services.bardina import (
    TruthNorms,
    bounds_from_initial,
    eval_M1,
    eval_M2,
    eval_M3,
    iterate_truth,
    observer_physics,
    steady_state,
    uniform_steps,
)
from bardina.services.diagnostics import (
    EnvelopeAudit,
    sync_error_bound,
    theorem_envelopes,
    update_error_bound,
    verify_envelopes,
)
from bardina.services.integrator import cfl_limit
from bardina.services.nudging import ETA_DT_LIMIT, iterate_nudged, sync_error
from bardina.services.recovery import (
    Selection,
    check_conditions,
    condition_context,
    eval_M4,
    locate_window,
    recovery_loop,
    select_parameters,
)
from bardina.services.snapshot_service import SnapshotService
from bardina.services.spectral import random_divfree_field, sine_mode, sobolev_norm_sq
from bardina.utils.constants import DEGENERATE_EXPLANATION, Commands, ExitCodes, Sections
from bardina.utils.logger import AlignedLogger
from bardina.utils.tools import fit_geometric, fit_log_rate

log = AlignedLogger.section(Sections.HARNESS)

SYNC_COLUMNS = ["n", "t", "g_sq", "beta_grad_g_sq", "lyapunov"]

# ошибки ниже этой доли первой считаются уровнем округления и в подгонку не входят
CONTRACTION_FLOOR = 1e-8
# абсолютный допуск оценки синхронизации в долях энергии истины
SYNC_FLOOR = 1e-20
MIN_FIT_POINTS = 3
_TIME_TOL = 1e-9

EXIT_CODES: Dict[IterationStatus, int] = {
    IterationStatus.UPDATED: ExitCodes.OK,
    IterationStatus.HALTED_FINAL_TIME: ExitCodes.OK,
    IterationStatus.HALTED_DEGENERATE: ExitCodes.DEGENERATE,
    IterationStatus.HALTED_INFEASIBLE: ExitCodes.INFEASIBLE,
    IterationStatus.HALTED_REGIME_BREACH: ExitCodes.ERROR,
}


@dataclass
class PreparedRun:
    """
    Итог прохода по истине.

    Attributes:
        u0: Начальное поле истины
        w0: Начальное поле наблюдателя
        dt: Фактический шаг по времени
        n_steps: Число шагов до T
        envelope: Априорные оценки начальных данных
        physics: Данные для стороны восстановления (без alpha)
        stream: Поток наблюдений
        truth_norms: Нормы истины в каждом узле
    """
    u0: SpectralField
    w0: SpectralField
    dt: float
    n_steps: int
    envelope: BoundsEnvelope
    physics: ObserverPhysics
    stream: ObservationStream
    truth_norms: List[Tuple[float, TruthNorms]]


@dataclass
class ExperimentOutcome:
    """Отчет команды и данные для артефактов."""
    report: RunReport
    result: Optional[RecoveryResult] = None
    sync: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=SYNC_COLUMNS))
    selection: Optional[Selection] = None


def _norms(w: SpectralField) -> Tuple[float, float]:
    return sobolev_norm_sq(w, 0), sobolev_norm_sq(w, 1)


def _sync_hypotheses(report: ConditionReport) -> bool:
    """Оценка ошибки синхронизации доказана при выполненных 4.4 и 4.5."""
    return report["4.4"].satisfied and report["4.5"].satisfied


def _fit_ratio(values: List[float]) -> Optional[float]:
    # нулевая начальная ошибка: восстанавливать нечего
    if not values or not values[0] > 0.0:
        return None
    return fit_geometric(values, floor_ratio=CONTRACTION_FLOOR)


class ExperimentManager:

    # --- Начальные данные ---
    @staticmethod
    def initial_field(cfg: ExperimentConfig) -> SpectralField:
        """
        Начальное поле истины.

        random: случайное поле со среднеквадратичной скоростью amplitude;
        shear: amplitude * sin(2 pi x / L) e_z; steady: u0 = u*.
        """
        init = cfg.initial
        if init.kind is InitialKind.SHEAR:
            return sine_mode(cfg.grid, (1, 0, 0), init.amplitude)
        if init.kind is InitialKind.STEADY:
            return steady_state(cfg.grid, cfg.physics)
        return random_divfree_field(
            cfg.grid,
            init.spectrum(),
            cfg.seed,
            norm=init.amplitude * math.sqrt(cfg.grid.volume),
            dealiased=True,
        )

    @staticmethod
    def effective_dt(cfg: ExperimentConfig, u0: SpectralField) -> Tuple[float, int]:
        """
        min(time.dt, CFL по u0, 0.5/max eta), затем уменьшение до целого
        числа шагов на [0, T].
        """
        limits = {"time.dt": cfg.dt, "cfl": cfl_limit(u0)}
        if not cfg.schedule.strict:
            limits["eta*dt"] = ETA_DT_LIMIT / max(cfg.schedule.eta)
        limiter = min(limits, key=lambda name: limits[name])
        dt, n_steps = uniform_steps(cfg.schedule.T_final, limits[limiter])
        if dt < cfg.dt * (1.0 - 1e-12):
            log.info(f"time step reduced from {cfg.dt:.6g} to {dt:.17g} (limited by {limiter})")
        return dt, n_steps

    @staticmethod
    def build_envelope(cfg: ExperimentConfig, u0: SpectralField) -> BoundsEnvelope:
        bounds = cfg.bounds
        envelope = bounds_from_initial(u0, cfg.schedule.alpha0, cfg.schedule.alpha1, bounds.c_gn, bounds.margin)
        overrides = {
            name: value
            for name, value in (("M_A", bounds.M_A), ("M_B", bounds.M_B), ("M_C", bounds.M_C))
            if value is not None
        }
        return envelope.model_copy(update=overrides) if overrides else envelope

    @staticmethod
    def observer_start(cfg: ExperimentConfig, u0: SpectralField) -> SpectralField:
        if cfg.observer.w0 is ObserverStart.TRUTH:
            return u0
        return SpectralField.zeros(cfg.grid)

    # --- Проход 1: истина ---
    @staticmethod
    def prepare(cfg: ExperimentConfig) -> PreparedRun:
        """
        Поток наблюдений и нормы истины: из дампа truth.dump_dir или
        интегрированием истины на [0, T].
        """
        N_obs = cfg.schedule.max_cutoff()
        if cfg.truth_dump_dir is not None:
            directory = Path(cfg.truth_dump_dir)
            stream, index = SnapshotService.stream_from_dump(directory, cfg.grid, N_obs)
            u0 = SnapshotService.read_field(directory / str(index["filename"].iloc[0]), cfg.grid)
            dt, n_steps = stream.dt, len(stream) - 1
            truth_norms = [
                (float(row.time), TruthNorms(
                    norm_u=float(row.norm_u),
                    norm_grad=float(row.norm_grad_u),
                    norm_A=float(row.norm_A_u),
                    norm_ut=float(row.norm_u_t),
                ))
                for row in index.itertuples(index=False)
            ]
        else:
            u0 = ExperimentManager.initial_field(cfg)
            dt, n_steps = ExperimentManager.effective_dt(cfg, u0)
            stream = ObservationStream(cfg.grid, N_obs, dt)
            truth_norms = []
            for _, t, u, u_t in iterate_truth(u0, dt, n_steps, cfg.physics):
                stream.append(t, u, u_t)
                truth_norms.append((t, TruthNorms.of(u, u_t)))

        if cfg.observer.derivatives is DerivativeSource.MEASURED:
            stream = stream.with_measured_derivatives()

        log.info(f"truth pass done: {len(stream)} nodes, dt={dt:.6g}, N_obs={N_obs}, {stream.mode_count} observed modes")
        return PreparedRun(
            u0=u0,
            w0=ExperimentManager.observer_start(cfg, u0),
            dt=dt,
            n_steps=n_steps,
            envelope=ExperimentManager.build_envelope(cfg, u0),
            physics=observer_physics(cfg.grid, cfg.physics),
            stream=stream,
            truth_norms=truth_norms,
        )

    @staticmethod
    def truth_replay(cfg: ExperimentConfig, prepared: PreparedRun) -> Iterator[Tuple[int, float, SpectralField, SpectralField]]:
        """Повторный проход по истине: (i, t, u, u_t) в узлах потока."""
        if cfg.truth_dump_dir is not None:
            for i, (t, u, u_t) in enumerate(SnapshotService.iter_dump(Path(cfg.truth_dump_dir), cfg.grid)):
                yield i, t, u, u_t
        else:
            yield from iterate_truth(prepared.u0, prepared.dt, prepared.n_steps, cfg.physics)

    @staticmethod
    def truth_audit(cfg: ExperimentConfig, prepared: PreparedRun) -> EnvelopeAudit:
        physics = prepared.physics
        return verify_envelopes(
            prepared.truth_norms,
            prepared.envelope,
            physics.f_sup,
            physics.nu,
            cfg.grid.lambda1,
            cfg.physics.alpha_sq,
            strict=cfg.schedule.strict,
        )

    # --- Команды ---
    @staticmethod
    def run_truth(cfg: ExperimentConfig) -> ExperimentOutcome:
        """Интегрирует истину и пишет дамп в truth.dump_dir (или output.dir/truth)."""
        started = time.perf_counter()
        directory = Path(cfg.truth_dump_dir) if cfg.truth_dump_dir is not None else Path(cfg.output_dir) / "truth"
        u0 = ExperimentManager.initial_field(cfg)
        dt, n_steps = ExperimentManager.effective_dt(cfg, u0)
        nodes = ((t, u, u_t) for _, t, u, u_t in iterate_truth(u0, dt, n_steps, cfg.physics))
        index = SnapshotService.dump_trajectory(directory, nodes)

        envelope = ExperimentManager.build_envelope(cfg, u0)
        physics = observer_physics(cfg.grid, cfg.physics)
        samples = [
            (float(row.time), TruthNorms(float(row.norm_u), float(row.norm_grad_u), float(row.norm_A_u), float(row.norm_u_t)))
            for row in index.itertuples(index=False)
        ]
        audit = verify_envelopes(
            samples, envelope, physics.f_sup, physics.nu, cfg.grid.lambda1, cfg.physics.alpha_sq,
            strict=cfg.schedule.strict,
        )
        report = RunReport(
            command=Commands.TRUTH,
            status="Completed",
            exit_code=ExitCodes.OK,
            dt=dt,
            alpha_sq_true=cfg.physics.alpha_sq,
            envelope_checks=dict(audit.checks),
            envelope_violations=dict(audit.violations),
            wall_time=time.perf_counter() - started,
            notes=[f"truth dumped to {directory}"],
        )
        return ExperimentOutcome(report=report)

    @staticmethod
    def run_twin_experiment(cfg: ExperimentConfig) -> ExperimentOutcome:
        """
        Полный эксперимент-двойник: истина, восстановление, повтор истины,
        подгонки и проверки оценок.

        Raises:
            RecoveryError: Сбой интегратора внутри восстановления
            IntegrationError: Сбой интегратора истины
        """
        started = time.perf_counter()
        prepared = ExperimentManager.prepare(cfg)
        audit = ExperimentManager.truth_audit(cfg, prepared)

        result = recovery_loop(
            prepared.stream,
            cfg.schedule,
            cfg.grid,
            prepared.physics,
            prepared.envelope,
            prepared.w0,
            policy=cfg.observer.stage_observation,
            sample_every=cfg.sample_every,
        )
        audit.add_counts("observer_M4", result.m4_checks, result.m4_violations)

        records, sync = ExperimentManager._twin_replay(cfg, prepared, result, audit)
        alpha_sq = cfg.physics.alpha_sq
        updated = [r for r in records if r.updated]

        contraction = g_ratio = sync_rate = None
        if len(updated) >= MIN_FIT_POINTS:
            errors = [abs(b - alpha_sq) for b in result.beta_sq_series()]
            contraction = _fit_ratio(errors)
            combos = [r.g_norm_combo for r in updated if r.g_norm_combo is not None]
            g_ratio = _fit_ratio(combos)
        if records:
            first = sync[sync["n"] == 1]
            sync_rate = fit_log_rate(
                first["t"].to_numpy(), first["lyapunov"].to_numpy(),
                skip=cfg.schedule.settle_for(records[0].eta_n),
            )

        notes: List[str] = []
        if result.status is IterationStatus.HALTED_DEGENERATE:
            notes.append(DEGENERATE_EXPLANATION)
        if audit.total_violations:
            notes.append(f"{audit.total_violations} envelope violations")

        report = RunReport(
            command=Commands.RECOVER,
            status=result.status.value,
            exit_code=EXIT_CODES[result.status],
            dt=prepared.dt,
            iterations=records,
            beta_sq_final=result.beta_sq_final,
            alpha_sq_true=alpha_sq,
            fitted_contraction_ratio=contraction,
            fitted_g_ratio=g_ratio,
            fitted_sync_rate=sync_rate,
            envelope_checks=dict(audit.checks),
            envelope_violations=dict(audit.violations),
            wall_time=time.perf_counter() - started,
            notes=notes,
        )
        log.success(
            f"📊 twin experiment: {len(updated)} updates, beta^2={result.beta_sq_final:.10g} "
            f"(alpha^2={alpha_sq:.10g}), contraction={contraction}, status={result.status.value}"
        )
        return ExperimentOutcome(report=report, result=result, sync=sync)

    @staticmethod
    def _twin_replay(
        cfg: ExperimentConfig,
        prepared: PreparedRun,
        result: RecoveryResult,
        audit: EnvelopeAudit,
    ) -> Tuple[List[IterationRecord], pd.DataFrame]:
        """
        Проход 3: сравнение снимков наблюдателя с истиной в тех же узлах.

        Оценка синхронизации проверяется на итерациях с выполненными 4.4 и 4.5,
        оценки после n итераций - пока все отчеты условий выполнены.
        """
        stream = prepared.stream
        alpha_sq = cfg.physics.alpha_sq
        nu = cfg.physics.nu
        lambda1 = cfg.grid.lambda1
        records = {r.n: r for r in result.records}

        by_index: Dict[int, List[ObserverSnapshot]] = defaultdict(list)
        for snap in result.snapshots:
            by_index[int(round((snap.t - stream.t0) / stream.dt))].append(snap)

        start_sq: Dict[int, float] = {}
        g_combo: Dict[int, float] = {}
        sup_product: Dict[int, float] = defaultdict(float)
        rows = []

        for i, t, u, _ in ExperimentManager.truth_replay(cfg, prepared):
            snaps = by_index.get(i)
            if not snaps:
                continue
            grad_u = math.sqrt(sobolev_norm_sq(u, 1))
            truth_energy = sobolev_norm_sq(u, 0) + alpha_sq * grad_u ** 2
            for snap in snaps:
                g_sq, beta_grad_sq = sync_error(snap.w, u, snap.beta_sq)
                lyapunov = g_sq + beta_grad_sq
                rows.append((snap.n, t, g_sq, beta_grad_sq, lyapunov))

                record = records.get(snap.n)
                if record is None:
                    continue
                if snap.at_start:
                    start_sq[snap.n] = lyapunov
                    g_combo[snap.n] = math.sqrt(g_sq) + math.sqrt(beta_grad_sq)
                if t >= record.t_hat_n - _TIME_TOL:
                    grad_g = math.sqrt(beta_grad_sq / snap.beta_sq)
                    product = (math.sqrt(sobolev_norm_sq(snap.w, 1)) + grad_u) * grad_g
                    sup_product[snap.n] = max(sup_product[snap.n], product)

                diag = result.diagnostics.get(snap.n)
                if diag is None or snap.n not in start_sq or not _sync_hypotheses(record.condition_report):
                    continue
                bound = sync_error_bound(
                    start_sq[snap.n], t, record.t_n, record.eta_n, record.beta_n_sq, alpha_sq,
                    diag.M2_tn, diag.M3_tn, nu, prepared.envelope.alpha0,
                )
                audit.record("sync_error", lyapunov, bound, atol=SYNC_FLOOR * truth_energy)

        final: List[IterationRecord] = []
        hypotheses_hold = True
        g1 = g_combo.get(1)
        for record in result.records:
            error = abs(record.beta_np1_sq - alpha_sq)
            if record.updated:
                diag = result.diagnostics[record.n]
                audit.record(
                    "update_bound",
                    error,
                    update_error_bound(diag.c_gn, lambda1, diag.delta_tilde, record.N_n, sup_product[record.n]),
                )
                hypotheses_hold = hypotheses_hold and record.condition_report.all_passed
                if hypotheses_hold and g1 is not None:
                    by_epsilon, beta_bound, g_bound = theorem_envelopes(
                        record.n, g1, cfg.schedule.beta1_sq, alpha_sq, nu, lambda1, cfg.schedule.epsilon,
                    )
                    audit.record("gap_epsilon", error, by_epsilon)
                    audit.record("beta_envelope", error, beta_bound)
                    if record.n + 1 in g_combo:
                        audit.record("g_envelope", g_combo[record.n + 1], g_bound)
            final.append(replace(record, g_norm_combo=g_combo.get(record.n), abs_beta_sq_err=error))

        return final, pd.DataFrame(rows, columns=SYNC_COLUMNS)

    @staticmethod
    def pair_report(
        cfg: ExperimentConfig,
        prepared: PreparedRun,
        eta: float,
        N: int,
    ) -> Optional[ConditionReport]:
        """Отчет условий первой итерации для заданной пары (eta, N); None, если окно не помещается."""
        stream = prepared.stream
        window = locate_window(stream, cfg.schedule, 1, 0, eta, prepared.physics.nu, N)
        if window is None or window.degenerate:
            return None
        times = (stream.time_at(window.i_n), stream.time_at(window.i_hat), stream.time_at(window.i_np1))
        ctx = condition_context(
            1, eta, N, window.N_tilde, times, window.zeta, cfg.schedule.beta1_sq, _norms(prepared.w0),
            prepared.envelope, cfg.schedule, prepared.physics, cfg.grid.lambda1,
        )
        return check_conditions(ctx)

    @staticmethod
    def run_assimilation(cfg: ExperimentConfig) -> ExperimentOutcome:
        """
        Наблюдатель с фиксированными beta^2 = beta1_sq, eta_1 и N_1 на всем [0, T]
        в паре с повтором истины.
        """
        started = time.perf_counter()
        prepared = ExperimentManager.prepare(cfg)
        audit = ExperimentManager.truth_audit(cfg, prepared)
        schedule = cfg.schedule
        stream, physics, envelope = prepared.stream, prepared.physics, prepared.envelope
        beta_sq, eta, N = schedule.beta1_sq, schedule.eta_at(1), schedule.N_at(1)
        alpha_sq = cfg.physics.alpha_sq
        lambda1 = cfg.grid.lambda1
        strict = schedule.strict

        report = ExperimentManager.pair_report(cfg, prepared, eta, N)
        check_sync = report is not None and _sync_hypotheses(report)
        t0 = stream.t0
        M1_0 = eval_M1(t0, envelope, physics.f_sup, physics.nu, lambda1)
        M2_0 = eval_M2(t0, envelope, physics.f_sup, physics.nu, lambda1, strict)
        M3_0 = eval_M3(t0, envelope, physics.f_sup, physics.nu, lambda1, strict)
        w_norms = _norms(prepared.w0)

        i_end = min(len(stream) - 1, int(math.floor((schedule.T_final - t0) / stream.dt + _TIME_TOL)))
        state = NudgedState(w=prepared.w0, beta_sq=beta_sq, eta=eta, N_obs=N)
        nudged = iterate_nudged(state, stream, physics, 0, i_end, cfg.observer.stage_observation)
        rows = []
        start_sq = 0.0
        for node, (i, t, u, _) in zip(nudged, ExperimentManager.truth_replay(cfg, prepared)):
            w = node.state.w
            g_sq, beta_grad_sq = sync_error(w, u, beta_sq)
            lyapunov = g_sq + beta_grad_sq
            rows.append((1, t, g_sq, beta_grad_sq, lyapunov))
            if i == 0:
                start_sq = lyapunov

            m4 = eval_M4(t, eta, beta_sq, w_norms, physics.f_sup, M1_0, t_n=t0, alpha0=envelope.alpha0)
            audit.record("observer_M4", sobolev_norm_sq(w, 0) + beta_sq * sobolev_norm_sq(w, 1), m4 ** 2)
            if check_sync:
                truth_energy = sobolev_norm_sq(u, 0) + alpha_sq * sobolev_norm_sq(u, 1)
                bound = sync_error_bound(
                    start_sq, t, t0, eta, beta_sq, alpha_sq, M2_0, M3_0, physics.nu, envelope.alpha0,
                )
                audit.record("sync_error", lyapunov, bound, atol=SYNC_FLOOR * truth_energy)

        sync = pd.DataFrame(rows, columns=SYNC_COLUMNS)
        sync_rate = fit_log_rate(sync["t"].to_numpy(), sync["lyapunov"].to_numpy(), skip=schedule.settle_for(eta))

        notes = [f"fixed beta^2={beta_sq:.17g}, eta={eta:.6g}, N={N}"]
        if not check_sync:
            notes.append("synchronization bound not checked: conditions 4.4/4.5 fail for this (eta, N)")
        if audit.total_violations:
            notes.append(f"{audit.total_violations} envelope violations")

        log.success(
            f"📊 assimilation: final ||g||^2+beta^2||grad g||^2={rows[-1][4]:.3e}, fitted rate={sync_rate}"
        )
        run_report = RunReport(
            command=Commands.ASSIMILATE,
            status="Completed",
            exit_code=ExitCodes.OK,
            dt=prepared.dt,
            alpha_sq_true=alpha_sq,
            beta_sq_final=beta_sq,
            fitted_sync_rate=sync_rate,
            envelope_checks=dict(audit.checks),
            envelope_violations=dict(audit.violations),
            wall_time=time.perf_counter() - started,
            notes=notes,
        )
        return ExperimentOutcome(report=run_report, sync=sync)

    @staticmethod
    def first_iteration_conditions(cfg: ExperimentConfig) -> ExperimentOutcome:
        """
        Выбор (eta_1, N_1) и отчет условий первой итерации так, как его
        получит цикл восстановления.
        """
        started = time.perf_counter()
        prepared = ExperimentManager.prepare(cfg)
        selection = select_parameters(
            1, cfg.schedule, prepared.envelope, prepared.stream, prepared.physics,
            0, cfg.schedule.beta1_sq, _norms(prepared.w0),
        )

        notes: List[str] = []
        if selection is None:
            status, exit_code = IterationStatus.HALTED_FINAL_TIME, ExitCodes.OK
            notes.append("no full window fits before T_final")
        elif selection.window.degenerate:
            status, exit_code = IterationStatus.HALTED_DEGENERATE, ExitCodes.DEGENERATE
            notes.append(DEGENERATE_EXPLANATION)
        elif not selection.feasible:
            status, exit_code = IterationStatus.HALTED_INFEASIBLE, ExitCodes.INFEASIBLE
            notes.append(f"failing conditions: {', '.join(selection.report.failed())}")
        else:
            status, exit_code = IterationStatus.UPDATED, ExitCodes.OK
            if not selection.report.all_passed:
                notes.append(f"failing conditions: {', '.join(selection.report.failed())}")

        report = RunReport(
            command=Commands.CHECK_CONDITIONS,
            status=status.value,
            exit_code=exit_code,
            dt=prepared.dt,
            beta_sq_final=cfg.schedule.beta1_sq,
            wall_time=time.perf_counter() - started,
            notes=notes,
        )
        return ExperimentOutcome(report=report, selection=selection)


__all__ = [
    'SYNC_COLUMNS',
    'EXIT_CODES',
    'PreparedRun',
    'ExperimentOutcome',
    'ExperimentManager',
]
