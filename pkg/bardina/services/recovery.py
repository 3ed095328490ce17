"""
Рекурсивное восстановление alpha по потоку наблюдений.

Итерация n: выбрать окно [t^_n, t_{n+1}] и N~_n с положительной zeta_n,
подобрать (eta_n, N_n), проинтегрировать наблюдателя на [t_n, t_{n+1}] с
beta_n, затем обновить

    beta_{n+1}^2 = beta_n^2 + (1/delta_n) * int_{t^_n}^{t_{n+1}} I(s) ds,

где I(s) - сумма семи скалярных произведений с h = P_N(u_t + nu A u).
Сторона восстановления видит только ObservationStream, ObserverPhysics,
BoundsEnvelope и расписание; alpha сюда не передается.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from bardina.core.errors import DegenerateWindowError, FieldError, IntegrationError, RecoveryError
from bardina.models.envelope import BoundsEnvelope
from bardina.models.field import SpectralField
from bardina.models.grid import GridSpec
from bardina.models.observation import NudgedState, ObservationStream, StageObservation
from bardina.models.physics import ObserverPhysics
from bardina.models.records import (
    ConditionReport,
    IterationRecord,
    IterationStatus,
    ObserverSnapshot,
    RecoveryResult,
    WindowDiagnostics,
)
from bardina.models.schedule import RecoverySchedule
from bardina.rules.theorem_rules import ConditionContext, evaluate_rules
from bardina.services.bardina import eval_M1, eval_M2, eval_M3, resolve_c_gn
from bardina.services.nudging import ETA_DT_LIMIT, iterate_nudged
from bardina.services.spectral import apply_A, bilinear_B, inner_product, low_mode_project, sobolev_norm_sq
from bardina.utils.constants import Sections
from bardina.utils.logger import AlignedLogger

log = AlignedLogger.section(Sections.RECOVERY)

DEGENERACY_RTOL = 1e-12
_STEP_TOL = 1e-9


# === Оконные интегралы ===

def _node_count(duration: float, dt: float) -> int:
    return int(math.ceil(duration / dt - _STEP_TOL))


def _grad_series(stream: ObservationStream, N: int, nu: float, i_a: int, i_b: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    ||grad P_N(u_t + nu A u)||^2 и ||grad P_N u_t||^2 + ||grad P_N nu A u||^2 в узлах i_a..i_b.

    Сумма по эрмитовой половине удваивается.
    """
    mask = stream.half_mask(N)
    lam = stream.half_lambda()[mask]
    scale = 2.0 * stream.grid.volume
    combined = np.empty(i_b - i_a + 1)
    parts = np.empty(i_b - i_a + 1)
    for j, i in enumerate(range(i_a, i_b + 1)):
        u, ut = stream.half_arrays(i)
        ut_n = ut[:, mask]
        au_n = nu * lam * u[:, mask]
        r = ut_n + au_n
        combined[j] = scale * np.sum(lam * (r.real ** 2 + r.imag ** 2))
        parts[j] = scale * np.sum(lam * (np.abs(ut_n) ** 2 + np.abs(au_n) ** 2))
    return combined, parts


def delta_n(stream: ObservationStream, N: int, t_hat: float, t_next: float, *, nu: float) -> float:
    """
    delta_n = int_{t^}^{t_next} ||grad P_N(u_t + nu A u)||^2 ds (составная формула трапеций).

    Raises:
        ObservationWindowError: Окно вне потока
    """
    i_a, i_b = stream.window(t_hat, t_next)
    values, _ = _grad_series(stream, N, nu, i_a, i_b)
    return max(float(np.trapezoid(values, dx=stream.dt)), 0.0)


def zeta_n(stream: ObservationStream, N_tilde: int, t_hat: float, t_next: float, *, nu: float) -> float:
    """Среднее по окну ||grad P_N~(u_t + nu A u)||^2."""
    return delta_n(stream, N_tilde, t_hat, t_next, nu=nu) / (t_next - t_hat)


def degeneracy_threshold(stream: ObservationStream, N: int, t_hat: float, t_next: float, *, nu: float) -> float:
    """
    Порог 1e-12 * (t_next - t^) * max(1, s), s - среднее по окну
    ||grad P_N u_t||^2 + ||grad P_N nu A u||^2.
    """
    i_a, i_b = stream.window(t_hat, t_next)
    _, parts = _grad_series(stream, N, nu, i_a, i_b)
    length = t_next - t_hat
    scale = float(np.trapezoid(parts, dx=stream.dt)) / length
    return DEGENERACY_RTOL * length * max(1.0, scale)


# === Обновление beta ===

@dataclass(frozen=True)
class WindowNode:
    """Узел окна: время, наблюдатель w, w_t и наблюдения P_N u, P_N u_t."""
    t: float
    w: SpectralField
    w_t: SpectralField
    obs_u: SpectralField
    obs_ut: SpectralField


def update_integrand(node: WindowNode, beta_sq: float, eta: float, N: int, nu: float) -> float:
    """Подынтегральное выражение формулы обновления в одном узле."""
    h = low_mode_project(node.obs_ut + apply_A(node.obs_u) * nu, N)
    a = low_mode_project(node.w, N) - low_mode_project(node.obs_u, N)
    a_dot = low_mode_project(node.w_t, N) - low_mode_project(node.obs_ut, N)

    # P_N B(w, w) - P_N B(w - a, w - a) = P_N [B(w, a) + B(a, w) - B(a, a)]
    nonlinear = bilinear_B(node.w, a) + bilinear_B(a, node.w) - bilinear_B(a, a)

    a_h_0 = inner_product(a, h, 0)
    a_h_1 = inner_product(a, h, 1)
    return (
        inner_product(a_dot, h, 0)
        + beta_sq * inner_product(a_dot, h, 1)
        + nu * a_h_1
        + nu * beta_sq * inner_product(apply_A(a), h, 1)
        + inner_product(low_mode_project(nonlinear, N), h, 0)
        + eta * a_h_0
        + beta_sq * eta * a_h_1
    )


def update_beta(
    beta_n_sq: float,
    run: Iterable[WindowNode],
    eta: float,
    N: int,
    nu: float,
    delta: float,
    threshold: float = 0.0,
) -> float:
    """
    beta_{n+1}^2 из прогона наблюдателя на [t^_n, t_{n+1}].

    Args:
        beta_n_sq: Текущая оценка beta_n^2
        run: Узлы окна на равномерной сетке по времени
        eta, N: Параметры итерации
        nu: Вязкость
        delta: delta_n того же окна
        threshold: Порог вырожденности delta_n

    Raises:
        DegenerateWindowError: delta <= threshold
        FieldError: Узлы окна не на равномерной сетке
    """
    if not delta > threshold or delta <= 0.0:
        raise DegenerateWindowError(f"delta_n={delta:.3e} is below the degeneracy threshold {threshold:.3e}")

    times: List[float] = []
    values: List[float] = []
    for node in run:
        times.append(node.t)
        values.append(update_integrand(node, beta_n_sq, eta, N, nu))

    if len(times) < 2:
        raise FieldError("update window needs at least two nodes")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0) or steps[0] <= 0.0:
        raise FieldError("update window nodes are not on a uniform increasing time grid")

    integral = float(np.trapezoid(np.asarray(values), dx=float(steps[0])))
    return beta_n_sq + integral / delta


# === Оценка M4 и условия ===

def eval_M4(
    t: float,
    eta: float,
    beta_sq: float,
    w_prev_norms: Tuple[float, float],
    f_sup: float,
    M1_at_tn: float,
    *,
    t_n: float,
    alpha0: float,
) -> float:
    """
    M4(t, eta_n) для t >= t_n:

        M4^2 = e^{-eta (t - t_n)/2} (||w||^2 + beta^2 ||grad w||^2)
               + 4 sup||f||^2 / eta^2 + 2 (2 + beta^2/alpha0^2) M1^2(t_n),

    где (||w||^2, ||grad w||^2) - нормы w_{n-1}(t_n).
    """
    w_sq, w_grad_sq = w_prev_norms
    decay = math.exp(-eta * (t - t_n) / 2.0)
    m4_sq = (
        decay * (w_sq + beta_sq * w_grad_sq)
        + 4.0 * f_sup ** 2 / eta ** 2
        + 2.0 * (2.0 + beta_sq / alpha0 ** 2) * M1_at_tn ** 2
    )
    return math.sqrt(m4_sq)


def condition_context(
    n: int,
    eta: float,
    N: int,
    N_tilde: int,
    times: Tuple[float, float, float],
    zeta: float,
    beta_sq: float,
    w_prev_norms: Tuple[float, float],
    envelope: BoundsEnvelope,
    schedule: RecoverySchedule,
    physics: ObserverPhysics,
    lambda1: float,
) -> ConditionContext:
    """Собирает ConditionContext, вычисляя M1..M4 в t_n и t^_n."""
    t_n, t_hat, t_np1 = times
    strict = schedule.strict
    nu, f_sup = physics.nu, physics.f_sup
    M1_tn = eval_M1(t_n, envelope, f_sup, nu, lambda1)

    def m4(t: float) -> float:
        return eval_M4(t, eta, beta_sq, w_prev_norms, f_sup, M1_tn, t_n=t_n, alpha0=envelope.alpha0)

    return ConditionContext(
        n=n,
        eta=eta,
        N=N,
        N_tilde=N_tilde,
        t_n=t_n,
        t_hat=t_hat,
        t_np1=t_np1,
        zeta=zeta,
        beta_sq=beta_sq,
        epsilon=schedule.epsilon,
        alpha0=envelope.alpha0,
        alpha1=envelope.alpha1,
        nu=nu,
        lambda1=lambda1,
        c_gn=resolve_c_gn(envelope, strict),
        M1_tn=M1_tn,
        M2_tn=eval_M2(t_n, envelope, f_sup, nu, lambda1, strict),
        M3_tn=eval_M3(t_n, envelope, f_sup, nu, lambda1, strict),
        M1_hat=eval_M1(t_hat, envelope, f_sup, nu, lambda1),
        M4_hat=m4(t_hat),
        M4_tn=m4(t_n),
    )


def check_conditions(ctx: ConditionContext) -> ConditionReport:
    """Все восемь условий; только отчет, без исключений."""
    return evaluate_rules(ctx)


# === Выбор окна и параметров ===

@dataclass(frozen=True)
class WindowChoice:
    """Окно итерации в индексах потока."""
    i_n: int
    i_hat: int
    i_np1: int
    N_tilde: int
    zeta: float
    degenerate: bool = False
    extended: bool = False


def _last_index(stream: ObservationStream, schedule: RecoverySchedule) -> int:
    i_T = int(math.floor((schedule.T_final - stream.t0) / stream.dt + _STEP_TOL))
    return min(len(stream) - 1, i_T)


def locate_window(
    stream: ObservationStream,
    schedule: RecoverySchedule,
    n: int,
    i_n: int,
    eta: float,
    nu: float,
    N_cap: int,
) -> Optional[WindowChoice]:
    """
    Окно с t^_n - t_n = settle и t_{n+1} - t^_n = window, на котором zeta_n
    невырождена. При вырождении N~ повышается до N_cap, затем окно один раз
    продлевается до конца потока.

    Returns:
        None, если окно не помещается до T; WindowChoice(degenerate=True),
        если подходящего окна нет
    """
    dt = stream.dt
    i_last = _last_index(stream, schedule)
    i_hat = i_n + _node_count(schedule.settle_for(eta), dt)
    i_np1 = i_hat + max(1, _node_count(schedule.window, dt))
    if i_np1 > i_last:
        return None

    N_first = schedule.N_tilde_at(n)
    candidates = [i_np1] if i_np1 == i_last else [i_np1, i_last]
    t_hat = stream.time_at(i_hat)
    for attempt, i_end in enumerate(candidates):
        t_end = stream.time_at(i_end)
        for N_tilde in range(N_first, max(N_first, N_cap) + 1):
            zeta = zeta_n(stream, N_tilde, t_hat, t_end, nu=nu)
            threshold = degeneracy_threshold(stream, N_tilde, t_hat, t_end, nu=nu)
            if zeta * (t_end - t_hat) > threshold:
                if N_tilde != N_first or attempt:
                    log.debug(f"iteration {n}: window adjusted to N_tilde={N_tilde}, t_np1={t_end:.6g}")
                return WindowChoice(i_n, i_hat, i_end, N_tilde, zeta, extended=bool(attempt))

    zeta = zeta_n(stream, N_first, t_hat, stream.time_at(i_np1), nu=nu)
    return WindowChoice(i_n, i_hat, i_np1, N_first, zeta, degenerate=True)


@dataclass(frozen=True)
class Selection:
    """Итог select_parameters: (eta_n, N_n), окно и отчет условий."""
    eta: float
    N: int
    window: WindowChoice
    report: ConditionReport
    feasible: bool = True


def _window_times(stream: ObservationStream, window: WindowChoice) -> Tuple[float, float, float]:
    return stream.time_at(window.i_n), stream.time_at(window.i_hat), stream.time_at(window.i_np1)


def select_parameters(
    n: int,
    schedule: RecoverySchedule,
    envelope: BoundsEnvelope,
    stream: ObservationStream,
    physics: ObserverPhysics,
    i_n: int,
    beta_sq: float,
    w_prev_norms: Tuple[float, float],
) -> Optional[Selection]:
    """
    practical: (eta, N) из расписания и отчет для аудита.
    strict: перебор eta по лестнице (внешний цикл) и N по удвоениям от N~
    до N_obs потока (внутренний), первая пара, прошедшая все условия.

    Returns:
        None - окно не помещается до T (конец работы);
        Selection с window.degenerate - вырожденное окно;
        Selection(feasible=False) - в строгом режиме пары нет
    """
    lambda1 = stream.grid.lambda1
    nu = physics.nu

    def report_for(eta: float, N: int, window: WindowChoice) -> ConditionReport:
        ctx = condition_context(
            n, eta, N, window.N_tilde, _window_times(stream, window), window.zeta,
            beta_sq, w_prev_norms, envelope, schedule, physics, lambda1,
        )
        return check_conditions(ctx)

    if not schedule.strict:
        eta, N = schedule.eta_at(n), schedule.N_at(n)
        if N > stream.N_obs:
            raise FieldError(f"N_n={N} exceeds the observed cutoff N_obs={stream.N_obs}")
        window = locate_window(stream, schedule, n, i_n, eta, nu, N)
        if window is None:
            return None
        return Selection(eta, N, window, report_for(eta, N, window))

    eta_cap = ETA_DT_LIMIT / stream.dt
    last: Optional[Selection] = None
    degenerate: Optional[Selection] = None
    for eta in (e for e in schedule.eta_ladder() if e <= eta_cap):
        window = locate_window(stream, schedule, n, i_n, eta, nu, stream.N_obs)
        if window is None:
            continue
        if window.degenerate:
            degenerate = Selection(eta, window.N_tilde, window, report_for(eta, window.N_tilde, window), False)
            continue
        for N in schedule.N_ladder(window.N_tilde, stream.N_obs):
            report = report_for(eta, N, window)
            if report.all_passed:
                return Selection(eta, N, window, report)
            last = Selection(eta, N, window, report, feasible=False)

    if last is not None:
        return last
    return degenerate


# === Прогон окна ===

class WindowRun:
    """
    Прогон наблюдателя на [t_n, t_{n+1}]: отдает узлы окна [t^_n, t_{n+1}]
    для update_beta и попутно сохраняет снимки и проверку M4.
    """

    def __init__(
        self,
        n: int,
        state: NudgedState,
        stream: ObservationStream,
        physics: ObserverPhysics,
        window: WindowChoice,
        m4: Callable[[float], float],
        result: RecoveryResult,
        policy: StageObservation,
        sample_every: int,
    ):
        self.n = n
        self.state = state
        self.stream = stream
        self.physics = physics
        self.window = window
        self.m4 = m4
        self.result = result
        self.policy = policy
        self.sample_every = sample_every
        self.final_state: Optional[NudgedState] = None

    def _audit(self, t: float, state: NudgedState) -> None:
        energy = sobolev_norm_sq(state.w, 0) + state.beta_sq * sobolev_norm_sq(state.w, 1)
        self.result.m4_checks += 1
        if energy > self.m4(t) ** 2 * (1.0 + 1e-9):
            self.result.m4_violations += 1

    def __iter__(self) -> Iterator[WindowNode]:
        win = self.window
        for node in iterate_nudged(self.state, self.stream, self.physics, win.i_n, win.i_np1, self.policy):
            i, t, state = node.index, node.time, node.state
            keep = i in (win.i_n, win.i_hat, win.i_np1) or i % self.sample_every == 0
            if keep:
                self.result.snapshots.append(
                    ObserverSnapshot(self.n, t, state.w, state.beta_sq, state.eta, at_start=(i == win.i_n))
                )
                self._audit(t, state)
            if i >= win.i_hat:
                yield WindowNode(t, state.w, node.w_t, node.obs_u, node.obs_ut)
            self.final_state = state


@dataclass
class _LoopState:
    n: int
    i_n: int
    w: SpectralField
    beta_sq: float
    w_prev_norms: Tuple[float, float] = field(default=(0.0, 0.0))


def _norms(w: SpectralField) -> Tuple[float, float]:
    return sobolev_norm_sq(w, 0), sobolev_norm_sq(w, 1)


def recovery_loop(
    stream: ObservationStream,
    schedule: RecoverySchedule,
    grid: GridSpec,
    physics: ObserverPhysics,
    envelope: BoundsEnvelope,
    w0: SpectralField,
    policy: StageObservation = StageObservation.PREDICTOR,
    sample_every: int = 50,
) -> RecoveryResult:
    """
    Полная рекурсия: t_1 = 0, w_1(0) = w0, beta_1^2 из расписания.

    Останов: HaltedDegenerate (нет допустимого окна), HaltedInfeasible
    (строгий режим без подходящей пары), HaltedRegimeBreach (beta^2 <= 0),
    иначе HaltedFinalTime при достижении T или max_iters.

    Raises:
        RecoveryError: Сбой интегратора с номером итерации
    """
    if stream.grid != grid or w0.grid != grid:
        raise FieldError("observation stream, observer state and recovery grid differ")
    if len(stream) < 2:
        raise FieldError("recovery needs an observation stream with at least two nodes")

    result = RecoveryResult(beta_sq_final=schedule.beta1_sq)
    loop = _LoopState(n=1, i_n=0, w=w0, beta_sq=schedule.beta1_sq)
    loop.w_prev_norms = _norms(w0)
    lambda1 = grid.lambda1

    log.info(
        f"recovery started: mode={schedule.mode.value}, beta1^2={schedule.beta1_sq:.6g}, "
        f"T={schedule.T_final:.6g}, stream of {len(stream)} nodes, N_obs={stream.N_obs}"
    )

    while loop.n <= schedule.max_iters:
        n = loop.n
        selection = select_parameters(
            n, schedule, envelope, stream, physics, loop.i_n, loop.beta_sq, loop.w_prev_norms,
        )
        if selection is None:
            log.info(f"iteration {n}: no full window fits before T, stopping")
            result.status = IterationStatus.HALTED_FINAL_TIME
            break

        win = selection.window
        t_n, t_hat, t_np1 = _window_times(stream, win)
        delta = delta_n(stream, selection.N, t_hat, t_np1, nu=physics.nu)

        def halt(status: IterationStatus) -> None:
            result.records.append(IterationRecord(
                n=n, t_n=t_n, t_hat_n=t_hat, t_np1=t_np1, eta_n=selection.eta, N_n=selection.N,
                N_tilde_n=win.N_tilde, beta_n_sq=loop.beta_sq, beta_np1_sq=loop.beta_sq,
                delta_n=delta, zeta_n=win.zeta, condition_report=selection.report, status=status,
            ))
            result.status = status

        if win.degenerate:
            log.warning(f"iteration {n}: delta_n={delta:.3e} is degenerate on [{t_hat:.6g}, {t_np1:.6g}]")
            halt(IterationStatus.HALTED_DEGENERATE)
            break
        if not selection.feasible:
            log.warning(
                f"iteration {n}: no (eta, N) satisfies all conditions, failing {selection.report.failed()}"
            )
            halt(IterationStatus.HALTED_INFEASIBLE)
            break

        threshold = degeneracy_threshold(stream, selection.N, t_hat, t_np1, nu=physics.nu)
        if delta <= threshold:
            halt(IterationStatus.HALTED_DEGENERATE)
            break

        state = NudgedState(w=loop.w, beta_sq=loop.beta_sq, eta=selection.eta, N_obs=selection.N)
        context = condition_context(
            n, selection.eta, selection.N, win.N_tilde, (t_n, t_hat, t_np1), win.zeta,
            loop.beta_sq, loop.w_prev_norms, envelope, schedule, physics, lambda1,
        )
        run = WindowRun(
            n, state, stream, physics, win,
            lambda t: eval_M4(
                t, selection.eta, loop.beta_sq, loop.w_prev_norms, physics.f_sup, context.M1_tn,
                t_n=t_n, alpha0=envelope.alpha0,
            ),
            result, policy, sample_every,
        )
        try:
            beta_next = update_beta(loop.beta_sq, run, selection.eta, selection.N, physics.nu, delta, threshold)
        except IntegrationError as e:
            raise RecoveryError(str(e), n, e) from e

        result.diagnostics[n] = WindowDiagnostics(
            n=n, M2_tn=context.M2_tn, M3_tn=context.M3_tn,
            delta_tilde=delta / (t_np1 - t_hat), c_gn=context.c_gn,
        )

        if not beta_next > 0.0:
            log.error(f"iteration {n}: updated beta^2={beta_next:.6g} is not positive")
            result.records.append(IterationRecord(
                n=n, t_n=t_n, t_hat_n=t_hat, t_np1=t_np1, eta_n=selection.eta, N_n=selection.N,
                N_tilde_n=win.N_tilde, beta_n_sq=loop.beta_sq, beta_np1_sq=beta_next,
                delta_n=delta, zeta_n=win.zeta, condition_report=selection.report,
                status=IterationStatus.HALTED_REGIME_BREACH,
            ))
            result.status = IterationStatus.HALTED_REGIME_BREACH
            break

        result.records.append(IterationRecord(
            n=n, t_n=t_n, t_hat_n=t_hat, t_np1=t_np1, eta_n=selection.eta, N_n=selection.N,
            N_tilde_n=win.N_tilde, beta_n_sq=loop.beta_sq, beta_np1_sq=beta_next,
            delta_n=delta, zeta_n=win.zeta, condition_report=selection.report,
            status=IterationStatus.UPDATED,
        ))
        log.info(
            f"iteration {n}: beta^2 {loop.beta_sq:.10g} -> {beta_next:.10g} on [{t_n:.4g}, {t_np1:.4g}], "
            f"eta={selection.eta:.4g}, N={selection.N}, conditions={selection.report.passed_string()}"
        )

        assert run.final_state is not None
        w_end = run.final_state.w
        loop = _LoopState(n=n + 1, i_n=win.i_np1, w=w_end, beta_sq=beta_next, w_prev_norms=_norms(w_end))
        result.beta_sq_final = beta_next
        result.status = IterationStatus.HALTED_FINAL_TIME

    log.info(f"recovery finished: {result.status.value}, {len(result.records)} records, beta^2={result.beta_sq_final:.10g}")
    return result


__all__ = [
    'DEGENERACY_RTOL',
    'delta_n',
    'zeta_n',
    'degeneracy_threshold',
    'WindowNode',
    'update_integrand',
    'update_beta',
    'eval_M4',
    'condition_context',
    'check_conditions',
    'WindowChoice',
    'locate_window',
    'Selection',
    'select_parameters',
    'WindowRun',
    'recovery_loop',
]
