"""
Правила для условий сходимости алгоритма восстановления.

Каждое правило вычисляет обе части одного неравенства lhs <= rhs так, как
оно записано в теореме, и никогда не бросает исключений: некорректные
входы (нулевая zeta, inf) дают невыполненное условие с margin = nan/-inf.
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Tuple

from bardina.models.records import ConditionReport, ConditionResult


@dataclass(frozen=True)
class ConditionContext:
    """
    Входы условий итерации n. Оценки M1..M4 уже вычислены вызывающей стороной.

    Attributes:
        n: Номер итерации (chi_1(n) = 1 только при n = 1)
        eta, N, N_tilde: Кандидаты eta_n, N_n и выбранное N~_n
        t_n, t_hat, t_np1: Времена окна
        zeta: zeta_n
        beta_sq: beta_n^2
        M1_tn, M2_tn, M3_tn: Оценки в t_n
        M1_hat, M4_hat: M1(t^_n) и M4(t^_n, eta_n)
        M4_tn: M4(t_n, eta_n)
    """
    n: int
    eta: float
    N: int
    N_tilde: int
    t_n: float
    t_hat: float
    t_np1: float
    zeta: float
    beta_sq: float
    epsilon: float
    alpha0: float
    alpha1: float
    nu: float
    lambda1: float
    c_gn: float
    M1_tn: float
    M2_tn: float
    M3_tn: float
    M1_hat: float
    M4_hat: float
    M4_tn: float

    @property
    def beta(self) -> float:
        return math.sqrt(self.beta_sq)

    @property
    def chi1(self) -> float:
        return 1.0 if self.n == 1 else 0.0

    def amplification(self) -> float:
        """max{1, (sqrt(eps) + alpha1) / beta_n}."""
        return max(1.0, (math.sqrt(self.epsilon) + self.alpha1) / self.beta)

    def window_bracket(self) -> float:
        """M1(t^_n)/alpha0 + M4(t^_n)/beta_n."""
        return self.M1_hat / self.alpha0 + self.M4_hat / self.beta

    def forcing_bracket(self) -> float:
        """sqrt(nu) M2(t_n)/alpha0 + M3(t_n)/sqrt(nu)."""
        return math.sqrt(self.nu) * self.M2_tn / self.alpha0 + self.M3_tn / math.sqrt(self.nu)

    def settle_decay(self) -> float:
        return math.exp(-self.eta * (self.t_hat - self.t_n) / 4.0)

    def window_factor(self) -> float:
        """(zeta_n N_n)^{1/2}; 0 при вырожденной zeta."""
        return math.sqrt(max(self.zeta, 0.0) * self.N)


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0.0:
        return math.inf if numerator > 0.0 else math.nan
    return numerator / denominator


class ConditionRule(ABC):
    code: str = ""
    title: str = ""

    @abstractmethod
    def sides(self, ctx: ConditionContext) -> Tuple[float, float]:
        """(lhs, rhs) неравенства."""

    def check(self, ctx: ConditionContext) -> ConditionResult:
        try:
            lhs, rhs = self.sides(ctx)
        except (ArithmeticError, ValueError):
            lhs, rhs = math.nan, math.nan
        return ConditionResult(code=self.code, lhs=float(lhs), rhs=float(rhs))


class CutoffOrderRule(ConditionRule):
    code = "4.3"
    title = "N_tilde <= N"

    def sides(self, ctx: ConditionContext) -> Tuple[float, float]:
        return float(ctx.N_tilde), float(ctx.N)


class GainResolutionRule(ConditionRule):
    code = "4.4"
    title = "eta/N^2 <= nu*lambda1/2"

    def sides(self, ctx: ConditionContext) -> Tuple[float, float]:
        return ctx.eta / ctx.N ** 2, ctx.nu * ctx.lambda1 / 2.0


class GainLowerBoundRule(ConditionRule):
    code = "4.5"
    title = "27 c^4 M1^4 / (8 nu^3 alpha0^4) <= eta"

    def sides(self, ctx: ConditionContext) -> Tuple[float, float]:
        lhs = 27.0 * ctx.c_gn ** 4 * ctx.M1_tn ** 4 / (8.0 * ctx.nu ** 3 * ctx.alpha0 ** 4)
        return lhs, ctx.eta


class SyncRateRule(ConditionRule):
    code = "4.6"
    title = "parameter-error forcing vs eta^{1/2}"

    def sides(self, ctx: ConditionContext) -> Tuple[float, float]:
        lhs = ctx.amplification() * ctx.forcing_bracket() * 16.0 / ctx.beta
        rhs = math.sqrt(ctx.eta) * ctx.nu * ctx.lambda1 ** 0.75
        return lhs, rhs


class UpdateContractionRule(ConditionRule):
    code = "4.7"
    title = "parameter update contraction"

    def sides(self, ctx: ConditionContext) -> Tuple[float, float]:
        prefactor = _ratio(
            8.0 * ctx.c_gn ** 2 * ctx.lambda1 ** -0.25,
            math.sqrt(ctx.eta) * ctx.beta_sq * ctx.window_factor(),
        )
        lhs = prefactor * ctx.window_bracket() * ctx.forcing_bracket()
        rhs = ctx.epsilon / (4.0 * abs(ctx.alpha1 ** 2 - ctx.alpha0 ** 2) * ctx.chi1 + 4.0 * ctx.epsilon)
        return lhs, rhs


class WindowDecayRule(ConditionRule):
    code = "4.8"
    title = "window decay <= 1/8"

    def sides(self, ctx: ConditionContext) -> Tuple[float, float]:
        lhs = ctx.amplification() * math.exp(-ctx.eta * (ctx.t_np1 - ctx.t_n) / 4.0)
        return lhs, 0.125


class SettleDecayRule(ConditionRule):
    code = "4.9"
    title = "settle decay vs 1/(4 nu lambda1^{1/2})"

    def sides(self, ctx: ConditionContext) -> Tuple[float, float]:
        prefactor = _ratio(4.0 * ctx.c_gn ** 2, ctx.window_factor() * ctx.beta)
        lhs = prefactor * ctx.window_bracket() * ctx.settle_decay()
        return lhs, 1.0 / (4.0 * ctx.nu * math.sqrt(ctx.lambda1))


class InitialErrorRule(ConditionRule):
    code = "4.10"
    title = "initial synchronization error <= eps/2"

    def sides(self, ctx: ConditionContext) -> Tuple[float, float]:
        prefactor = _ratio(8.0 * ctx.c_gn ** 2 * ctx.lambda1 ** -0.25, ctx.beta * ctx.window_factor())
        start = (1.0 + ctx.beta / ctx.alpha0) * ctx.M1_tn + ctx.M4_tn
        lhs = prefactor * ctx.window_bracket() * ctx.settle_decay() * start
        return lhs, ctx.epsilon / 2.0


THEOREM_RULES: List[ConditionRule] = [
    CutoffOrderRule(),
    GainResolutionRule(),
    GainLowerBoundRule(),
    SyncRateRule(),
    UpdateContractionRule(),
    WindowDecayRule(),
    SettleDecayRule(),
    InitialErrorRule(),
]


def evaluate_rules(ctx: ConditionContext) -> ConditionReport:
    return ConditionReport(tuple(rule.check(ctx) for rule in THEOREM_RULES))


__all__ = [
    'ConditionContext',
    'ConditionRule',
    'CutoffOrderRule',
    'GainResolutionRule',
    'GainLowerBoundRule',
    'SyncRateRule',
    'UpdateContractionRule',
    'WindowDecayRule',
    'SettleDecayRule',
    'InitialErrorRule',
    'THEOREM_RULES',
    'evaluate_rules',
]
