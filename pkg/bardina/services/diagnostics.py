"""
Проверка априорных оценок на сохраненных нормах.

Каждая проверка считает число сравнений и нарушений lhs <= rhs с
относительным допуском; исключений не бросает.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

from bardina.models.envelope import BoundsEnvelope
from bardina.services.bardina import TruthNorms, eval_M1, eval_M2, eval_M3

ENVELOPE_NAMES = (
    "energy_M1",
    "enstrophy_M2",
    "time_derivative_M3",
    "observer_M4",
    "sync_error",
    "update_bound",
    "gap_epsilon",
    "beta_envelope",
    "g_envelope",
)

_RTOL = 1e-9


@dataclass
class EnvelopeAudit:
    checks: Dict[str, int] = field(default_factory=lambda: {name: 0 for name in ENVELOPE_NAMES})
    violations: Dict[str, int] = field(default_factory=lambda: {name: 0 for name in ENVELOPE_NAMES})

    def record(self, name: str, lhs: float, rhs: float, rtol: float = _RTOL, atol: float = 0.0) -> bool:
        """Учитывает одно сравнение; True, если оценка выполнена."""
        ok = lhs <= rhs * (1.0 + rtol) + atol
        self.checks[name] = self.checks.get(name, 0) + 1
        if not ok:
            self.violations[name] = self.violations.get(name, 0) + 1
        return ok

    def add_counts(self, name: str, checks: int, violations: int) -> None:
        self.checks[name] = self.checks.get(name, 0) + checks
        self.violations[name] = self.violations.get(name, 0) + violations

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())


def verify_envelopes(
    samples: Iterable[Tuple[float, TruthNorms]],
    envelope: BoundsEnvelope,
    f_sup: float,
    nu: float,
    lambda1: float,
    alpha_sq: float,
    strict: bool = False,
    audit: Optional[EnvelopeAudit] = None,
) -> EnvelopeAudit:
    """
    Оценки истины в каждом сохраненном узле:

        ||u||^2 + alpha^2 ||grad u||^2 <= M1^2(t),
        ||grad u||^2 + alpha^2 ||A u||^2 <= M2^2(t),
        ||u_t|| <= M3(t), включая t = 0.
    """
    audit = audit or EnvelopeAudit()
    for t, norms in samples:
        m1 = eval_M1(t, envelope, f_sup, nu, lambda1)
        m2 = eval_M2(t, envelope, f_sup, nu, lambda1, strict)
        audit.record("energy_M1", norms.norm_u ** 2 + alpha_sq * norms.norm_grad ** 2, m1 ** 2)
        audit.record("enstrophy_M2", norms.norm_grad ** 2 + alpha_sq * norms.norm_A ** 2, m2 ** 2)
        audit.record("time_derivative_M3", norms.norm_ut, eval_M3(t, envelope, f_sup, nu, lambda1, strict))
    return audit


def sync_error_bound(
    start_sq: float,
    t: float,
    t_n: float,
    eta: float,
    beta_sq: float,
    alpha_sq: float,
    M2_tn: float,
    M3_tn: float,
    nu: float,
    alpha0: float,
) -> float:
    """
    Правая часть оценки ||g||^2 + beta^2 ||grad g||^2 на [t_n, t_{n+1}]:

        e^{-eta (t - t_n)/2} start + 4 (M3^2/nu + nu M2^2/alpha0^2) |beta^2 - alpha^2|^2 / (eta beta^2).
    """
    forcing = 4.0 * (M3_tn ** 2 / nu + nu * M2_tn ** 2 / alpha0 ** 2)
    return math.exp(-eta * (t - t_n) / 2.0) * start_sq + forcing * (beta_sq - alpha_sq) ** 2 / (eta * beta_sq)


def update_error_bound(c_gn: float, lambda1: float, delta_tilde: float, N: int, sup_product: float) -> float:
    """4 c^2 l1^{-1/4} / (delta~^{1/2} N^{1/2}) * sup (||grad w|| + ||grad u||) ||grad g||."""
    if delta_tilde <= 0.0:
        return math.inf
    return 4.0 * c_gn ** 2 * lambda1 ** -0.25 / math.sqrt(delta_tilde * N) * sup_product


def theorem_envelopes(
    n: int,
    g1_combo: float,
    beta1_sq: float,
    alpha_sq: float,
    nu: float,
    lambda1: float,
    epsilon: float,
) -> Tuple[float, float, float]:
    """
    Границы после n итераций для (|beta_{n+1}^2 - alpha^2| через epsilon,
    |beta_{n+1}^2 - alpha^2|, ||g_{n+1}|| + beta_{n+1} ||grad g_{n+1}||).
    """
    gap = abs(beta1_sq - alpha_sq)
    halving = 2.0 ** n
    by_epsilon = epsilon / 2.0 + epsilon / 4.0 ** n
    beta_bound = (g1_combo / (nu * lambda1 ** 0.75) + gap) / halving
    g_bound = (g1_combo + nu * lambda1 ** 0.75 * gap) / halving
    return by_epsilon, beta_bound, g_bound


__all__ = [
    'ENVELOPE_NAMES',
    'EnvelopeAudit',
    'verify_envelopes',
    'sync_error_bound',
    'update_error_bound',
    'theorem_envelopes',
]
