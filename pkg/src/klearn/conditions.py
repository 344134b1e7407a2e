"""Closed-form threshold conditions for learnability and impossibility.

Right-hand sides are evaluated in log space so that ``k`` in the thousands
does not overflow; ``rhs`` in a report is ``exp`` of that log and may be
``inf`` for extreme inputs, while ``holds`` is always decided in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameterError


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one threshold check.

    ``margin`` is signed so that ``margin >= 0`` exactly when ``holds``
    (``lhs - rhs`` for lower bounds on ``lhs``, ``rhs - lhs`` for upper bounds).
    """

    name: str
    holds: bool
    lhs: float
    rhs: float
    margin: float

    def as_dict(self) -> dict:
        return {"name": self.name, "holds": self.holds, "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin}


def _exp(x: float) -> float:
    return math.exp(x) if x < 709 else math.inf


def _even_k(k: int) -> None:
    if k < 4 or k % 2:
        raise InvalidParameterError(f"k must be an even integer >= 4, got {k}")


def learnable_condition(d: float, k: int, B: float) -> ConditionReport:
    """d <= (1 + e^-B)^(k/2) / (e^3 sqrt(k)): single-sample estimation succeeds."""
    if d < 1 or k < 3 or B < 0:
        raise InvalidParameterError("need d >= 1, k >= 3, B >= 0")
    log_rhs = (k / 2) * math.log1p(math.exp(-B)) - 3.0 - 0.5 * math.log(k)
    rhs = _exp(log_rhs)
    return ConditionReport("learnable", math.log(d) <= log_rhs, float(d), rhs, rhs - d)


def _thm12_log_rhs(k: int, beta: float) -> float:
    # 1 + e/(e^|b| - e) = 1 / (1 - e^(1-|b|))
    return 3 * math.log(k) - (k / 2) * math.log1p(-math.exp(1.0 - beta))


def impossibility_thm12(d: float, k: int, beta_star: float) -> ConditionReport:
    """d >= k^3 (1 + e/(e^|beta*| - e))^(k/2), for |beta*| > 1."""
    _even_k(k)
    beta = abs(beta_star)
    if not beta > 1:
        raise InvalidParameterError(f"|beta_star| must exceed 1, got {beta_star}")
    log_rhs = _thm12_log_rhs(k, beta)
    rhs = _exp(log_rhs)
    return ConditionReport("impossible_exponential_degree", d > 0 and math.log(d) >= log_rhs, float(d), rhs, d - rhs)


def impossibility_thm13(d: float, k: int, beta_star: float) -> ConditionReport:
    """d >= k^2/2 and |beta*| >= k ln 2.

    ``lhs``/``rhs`` describe the degree inequality; ``margin`` is the smaller
    of the two slacks, so its sign still decides ``holds``.
    """
    _even_k(k)
    degree_slack = d - k * k / 2
    beta_slack = abs(beta_star) - k * math.log(2)
    return ConditionReport(
        "impossible_quadratic_degree",
        degree_slack >= 0 and beta_slack >= 0,
        float(d),
        k * k / 2,
        min(degree_slack, beta_slack),
    )


def f_alpha(alpha: float) -> float:
    """-(a/(1-a)) ln a - ln(1-a): increasing bijection (0, 1) -> (0, inf)."""
    return -(alpha / (1.0 - alpha)) * math.log(alpha) - math.log1p(-alpha)


def alpha_condition(alpha: float, beta: float) -> bool:
    """|beta| + (a/(1-a)) ln a + ln(1-a) > 0."""
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return abs(beta) + (alpha / (1.0 - alpha)) * math.log(alpha) + math.log1p(-alpha) > 0


def alpha_of_beta(beta: float) -> float:
    """1 - e^(1 - beta), defined for beta > 1."""
    if not beta > 1:
        raise InvalidParameterError(f"beta must exceed 1, got {beta}")
    return -math.expm1(1.0 - beta)


def f_alpha_of_beta(beta: float) -> float:
    """f(alpha_of_beta(beta)) without rounding alpha first.

    The gap ``beta - f`` shrinks like e^(1-beta)/2, which the naive
    composition loses to cancellation in ``1 - alpha`` once beta is ~20.
    """
    if not beta > 1:
        raise InvalidParameterError(f"beta must exceed 1, got {beta}")
    u = 1.0 - beta  # ln(1 - alpha)
    alpha = -math.expm1(u)
    return -alpha * math.exp(-u) * math.log1p(-math.exp(u)) - u


def impossibility_thm37(d: float, k: int, alpha: float) -> ConditionReport:
    """d >= k^3 alpha^(-k/2)."""
    _even_k(k)
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    log_rhs = 3 * math.log(k) - (k / 2) * math.log(alpha)
    rhs = _exp(log_rhs)
    return ConditionReport("impossible_alpha", d > 0 and math.log(d) >= log_rhs, float(d), rhs, d - rhs)


def taylor_identity_check(x: float) -> float:
    """(1 - 1/x) ln(1 - x), which stays below 1 on (0, 1)."""
    if not 0 < x < 1:
        raise InvalidParameterError(f"x must lie in (0, 1), got {x}")
    return (1.0 - 1.0 / x) * math.log1p(-x)


def lll_condition_check(d: int, k: int, beta: float) -> ConditionReport:
    """Local-lemma check with x_c = 1/(d^2 k + 1) and dk neighbouring clauses.

    Holds iff p^k <= x (1 - x)^(dk) with p = e^|b| / (1 + e^|b|). ``lhs`` and
    ``rhs`` are the two sides (not logs).
    """
    if d < 1 or k < 3:
        raise InvalidParameterError("need d >= 1, k >= 3")
    b = abs(beta)
    log_p = -math.log1p(math.exp(-b))
    x = 1.0 / (d * d * k + 1)
    log_lhs = k * log_p
    log_rhs = math.log(x) + d * k * math.log1p(-x)
    lhs, rhs = math.exp(log_lhs), math.exp(log_rhs)
    return ConditionReport("lll", log_lhs <= log_rhs, lhs, rhs, rhs - lhs)
