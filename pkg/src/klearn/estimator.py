"""Maximum pseudo-likelihood estimation of ``beta`` from one satisfying assignment.

For a fixed sample every variable falls in one of four classes:

* flippable (either value keeps the formula satisfied), split by current value;
* stuck TRUE (only TRUE works);
* stuck FALSE (only FALSE works).

The derivative of the log-pseudo-likelihood only depends on the class
counts, so after one linear-time classification pass each evaluation is O(1)
and the root is found by bisection.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distribution import DEFAULT_CAP, enumerate_gibbs, p_true
from .errors import InvalidParameterError
from .formula import Assignment, Formula, count_true, require_satisfying


class Category(enum.IntEnum):
    FLIPPABLE_TRUE = 0
    FLIPPABLE_FALSE = 1
    STUCK_TRUE = 2
    STUCK_FALSE = 3


class Status(str, enum.Enum):
    ROOT_FOUND = "RootFound"
    CLAMPED_LOW = "ClampedLow"
    CLAMPED_HIGH = "ClampedHigh"
    NON_IDENTIFIABLE = "NonIdentifiable"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Classification:
    flippable_true: int
    flippable_false: int
    stuck_true: int
    stuck_false: int
    per_variable: np.ndarray  # Category codes, int8

    @property
    def n(self) -> int:
        return self.flippable_true + self.flippable_false + self.stuck_true + self.stuck_false

    @property
    def flippable_total(self) -> int:
        return self.flippable_true + self.flippable_false

    @property
    def m(self) -> int:
        return self.flippable_true + self.stuck_true

    @classmethod
    def from_counts(cls, flippable_true=0, flippable_false=0, stuck_true=0, stuck_false=0) -> Classification:
        labels = np.repeat(
            np.array([Category.FLIPPABLE_TRUE, Category.FLIPPABLE_FALSE, Category.STUCK_TRUE, Category.STUCK_FALSE], dtype=np.int8),
            [flippable_true, flippable_false, stuck_true, stuck_false],
        )
        return cls(flippable_true, flippable_false, stuck_true, stuck_false, labels)

    def as_dict(self) -> dict:
        return {
            "flippable_true": self.flippable_true,
            "flippable_false": self.flippable_false,
            "stuck_true": self.stuck_true,
            "stuck_false": self.stuck_false,
        }


@dataclass(frozen=True)
class EstimatorConfig:
    B: float
    epsilon: float | None = None  # None means n ** -0.5

    def __post_init__(self):
        if not self.B > 0:
            raise InvalidParameterError(f"B must be positive, got {self.B}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise InvalidParameterError(f"epsilon must be positive, got {self.epsilon}")

    def resolve_epsilon(self, n: int) -> float:
        return self.epsilon if self.epsilon is not None else 1.0 / math.sqrt(max(n, 1))


@dataclass(frozen=True)
class EstimateResult:
    beta_hat: float
    status: Status
    iterations: int
    classification: Classification

    def as_dict(self) -> dict:
        return {
            "beta_hat": self.beta_hat,
            "status": self.status.value,
            "iterations": self.iterations,
            **self.classification.as_dict(),
            "flippable_total": self.classification.flippable_total,
        }


def critical_variables(formula: Formula, values: np.ndarray) -> np.ndarray:
    """Mark variables that are the sole satisfying literal of some clause.

    ``values`` is ``(n,)`` or ``(S, n)``; the result has the same shape. A
    variable is critical iff flipping it breaks the (satisfied) formula.
    """
    values = np.asarray(values, dtype=bool)
    single = values.ndim == 1
    rows = values[None, :] if single else values
    critical = np.zeros(rows.shape, dtype=bool)
    if formula._var.shape[0]:
        truth = formula.literal_truth(rows)
        sole = truth & (truth.sum(axis=-1) == 1)[..., None]
        r, c, t = np.nonzero(sole)
        critical[r, formula._var[c, t]] = True
    return critical[0] if single else critical


def classify(formula: Formula, assignment: Assignment) -> Classification:
    """Partition variables into flippable / stuck classes for a satisfying sample."""
    require_satisfying(formula, assignment)
    values = assignment.values
    flippable = ~critical_variables(formula, values)
    labels = np.where(
        flippable,
        np.where(values, Category.FLIPPABLE_TRUE, Category.FLIPPABLE_FALSE),
        np.where(values, Category.STUCK_TRUE, Category.STUCK_FALSE),
    ).astype(np.int8)
    counts = np.bincount(labels, minlength=4)
    return Classification(int(counts[0]), int(counts[1]), int(counts[2]), int(counts[3]), labels)


def class_counts_batch(formula: Formula, values: np.ndarray, chunk: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """(flippable_true, flippable_total) for every row of a satisfying ``(S, n)`` matrix."""
    values = np.asarray(values, dtype=bool)
    ft = np.empty(values.shape[0], dtype=np.int64)
    total = np.empty(values.shape[0], dtype=np.int64)
    for start in range(0, values.shape[0], chunk):
        rows = values[start:start + chunk]
        flippable = ~critical_variables(formula, rows)
        ft[start:start + chunk] = (flippable & rows).sum(axis=1)
        total[start:start + chunk] = flippable.sum(axis=1)
    return ft, total


def pseudo_derivative(classification: Classification, beta: float) -> float:
    """dF/dbeta from the grouped class counts."""
    return classification.flippable_true - p_true(beta) * classification.flippable_total


def _flip_indicators(formula: Formula, assignment: Assignment, i: int) -> tuple[bool, bool]:
    """Whether sigma_{-i} with x_i := TRUE / FALSE satisfies the clauses touching x_i."""
    values = assignment.values
    ok = {True: True, False: True}
    for value in (True, False):
        for j in formula.incidence[i]:
            if not any(
                (value if lit.variable == i else bool(values[lit.variable])) != lit.negated
                for lit in formula.clauses[j]
            ):
                ok[value] = False
                break
    return ok[True], ok[False]


def pseudo_derivative_direct(formula: Formula, assignment: Assignment, beta: float) -> float:
    """dF/dbeta as the ungrouped per-variable sum (oracle for :func:`pseudo_derivative`)."""
    require_satisfying(formula, assignment)
    # e^b t / (e^b t + f) rewritten as t / (t + f e^-b) to stay finite.
    decay = float(np.exp(np.float64(-beta))) if beta > -700 else math.inf
    total = 0.0
    for i in range(formula.n):
        t, f = _flip_indicators(formula, assignment, i)
        if t:
            total += 1.0 / (1.0 + f * decay) if f else 1.0
    return count_true(assignment) - total


def second_derivative_direct(formula: Formula, assignment: Assignment, beta: float) -> float:
    """d2F/dbeta2 as minus the sum of per-variable derivatives of e^b t / (e^b t + f)."""
    require_satisfying(formula, assignment)
    p = p_true(beta)
    total = 0.0
    for i in range(formula.n):
        t, f = _flip_indicators(formula, assignment, i)
        # d/db [e^b t / (e^b t + f)] vanishes unless both indicators are set.
        if t and f:
            total += p * (1.0 - p)
    return -total


def log_pseudo_likelihood(formula: Formula, assignment: Assignment, beta: float) -> float:
    """F(beta; sigma) = beta*m - sum_i ln(e^beta 1[TRUE ok] + 1[FALSE ok])."""
    c = classify(formula, assignment)
    softplus = float(np.logaddexp(0.0, beta))
    return beta * c.m - c.stuck_true * beta - c.flippable_total * softplus


def second_derivative(classification: Classification, beta: float) -> float:
    """d2F/dbeta2 = -e^b/(e^b+1)^2 * (number of flippable variables); always <= 0."""
    p = p_true(beta)
    return -p * (1.0 - p) * classification.flippable_total


def estimate_closed_form(classification: Classification) -> float | None:
    """ln(flippable_true / flippable_false) when both are positive."""
    if classification.flippable_true > 0 and classification.flippable_false > 0:
        return math.log(classification.flippable_true) - math.log(classification.flippable_false)
    return None


def estimate(formula: Formula, assignment: Assignment, config: EstimatorConfig) -> EstimateResult:
    """Bisection for the root of dF/dbeta on [-2B, 2B]."""
    c = classify(formula, assignment)
    return estimate_from_classification(c, config)


def estimate_from_classification(c: Classification, config: EstimatorConfig) -> EstimateResult:
    eps = config.resolve_epsilon(c.n)
    lo, hi = -2.0 * config.B, 2.0 * config.B
    if c.flippable_total == 0:
        return EstimateResult(0.0, Status.NON_IDENTIFIABLE, 0, c)
    if pseudo_derivative(c, hi) > 0:
        return EstimateResult(hi, Status.CLAMPED_HIGH, 0, c)
    if pseudo_derivative(c, lo) < 0:
        return EstimateResult(lo, Status.CLAMPED_LOW, 0, c)
    iterations = 0
    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        if pseudo_derivative(c, mid) > 0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return EstimateResult(0.5 * (lo + hi), Status.ROOT_FOUND, iterations, c)


def second_moment_diagnostic(formula: Formula, beta: float, cap: int = DEFAULT_CAP) -> float:
    """Exact E[(dF/dbeta)^2] under the Gibbs law at ``beta``."""
    table = enumerate_gibbs(formula, beta, cap)
    ft, total = class_counts_batch(formula, table.assignments_matrix())
    g = ft - p_true(beta) * total
    return float(np.sum(table.probabilities() * g * g))
