"""Exact and sampled access to the weighted k-SAT Gibbs distribution.

The law puts mass proportional to ``exp(beta * m(sigma))`` on each satisfying
assignment ``sigma``. Exhaustive routines pack assignments into integers with
variable 0 as the most significant bit, so increasing codes are in
lexicographic order (FALSE < TRUE).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from ._rng import make_rng
from .errors import (
    BudgetExhaustedError,
    CapExceededError,
    InvalidParameterError,
    UnsatisfiableError,
)
from .formula import Assignment, Formula

DEFAULT_CAP = 26
_CHUNK = 1 << 20


def p_true(beta: float) -> float:
    """e^beta / (1 + e^beta), without overflow."""
    if beta >= 0:
        return 1.0 / (1.0 + math.exp(-beta))
    z = math.exp(beta)
    return z / (1.0 + z)


def _logsumexp(a: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        return -math.inf
    shift = float(np.max(a))
    return shift + math.log(float(np.sum(np.exp(a - shift))))


def _check_cap(formula: Formula, cap: int) -> None:
    if formula.n > cap:
        raise CapExceededError(f"n={formula.n} exceeds enumeration cap {cap}")


def _iter_satisfying_codes(formula: Formula, cap: int) -> Iterator[np.ndarray]:
    _check_cap(formula, cap)
    total = 1 << formula.n
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        yield codes[formula.satisfied_codes(codes)]


def codes_to_matrix(codes: np.ndarray, n: int) -> np.ndarray:
    """Unpack integer codes into an ``(S, n)`` boolean matrix."""
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    return ((np.asarray(codes, dtype=np.uint64)[:, None] >> shifts) & np.uint64(1)).astype(bool)


def matrix_to_codes(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=bool)
    n = values.shape[-1]
    weights = np.uint64(1) << np.arange(n - 1, -1, -1, dtype=np.uint64)
    return (values.astype(np.uint64) * weights).sum(axis=-1, dtype=np.uint64)


@dataclass(frozen=True)
class ProductMeasure:
    """Independent variables, each TRUE with probability ``p_true``."""

    n: int
    p_true: float

    def __post_init__(self):
        if not 0.0 < self.p_true < 1.0:
            raise InvalidParameterError(f"p_true must lie in (0, 1), got {self.p_true}")

    @classmethod
    def from_beta(cls, n: int, beta: float) -> ProductMeasure:
        return cls(n, p_true(beta))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.random((size, self.n)) < self.p_true


@dataclass(frozen=True)
class SampleReport:
    assignment: Assignment
    attempts: int
    method: str  # "exact-enumeration" or "rejection"


@dataclass(frozen=True, eq=False)
class GibbsTable:
    """All satisfying assignments of ``formula`` with their Gibbs weights.

    ``codes`` is sorted (lexicographic order). Log-weights are ``beta * m``
    and are materialized on demand, since large tables may hold 2^26 rows.
    """

    formula: Formula
    beta: float
    codes: np.ndarray
    log_partition: float

    @cached_property
    def true_counts(self) -> np.ndarray:
        return np.bitwise_count(self.codes).astype(np.int64)

    @cached_property
    def level_counts(self) -> np.ndarray:
        """Number of satisfying assignments with exactly ``m`` TRUEs, for m = 0..n."""
        return np.bincount(self.true_counts, minlength=self.formula.n + 1)

    def __len__(self) -> int:
        return int(self.codes.size)

    @property
    def log_weights(self) -> np.ndarray:
        return self.beta * self.true_counts

    def probabilities(self) -> np.ndarray:
        return np.exp(self.log_weights - self.log_partition)

    def level_probabilities(self) -> np.ndarray:
        """Probability of a single assignment at each TRUE-count level."""
        return np.exp(self.beta * np.arange(self.formula.n + 1) - self.log_partition)

    def assignments_matrix(self) -> np.ndarray:
        return codes_to_matrix(self.codes, self.formula.n)

    @property
    def entries(self) -> list[tuple[Assignment, float]]:
        return [(Assignment(row), float(w)) for row, w in zip(self.assignments_matrix(), self.log_weights)]

    @property
    def partition(self) -> float:
        return math.exp(self.log_partition)

    def probability(self, assignment: Assignment) -> float:
        code = matrix_to_codes(assignment.values[None, :])[0]
        pos = np.searchsorted(self.codes, code)
        if pos < self.codes.size and self.codes[pos] == code:
            return math.exp(self.beta * int(assignment.values.sum()) - self.log_partition)
        return 0.0

    @cached_property
    def _by_level(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(self.true_counts, kind="stable")
        starts = np.concatenate(([0], np.cumsum(self.level_counts)))
        return order, starts


def enumerate_gibbs(formula: Formula, beta: float, cap: int = DEFAULT_CAP) -> GibbsTable:
    """Exhaustively tabulate the Gibbs law; raises if unsatisfiable or ``n > cap``."""
    codes = np.concatenate(list(_iter_satisfying_codes(formula, cap)) or [np.empty(0, np.uint64)])
    if codes.size == 0:
        raise UnsatisfiableError("formula has no satisfying assignment")
    levels = np.bincount(np.bitwise_count(codes).astype(np.int64), minlength=formula.n + 1)
    return GibbsTable(formula, float(beta), codes, _log_z(levels, beta))


def sample_exact_many(table: GibbsTable, seed: int, count: int) -> list[SampleReport]:
    """``count`` independent exact draws; draw ``i`` depends only on ``(seed, i)``."""
    if len(table) == 0:
        raise UnsatisfiableError("empty Gibbs table")
    level_mass = table.level_counts * table.level_probabilities()
    cdf = np.cumsum(level_mass)
    cdf /= cdf[-1]
    order, starts = table._by_level
    u = make_rng(seed).random((count, 2))
    reports = []
    for u_level, u_pick in u:
        level = min(int(np.searchsorted(cdf, u_level, side="right")), len(cdf) - 1)
        while table.level_counts[level] == 0:
            level -= 1
        offset = min(int(u_pick * table.level_counts[level]), int(table.level_counts[level]) - 1)
        code = table.codes[order[starts[level] + offset]]
        reports.append(SampleReport(Assignment(codes_to_matrix(code[None], table.formula.n)[0]), 1, "exact-enumeration"))
    return reports


def sample_exact(table: GibbsTable, seed: int) -> SampleReport:
    """One draw with probability exactly proportional to ``exp(beta * m)``."""
    return sample_exact_many(table, seed, 1)[0]


def sample_rejection(
    formula: Formula,
    beta: float,
    seed: int,
    max_attempts: int = 1_000_000,
    batch: int = 256,
) -> SampleReport:
    """Draw from the product measure until the formula is satisfied.

    The accepted draw is distributed exactly as the Gibbs law.
    """
    if max_attempts < 1:
        raise InvalidParameterError("max_attempts must be >= 1")
    rng = make_rng(seed)
    p = p_true(beta)
    done = 0
    while done < max_attempts:
        size = min(batch, max_attempts - done)
        draws = rng.random((size, formula.n)) < p
        hits = np.flatnonzero(formula.satisfied_batch(draws))
        if hits.size:
            first = int(hits[0])
            return SampleReport(Assignment(draws[first]), done + first + 1, "rejection")
        done += size
    raise BudgetExhaustedError(f"no satisfying draw in {max_attempts} attempts", max_attempts)


def min_false(formula: Formula, cap: int = DEFAULT_CAP) -> int | None:
    """Fewest FALSEs among satisfying assignments other than all-TRUE, or None."""
    full = (1 << formula.n) - 1
    best = None
    for codes in _iter_satisfying_codes(formula, cap):
        codes = codes[codes != np.uint64(full)]
        if codes.size:
            falses = formula.n - int(np.bitwise_count(codes).max())
            best = falses if best is None else min(best, falses)
    return best


def min_true(formula: Formula, cap: int = DEFAULT_CAP) -> int | None:
    """Fewest TRUEs among satisfying assignments other than all-FALSE, or None."""
    best = None
    for codes in _iter_satisfying_codes(formula, cap):
        codes = codes[codes != 0]
        if codes.size:
            trues = int(np.bitwise_count(codes).min())
            best = trues if best is None else min(best, trues)
    return best


def verify_gap(formula: Formula, threshold: int, cap: int = DEFAULT_CAP) -> bool:
    """All-TRUE satisfies, and every other satisfying assignment has >= threshold FALSEs."""
    _check_cap(formula, cap)
    all_true = np.array([(1 << formula.n) - 1], dtype=np.uint64)
    if not formula.satisfied_codes(all_true)[0]:
        return False
    gap = min_false(formula, cap)
    return gap is None or gap >= threshold


def total_variation(formula: Formula, beta1: float, beta2: float, cap: int = DEFAULT_CAP) -> float:
    """Exact total-variation distance between the laws at ``beta1`` and ``beta2``."""
    t1 = enumerate_gibbs(formula, beta1, cap)
    p1 = t1.level_probabilities()
    p2 = np.exp(beta2 * np.arange(formula.n + 1) - _log_z(t1.level_counts, beta2))
    return float(min(1.0, 0.5 * np.sum(t1.level_counts * np.abs(p1 - p2))))


def _log_z(level_counts: np.ndarray, beta: float) -> float:
    present = np.flatnonzero(level_counts)
    return _logsumexp(beta * present + np.log(level_counts[present]))
