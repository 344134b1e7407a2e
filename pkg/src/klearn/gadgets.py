"""Gap gadgets: cyclic-batch formulas whose only nearly-all-TRUE model is all-TRUE.

``build_psi0`` groups variables in cyclic windows of ``k/2`` and, for each
window ``i`` and each ``l`` in it, emits the clause

    (x_l  OR  NOT the rest of window i)  OR  (NOT all of window i + k/2)

Any satisfying assignment other than all-TRUE then has at least ``2n/k``
FALSEs. ``build_psi2`` unions permuted copies to widen the gap to ``n/b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._rng import derive_seed, make_rng
from .distribution import DEFAULT_CAP, verify_gap
from .errors import BudgetExhaustedError, CapExceededError, InvalidParameterError
from .formula import Clause, Formula, Literal, negate_all

RETRY_BUDGET = 64


def check_gadget_params(n: int, k: int) -> None:
    if k < 4 or k % 2:
        raise InvalidParameterError(f"k must be an even integer >= 4, got {k}")
    if n < k or n % (k // 2):
        raise InvalidParameterError(f"n must be a multiple of k/2 with n >= k, got n={n}, k={k}")


def _check_permutation(permutation, n: int) -> np.ndarray:
    if permutation is None:
        return np.arange(n)
    perm = np.asarray(permutation, dtype=np.intp)
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise InvalidParameterError("permutation must be a bijection on {0, ..., n-1}")
    return perm


@dataclass(frozen=True)
class GadgetSpec:
    n: int
    k: int
    variant: str = "psi0"  # "psi0" or "psi1"
    permutation: tuple[int, ...] | None = None

    def __post_init__(self):
        check_gadget_params(self.n, self.k)
        if self.variant not in ("psi0", "psi1"):
            raise InvalidParameterError(f"unknown variant {self.variant!r}")
        if self.permutation is not None:
            object.__setattr__(self, "permutation", tuple(int(x) for x in _check_permutation(self.permutation, self.n)))

    def build(self) -> Formula:
        builder = build_psi0 if self.variant == "psi0" else build_psi1
        return builder(self.n, self.k, self.permutation)


@dataclass(frozen=True)
class ReplicaSpec:
    base: GadgetSpec
    b: float
    j_star: int
    seed: int
    seeds: tuple[int | None, ...]  # per replica; None marks the identity copy
    verified: bool
    attempts: int = 1
    permutations: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    @property
    def gap_threshold(self) -> int:
        return math.ceil(self.base.n / self.b)

    def metadata(self) -> list[str]:
        return [
            f"gadget variant={self.base.variant.replace('psi0', 'psi2').replace('psi1', 'psi3')} "
            f"n={self.base.n} k={self.base.k} b={self.b!r} jstar={self.j_star} seed={self.seed} "
            f"verified={str(self.verified).lower()}"
        ]


def batch_indices(i: int, n: int, k: int, permutation: Sequence[int] | None = None) -> frozenset[int]:
    """The cyclic window {pi((i + j) mod n) : 0 <= j < k/2}."""
    check_gadget_params(n, k)
    if i < 0:
        raise InvalidParameterError("batch index must be non-negative")
    perm = _check_permutation(permutation, n)
    return frozenset(int(perm[(i + j) % n]) for j in range(k // 2))


def _window(i: int, n: int, half: int, perm: np.ndarray) -> list[int]:
    return [int(perm[(i + j) % n]) for j in range(half)]


def build_psi0(n: int, k: int, permutation: Sequence[int] | None = None) -> Formula:
    """The base gadget, optionally on permuted variable labels; degree exactly k^2/2."""
    check_gadget_params(n, k)
    perm = _check_permutation(permutation, n)
    half = k // 2
    clauses = []
    for i in range(n):
        window = _window(i, n, half, perm)
        blocker = [Literal(v, True) for v in _window(i + half, n, half, perm)]
        for ell in window:
            w_part = [Literal(v, v != ell) for v in window]
            clauses.append(Clause(tuple(w_part + blocker)))
    return Formula(n, k, k * k // 2, tuple(clauses))


def build_psi1(n: int, k: int, permutation: Sequence[int] | None = None) -> Formula:
    """Mirror of :func:`build_psi0`: all-FALSE is isolated instead of all-TRUE."""
    return negate_all(build_psi0(n, k, permutation))


def jstar(b: float, k: int) -> int:
    """Replica count max{2, floor((2k/b) (1 - 1/b)^(-k/2))}."""
    if not b > 1:
        raise InvalidParameterError(f"b must exceed 1, got {b}")
    if k < 4 or k % 2:
        raise InvalidParameterError(f"k must be an even integer >= 4, got {k}")
    x = math.exp(math.log(2 * k / b) - (k / 2) * math.log1p(-1.0 / b))
    nearest = round(x)
    value = nearest if abs(x - nearest) <= 1e-9 * max(1.0, x) else math.floor(x)
    return max(2, int(value))


def _replica_permutations(n: int, count: int, seed: int, attempt: int) -> tuple[list, list]:
    perms = [np.arange(n)]
    seeds: list[int | None] = [None]
    for t in range(1, count):
        sub = derive_seed(seed, attempt, t)
        perms.append(make_rng(sub).permutation(n))
        seeds.append(sub)
    return perms, seeds


def _union(n: int, k: int, perms: list[np.ndarray], j_star: int) -> Formula:
    clauses: list[Clause] = []
    for perm in perms:
        clauses.extend(build_psi0(n, k, perm).clauses)
    return Formula(n, k, j_star * k * k // 2, tuple(clauses))


def build_psi2(
    n: int,
    k: int,
    b: float,
    seed: int,
    mode: str = "verified",
    cap: int = DEFAULT_CAP,
    retries: int = RETRY_BUDGET,
) -> tuple[ReplicaSpec, Formula]:
    """Union of ``jstar(b, k)`` permuted copies of the base gadget.

    Replica 1 is the identity copy; the others are seeded uniform shuffles.
    In ``"verified"`` mode the permutations are redrawn until a brute-force
    check confirms at least ``ceil(n/b)`` FALSEs in every non-all-TRUE model.
    Duplicate clauses across replicas are kept so the degree bound
    ``jstar * k^2 / 2`` holds by construction.
    """
    check_gadget_params(n, k)
    j = jstar(b, k)
    if mode not in ("verified", "analytic"):
        raise InvalidParameterError(f"mode must be 'verified' or 'analytic', got {mode!r}")
    if mode == "analytic":
        perms, seeds = _replica_permutations(n, j, seed, 0)
        spec = ReplicaSpec(GadgetSpec(n, k), b, j, seed, tuple(seeds), False, 1, tuple(tuple(int(x) for x in p) for p in perms))
        return spec, _union(n, k, perms, j)
    if n > cap:
        raise CapExceededError(f"verified mode needs n <= cap ({n} > {cap})")
    threshold = math.ceil(n / b)
    for attempt in range(retries):
        perms, seeds = _replica_permutations(n, j, seed, attempt)
        formula = _union(n, k, perms, j)
        if verify_gap(formula, threshold, cap):
            spec = ReplicaSpec(
                GadgetSpec(n, k), b, j, seed, tuple(seeds), True, attempt + 1,
                tuple(tuple(int(x) for x in p) for p in perms),
            )
            return spec, formula
    raise BudgetExhaustedError(f"no replica set passed the gap check in {retries} attempts", retries)


def build_psi3(
    n: int,
    k: int,
    b: float,
    seed: int,
    mode: str = "verified",
    cap: int = DEFAULT_CAP,
    retries: int = RETRY_BUDGET,
) -> tuple[ReplicaSpec, Formula]:
    """Negation of :func:`build_psi2`; all-FALSE is isolated with a gap of n/b TRUEs.

    Complementing assignments maps models of one onto models of the other, so
    the gap check on the positive form certifies this one.
    """
    spec, formula = build_psi2(n, k, b, seed, mode, cap, retries)
    spec = ReplicaSpec(
        GadgetSpec(n, k, "psi1"), spec.b, spec.j_star, spec.seed, spec.seeds,
        spec.verified, spec.attempts, spec.permutations,
    )
    return spec, negate_all(formula)


def miss_probability(set_size: int, n: int, k: int) -> float:
    """Probability that a uniform permutation's window of size k/2 avoids a fixed set."""
    half = k // 2
    if k < 2 or k % 2:
        raise InvalidParameterError(f"k must be even, got {k}")
    if not 0 <= set_size <= n - half:
        raise InvalidParameterError(f"set_size must lie in [0, n - k/2], got {set_size}")
    prob = 1.0
    for r in range(half):
        prob *= (n - set_size - r) / (n - r)
    return prob
