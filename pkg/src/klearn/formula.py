"""Bounded-degree k-CNF formulas, truth assignments, and DIMACS I/O.

Variables are 0-indexed. TRUE is encoded as boolean ``True``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._rng import make_rng
from .errors import BudgetExhaustedError, DimacsError, InvalidParameterError, UnsatisfiedError


@dataclass(frozen=True, order=True)
class Literal:
    variable: int
    negated: bool = False

    def __neg__(self) -> Literal:
        return Literal(self.variable, not self.negated)

    def to_dimacs(self) -> int:
        return -(self.variable + 1) if self.negated else self.variable + 1

    @classmethod
    def from_dimacs(cls, token: int) -> Literal:
        if token == 0:
            raise DimacsError("0 is not a literal")
        return cls(abs(token) - 1, token < 0)

    def __str__(self) -> str:
        return f"{'~' if self.negated else ''}x{self.variable}"


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, ...]

    def __post_init__(self):
        object.__setattr__(self, "literals", tuple(self.literals))

    @classmethod
    def of(cls, *tokens: int) -> Clause:
        """Build a clause from DIMACS-style signed 1-based tokens."""
        return cls(tuple(Literal.from_dimacs(t) for t in tokens))

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(lit.variable for lit in self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def __str__(self) -> str:
        return "(" + " | ".join(str(lit) for lit in self.literals) + ")"


class Assignment:
    """Immutable truth vector; ``values[i]`` is the value of variable ``i``."""

    __slots__ = ("_values",)

    def __init__(self, values: Iterable[bool] | np.ndarray):
        arr = np.array(values, dtype=bool).reshape(-1)
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return int(self._values.size)

    @classmethod
    def all_true(cls, n: int) -> Assignment:
        return cls(np.ones(n, dtype=bool))

    @classmethod
    def all_false(cls, n: int) -> Assignment:
        return cls(np.zeros(n, dtype=bool))

    @classmethod
    def from_bits(cls, text: str) -> Assignment:
        """Parse a 0/1 string with variable 0 leftmost."""
        text = text.strip()
        if not set(text) <= {"0", "1"}:
            raise InvalidParameterError(f"assignment string must contain only 0/1, got {text!r}")
        return cls(np.frombuffer(text.encode(), dtype=np.uint8) == ord("1"))

    def to_bits(self) -> str:
        return "".join("1" if v else "0" for v in self._values)

    def complement(self) -> Assignment:
        return Assignment(~self._values)

    def flipped(self, i: int) -> Assignment:
        values = self._values.copy()
        values[i] = not values[i]
        return Assignment(values)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i):
        return bool(self._values[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Assignment):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __hash__(self) -> int:
        return hash((self.n, self._values.tobytes()))

    def __repr__(self) -> str:
        return f"Assignment('{self.to_bits()}')"


def count_true(assignment: Assignment) -> int:
    """m(sigma): the number of variables set to TRUE."""
    return int(np.count_nonzero(assignment.values))


@dataclass(frozen=True)
class Formula:
    """A CNF formula with declared arity ``k`` and degree cap ``d``.

    Construction does not enforce the arity or degree invariants; use
    :func:`validate` to list violations. Clauses must be non-empty and
    reference variables in ``[0, n)``.
    """

    n: int
    k: int
    d: int
    clauses: tuple[Clause, ...]
    incidence: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        clauses = tuple(c if isinstance(c, Clause) else Clause(tuple(c)) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if self.n < 0:
            raise InvalidParameterError("n must be non-negative")
        incidence: list[list[int]] = [[] for _ in range(self.n)]
        for j, clause in enumerate(clauses):
            if len(clause) == 0:
                raise InvalidParameterError(f"clause {j} is empty")
            for var in dict.fromkeys(clause.variables):
                if not 0 <= var < self.n:
                    raise InvalidParameterError(f"clause {j} references variable {var} outside [0, {self.n})")
                incidence[var].append(j)
        object.__setattr__(self, "incidence", tuple(tuple(x) for x in incidence))
        self._build_arrays()

    def _build_arrays(self):
        # Normalized literal table: duplicate literals are masked out and
        # tautological clauses dropped, so "sole satisfying literal" is exact.
        rows = []
        for clause in self.clauses:
            seen: dict[int, bool] = {}
            tautology = False
            for lit in clause:
                if lit.variable in seen:
                    if seen[lit.variable] != lit.negated:
                        tautology = True
                    continue
                seen[lit.variable] = lit.negated
            if not tautology:
                rows.append(list(seen.items()))
        width = max((len(r) for r in rows), default=1)
        var = np.zeros((len(rows), width), dtype=np.intp)
        neg = np.zeros((len(rows), width), dtype=bool)
        mask = np.zeros((len(rows), width), dtype=bool)
        pos_bits, neg_bits = [], []
        for j, row in enumerate(rows):
            pbits = nbits = 0
            for t, (v, negated) in enumerate(row):
                var[j, t], neg[j, t], mask[j, t] = v, negated, True
                # Variable 0 is the most significant bit so integer order is lexicographic.
                bit = 1 << (self.n - 1 - v)
                if negated:
                    nbits |= bit
                else:
                    pbits |= bit
            pos_bits.append(pbits)
            neg_bits.append(nbits)
        object.__setattr__(self, "_var", var)
        object.__setattr__(self, "_neg", neg)
        object.__setattr__(self, "_mask", mask)
        object.__setattr__(self, "_pos_bits", tuple(pos_bits))
        object.__setattr__(self, "_neg_bits", tuple(neg_bits))

    @property
    def m(self) -> int:
        return len(self.clauses)

    def degree(self, variable: int) -> int:
        return len(self.incidence[variable])

    def degrees(self) -> np.ndarray:
        """Per-variable degree recomputed from the clause list."""
        deg = np.zeros(self.n, dtype=np.int64)
        for clause in self.clauses:
            for var in set(clause.variables):
                deg[var] += 1
        return deg

    @property
    def max_degree(self) -> int:
        return max((len(x) for x in self.incidence), default=0)

    def literal_truth(self, values: np.ndarray) -> np.ndarray:
        """Truth of each normalized literal; shape ``values.shape[:-1] + (m', width)``.

        Padding slots are always False.
        """
        values = np.asarray(values, dtype=bool)
        return (values[..., self._var] != self._neg) & self._mask

    def satisfied_batch(self, values: np.ndarray) -> np.ndarray:
        """Satisfaction of each row of a ``(S, n)`` boolean matrix."""
        values = np.asarray(values, dtype=bool)
        if values.shape[-1] != self.n:
            raise InvalidParameterError(f"assignment length {values.shape[-1]} != n={self.n}")
        if self._var.shape[0] == 0:
            return np.ones(values.shape[:-1], dtype=bool)
        return self.literal_truth(values).any(axis=-1).all(axis=-1)

    def satisfied_codes(self, codes: np.ndarray) -> np.ndarray:
        """Satisfaction for assignments packed as integers (variable 0 = MSB)."""
        codes = np.asarray(codes, dtype=np.uint64)
        out = np.ones(codes.shape, dtype=bool)
        full = np.uint64((1 << self.n) - 1) if self.n < 64 else np.uint64(-1)
        inverted = ~codes & full
        for p, q in zip(self._pos_bits, self._neg_bits):
            out &= ((codes & np.uint64(p)) != 0) | ((inverted & np.uint64(q)) != 0)
        return out

    def __str__(self) -> str:
        return " & ".join(str(c) for c in self.clauses) or "TRUE"


def make_formula(n: int, k: int, d: int, clauses: Iterable[Sequence[int]]) -> Formula:
    """Convenience constructor from DIMACS-style signed 1-based clause tokens."""
    return Formula(n, k, d, tuple(Clause.of(*c) for c in clauses))


def validate(formula: Formula) -> list[str]:
    """List every arity, distinctness and degree violation; empty iff valid."""
    violations = []
    for j, clause in enumerate(formula.clauses):
        vars_ = clause.variables
        if len(set(vars_)) != len(vars_):
            violations.append(f"clause {j}: repeated variable in {clause}")
        if len(vars_) != formula.k:
            violations.append(f"clause {j}: arity {len(vars_)} != k={formula.k}")
    for var, deg in enumerate(formula.degrees()):
        if deg > formula.d:
            violations.append(f"variable {var}: degree {deg} > d={formula.d}")
    return violations


def satisfies(formula: Formula, assignment: Assignment) -> bool:
    if assignment.n != formula.n:
        raise InvalidParameterError(f"assignment length {assignment.n} != n={formula.n}")
    return bool(formula.satisfied_batch(assignment.values[None, :])[0])


def require_satisfying(formula: Formula, assignment: Assignment) -> None:
    if not satisfies(formula, assignment):
        raise UnsatisfiedError("assignment does not satisfy the formula")


def negate_all(formula: Formula) -> Formula:
    """Flip the polarity of every literal."""
    clauses = tuple(Clause(tuple(-lit for lit in c)) for c in formula.clauses)
    return Formula(formula.n, formula.k, formula.d, clauses)


def relabel(formula: Formula, mapping: Sequence[int]) -> Formula:
    """Rename variable ``i`` to ``mapping[i]``."""
    clauses = tuple(
        Clause(tuple(Literal(int(mapping[lit.variable]), lit.negated) for lit in c))
        for c in formula.clauses
    )
    return Formula(formula.n, formula.k, formula.d, clauses)


# -- DIMACS ------------------------------------------------------------------

_META = re.compile(r"^c\s+klearn\s+(.*)$")


def write_dimacs(formula: Formula, comments: Sequence[str] = ()) -> str:
    """Serialize with 1-based variables and the ``c klearn k=.. d=..`` header."""
    lines = [f"c klearn k={formula.k} d={formula.d}"]
    lines += [f"c {text}" for text in comments]
    lines.append(f"p cnf {formula.n} {formula.m}")
    for clause in formula.clauses:
        lines.append(" ".join(str(lit.to_dimacs()) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str | bytes) -> Formula:
    """Parse DIMACS CNF.

    Without a ``c klearn`` metadata line, ``k`` is taken from the first
    clause and ``d`` is the observed maximum degree.
    """
    if isinstance(text, bytes):
        text = text.decode()
    meta: dict[str, int] = {}
    header = None
    clauses: list[Clause] = []
    current: list[Literal] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            match = _META.match(line)
            if match and header is None:
                for item in match.group(1).split():
                    key, _, value = item.partition("=")
                    if key in ("k", "d"):
                        try:
                            meta[key] = int(value)
                        except ValueError:
                            raise DimacsError(f"line {lineno}: bad metadata {item!r}") from None
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError(f"line {lineno}: negative counts in header")
            continue
        if header is None:
            raise DimacsError(f"line {lineno}: clause before 'p cnf' header")
        for token in line.split():
            try:
                value = int(token)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad token {token!r}") from None
            if value == 0:
                if not current:
                    raise DimacsError(f"line {lineno}: empty clause")
                clauses.append(Clause(tuple(current)))
                current = []
            else:
                if abs(value) > header[0]:
                    raise DimacsError(f"line {lineno}: variable {abs(value)} out of range 1..{header[0]}")
                current.append(Literal.from_dimacs(value))
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("last clause is not terminated by 0")
    n, m = header
    if len(clauses) != m:
        raise DimacsError(f"header declares {m} clauses, found {len(clauses)}")
    if "k" in meta:
        k = meta["k"]
        for j, clause in enumerate(clauses):
            if len(clause) != k:
                raise DimacsError(f"clause {j + 1} has arity {len(clause)}, metadata says k={k}")
    else:
        k = len(clauses[0]) if clauses else 0
    formula = Formula(n, k, 0, tuple(clauses))
    d = meta.get("d", formula.max_degree)
    return Formula(n, k, d, formula.clauses)


def read_dimacs(path) -> Formula:
    with open(path, "rb") as fh:
        return parse_dimacs(fh.read())


def random_bounded_formula(
    n: int,
    k: int,
    d: int,
    clause_count: int,
    seed: int,
    *,
    monotone: bool = False,
    max_restarts: int = 100,
) -> Formula:
    """Random formula in the degree-``d`` class with ``clause_count`` clauses.

    Each clause draws ``k`` distinct variables uniformly among those with
    spare degree; polarities are uniform unless ``monotone``. A stall (fewer
    than ``k`` variables with spare degree) restarts the whole draw.
    """
    if n < 0 or k < 1 or d < 0 or clause_count < 0:
        raise InvalidParameterError("n, d, clause_count must be >= 0 and k >= 1")
    if clause_count * k > n * d:
        raise InvalidParameterError(f"clause_count*k = {clause_count * k} exceeds n*d = {n * d}")
    if clause_count > 0 and k > n:
        raise InvalidParameterError(f"k={k} exceeds n={n}")
    rng = make_rng(seed)
    for _ in range(max_restarts):
        spare = np.full(n, d, dtype=np.int64)
        clauses = []
        for _ in range(clause_count):
            open_vars = np.flatnonzero(spare > 0)
            if open_vars.size < k:
                break
            chosen = np.sort(rng.choice(open_vars, size=k, replace=False))
            spare[chosen] -= 1
            signs = np.zeros(k, dtype=bool) if monotone else rng.random(k) < 0.5
            clauses.append(Clause(tuple(Literal(int(v), bool(s)) for v, s in zip(chosen, signs))))
        else:
            return Formula(n, k, d, tuple(clauses))
    raise BudgetExhaustedError(f"random formula generation stalled {max_restarts} times", max_restarts)
