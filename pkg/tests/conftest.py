import itertools
import math

import numpy as np
import pytest

from klearn.formula import Assignment, Formula, random_bounded_formula

ACCEPTANCE_RESULTS = []


def brute_models(formula: Formula):
    """All satisfying assignments via itertools, evaluating Literal objects directly."""
    models = []
    for values in itertools.product([False, True], repeat=formula.n):
        if all(any(values[lit.variable] != lit.negated for lit in clause) for clause in formula.clauses):
            models.append(values)
    return models


def brute_partition(formula: Formula, beta: float) -> float:
    return sum(math.exp(beta * sum(v)) for v in brute_models(formula))


def brute_flippable(formula: Formula, values) -> list[bool]:
    """Flippability by flipping each bit and re-evaluating every clause."""
    def sat(vals):
        return all(any(vals[lit.variable] != lit.negated for lit in c) for c in formula.clauses)

    out = []
    for i in range(formula.n):
        flipped = list(values)
        flipped[i] = not flipped[i]
        out.append(sat(flipped))
    return out


def random_instance(rng: np.random.Generator, n_max: int = 20):
    """Random (formula, satisfying assignment, beta) with n <= n_max."""
    while True:
        n = int(rng.integers(3, n_max + 1))
        k = int(rng.integers(2, min(n, 5) + 1))
        d = int(rng.integers(1, 5))
        m = int(rng.integers(0, n * d // k + 1))
        try:
            formula = random_bounded_formula(n, k, d, m, int(rng.integers(2**31)), monotone=bool(rng.random() < 0.3))
        except Exception:
            continue
        for _ in range(200):
            values = rng.random(n) < rng.uniform(0.2, 0.8)
            if all(any(values[lit.variable] != lit.negated for lit in c) for c in formula.clauses):
                return formula, Assignment(values), float(rng.uniform(-4, 4))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
