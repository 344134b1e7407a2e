import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from klearn.errors import BudgetExhaustedError, DimacsError, InvalidParameterError
from klearn.formula import (
    Assignment,
    Clause,
    Formula,
    Literal,
    count_true,
    make_formula,
    negate_all,
    parse_dimacs,
    random_bounded_formula,
    satisfies,
    validate,
    write_dimacs,
)
from klearn.gadgets import build_psi0

from conftest import brute_models


@st.composite
def formulas(draw, max_n=10):
    n = draw(st.integers(2, max_n))
    k = draw(st.integers(1, min(n, 4)))
    d = draw(st.integers(1, 4))
    m = draw(st.integers(0, n * d // k))
    seed = draw(st.integers(0, 2**31))
    monotone = draw(st.booleans())
    return random_bounded_formula(n, k, d, m, seed, monotone=monotone)


class TestValidate:
    def test_psi0_is_valid(self):
        f = build_psi0(8, 4)
        assert f.m == 16
        assert validate(f) == []
        assert list(f.degrees()) == [8] * 8

    def test_repeated_variable(self):
        f = Formula(3, 3, 3, (Clause((Literal(0), Literal(0, True), Literal(1))),))
        violations = validate(f)
        assert len(violations) == 1
        assert "repeated variable" in violations[0]

    def test_degree_cap_too_small(self):
        f = build_psi0(8, 4)
        violations = validate(Formula(8, 4, 7, f.clauses))
        assert len(violations) == 8
        assert all("degree 8 > d=7" in v for v in violations)

    def test_wrong_arity(self):
        f = make_formula(4, 3, 2, [[1, 2]])
        assert validate(f) == ["clause 0: arity 2 != k=3"]

    @given(formulas())
    def test_generator_output_valid(self, f):
        assert validate(f) == []

    @given(formulas())
    def test_incidence_matches_clause_list(self, f):
        rebuilt = [[j for j, c in enumerate(f.clauses) if v in c.variables] for v in range(f.n)]
        assert [list(x) for x in f.incidence] == rebuilt
        assert [f.degree(v) for v in range(f.n)] == list(f.degrees())

    def test_out_of_range_variable_rejected(self):
        with pytest.raises(InvalidParameterError):
            make_formula(2, 1, 1, [[3]])


class TestSatisfies:
    def test_sigma_plus_and_all_false_satisfy_psi0(self):
        f = build_psi0(8, 4)
        assert satisfies(f, Assignment.all_true(8))
        assert satisfies(f, Assignment.all_false(8))

    def test_empty_formula(self):
        f = Formula(5, 3, 2, ())
        assert satisfies(f, Assignment.from_bits("01010"))

    def test_length_mismatch(self):
        with pytest.raises(InvalidParameterError):
            satisfies(Formula(3, 1, 1, ()), Assignment.all_true(4))

    def test_single_assignment(self):
        f = make_formula(3, 3, 1, [[1, -2, 3]])
        assert not satisfies(f, Assignment.from_bits("010"))
        assert satisfies(f, Assignment.from_bits("000"))

    @given(formulas(max_n=8))
    @settings(max_examples=40)
    def test_batch_matches_brute_force(self, f):
        models = set(brute_models(f))
        grid = np.array(list(np.ndindex(*(2,) * f.n)), dtype=bool)
        fast = f.satisfied_batch(grid)
        assert {tuple(bool(x) for x in row) for row, ok in zip(grid, fast) if ok} == models

    @given(st.integers(2, 8), st.integers(0, 2**31), st.data())
    def test_monotone_formula_is_monotone(self, n, seed, data):
        f = random_bounded_formula(n, 2, 3, n, seed, monotone=True)
        values = np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)))
        extra = np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)))
        if satisfies(f, Assignment(values)):
            assert satisfies(f, Assignment(values | extra))

    def test_tautological_clause(self):
        f = Formula(2, 2, 1, (Clause((Literal(0), Literal(0, True))),))
        assert satisfies(f, Assignment.from_bits("00"))
        assert satisfies(f, Assignment.from_bits("10"))


def test_count_true():
    assert count_true(Assignment.all_true(9)) == 9
    assert count_true(Assignment.all_false(9)) == 0
    assert count_true(Assignment.from_bits("10101010")) == 4


class TestNegateAll:
    def test_single_clause(self):
        f = make_formula(3, 3, 1, [[1, -2, 3]])
        assert negate_all(f) == make_formula(3, 3, 1, [[-1, 2, -3]])

    @given(formulas())
    def test_involution(self, f):
        g = negate_all(f)
        assert (g.n, g.k, g.d) == (f.n, f.k, f.d)
        assert negate_all(g) == f


class TestDimacs:
    def test_parse_small(self):
        f = parse_dimacs("p cnf 2 1\n1 -2 0\n")
        assert f.n == 2 and f.k == 2 and f.d == 1
        assert f.clauses == (Clause((Literal(0), Literal(1, True))),)

    def test_write_format(self):
        text = write_dimacs(make_formula(3, 2, 2, [[1, -3], [2, 3]]))
        assert text == "c klearn k=2 d=2\np cnf 3 2\n1 -3 0\n2 3 0\n"

    def test_psi0_roundtrip_keeps_metadata(self):
        f = build_psi0(8, 4)
        g = parse_dimacs(write_dimacs(f, ["gadget variant=psi0"]))
        assert g == f
        assert (g.k, g.d) == (4, 8)

    @given(formulas())
    def test_roundtrip(self, f):
        assert parse_dimacs(write_dimacs(f)) == f

    def test_canonical_rewrite(self):
        messy = "c hello\nc klearn k=2 d=3\np cnf 3 2\n1\n -2 0 2 3 0\n"
        once = write_dimacs(parse_dimacs(messy))
        assert once == "c klearn k=2 d=3\np cnf 3 2\n1 -2 0\n2 3 0\n"
        assert write_dimacs(parse_dimacs(once)) == once

    def test_bytes_input(self):
        assert parse_dimacs(b"p cnf 1 1\n1 0\n").m == 1

    @pytest.mark.parametrize(
        "text",
        [
            "p cnf x 1\n1 0\n",
            "p dnf 2 1\n1 0\n",
            "1 2 0\n",
            "p cnf 2 1\n1 3 0\n",
            "c klearn k=3 d=1\np cnf 3 1\n1 2 0\n",
            "p cnf 2 2\n1 2 0\n",
            "p cnf 2 1\n1 2\n",
        ],
    )
    def test_malformed(self, text):
        with pytest.raises(DimacsError):
            parse_dimacs(text)


class TestRandomFormula:
    def test_no_clauses(self):
        f = random_bounded_formula(10, 3, 2, 0, seed=5)
        assert f.m == 0 and f.n == 10

    def test_deterministic(self):
        assert random_bounded_formula(30, 3, 3, 25, 9) == random_bounded_formula(30, 3, 3, 25, 9)
        assert random_bounded_formula(30, 3, 3, 25, 9) != random_bounded_formula(30, 3, 3, 25, 10)

    def test_infeasible(self):
        with pytest.raises(InvalidParameterError):
            random_bounded_formula(4, 3, 1, 2, 0)

    def test_stall_budget(self):
        # Tight instance: a single draw stalls more often than not.
        outcomes = []
        for seed in range(20):
            try:
                random_bounded_formula(10, 5, 2, 4, seed, max_restarts=1)
                outcomes.append(True)
            except BudgetExhaustedError:
                outcomes.append(False)
        assert not all(outcomes)
        for seed in range(20):
            assert validate(random_bounded_formula(10, 5, 2, 4, seed)) == []

    def test_saturated_monotone(self):
        f = random_bounded_formula(512, 5, 3, 512 * 3 // 5, 1, monotone=True)
        assert validate(f) == []
        assert all(not lit.negated for c in f.clauses for lit in c)


def test_assignment_bits_roundtrip():
    a = Assignment.from_bits("0110")
    assert a.to_bits() == "0110"
    assert a.complement() == Assignment.from_bits("1001")
    assert a.flipped(0) == Assignment.from_bits("1110")
    with pytest.raises(InvalidParameterError):
        Assignment.from_bits("012")
