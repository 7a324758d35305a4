import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aphj.apfunc import FrequencyVector, TrigPoly
from aphj.errors import EmptyInput, NotInModule
from aphj.freqmod import (
    SpectrumModule,
    combine,
    declared_module,
    hermite_normal_form,
    integer_coordinates,
    kronecker_fill_distance,
    membership,
    module_basis_rational,
    module_of,
)

R = FrequencyVector.rational
K = FrequencyVector.over_basis
F = Fraction


def exact_det(rows):
    """Fraction-based Gaussian elimination; independent of the HNF code."""
    a = [[Fraction(v) for v in r] for r in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            q = a[r][c] / a[c][c]
            a[r] = [x - q * y for x, y in zip(a[r], a[c])]
    return int(det)


def lattice_index(rows):
    """gcd of maximal minors = covolume of the lattice spanned by ``rows``."""
    n = len(rows[0])
    g = 0
    for sel in itertools.combinations(range(len(rows)), n):
        g = math.gcd(g, exact_det([rows[i] for i in sel]))
    return g


class TestHNF:
    def test_example_matrix(self):
        assert hermite_normal_form([[2, 0], [0, 2], [1, 1]]).rows == ((1, 1), (0, 2))

    def test_gcd_case(self):
        assert hermite_normal_form([[4], [6], [10]]).rows == ((2,),)

    def test_zero_rows_dropped(self):
        assert hermite_normal_form([[0, 0], [0, 0]]).rows == ()

    @given(st.lists(st.lists(st.integers(-40, 40), min_size=3, max_size=3), min_size=1, max_size=5))
    def test_canonical_and_idempotent(self, rows):
        h = hermite_normal_form(rows)
        assert hermite_normal_form(h.rows) == h
        cols = []
        for r, row in enumerate(h.rows):
            c = next(i for i, v in enumerate(row) if v != 0)
            cols.append(c)
            assert row[c] > 0
            for above in h.rows[:r]:
                assert 0 <= above[c] < row[c]
        assert cols == sorted(cols) and len(set(cols)) == len(cols)
        assert len(h.rows) == np.linalg.matrix_rank(np.array(rows, dtype=float))

    @given(st.lists(st.lists(st.integers(-20, 20), min_size=2, max_size=2), min_size=2, max_size=5))
    def test_preserves_covolume(self, rows):
        if np.linalg.matrix_rank(np.array(rows, dtype=float)) < 2:
            return
        h = hermite_normal_form(rows)
        assert abs(exact_det(h.rows)) == lattice_index(rows)


class TestModuleBasis:
    def test_half_third(self):
        m = module_basis_rational([R(F(1, 2)), R(F(1, 3))])
        assert m.rank == 1 and m.basis == ((F(1, 6),),)
        assert m.generator_coords == ((3,), (2,))

    def test_two_four(self):
        assert module_basis_rational([R(2), R(4)]).basis == ((F(2),),)

    def test_planar_example(self):
        m = module_basis_rational([R(1, 0), R(0, 1), R(F(1, 2), F(1, 2))])
        assert m.rank == 2
        assert m.basis == ((F(1, 2), F(1, 2)), (F(0), F(1)))

    def test_period_70_module(self):
        p = TrigPoly.sin(R(1)) + TrigPoly.sin(R(F(99, 70)), 0.5)
        m = module_of(p)
        assert m.basis == ((F(1, 70),),)
        assert integer_coordinates(m, R(F(99, 70))) == (99,)

    def test_empty(self):
        with pytest.raises(EmptyInput):
            module_basis_rational([])

    def test_json_round_trip(self):
        m = module_basis_rational([R(F(1, 2)), R(F(1, 3))])
        back = SpectrumModule.from_json(m.to_json())
        assert back.basis == m.basis and back.regime == "rational"


class TestCoordinates:
    def test_examples(self):
        m = module_basis_rational([R(F(1, 6))])
        assert integer_coordinates(m, R(F(1, 2))) == (3,)
        with pytest.raises(NotInModule):
            integer_coordinates(m, R(F(1, 4)))
        assert membership(m, R(F(5, 6)))
        assert not membership(m, R(F(1, 4)))

    def test_declared(self):
        m = declared_module([1.0, math.sqrt(2)])
        assert integer_coordinates(m, K(1, -2)) == (1, -2)
        assert membership(m, K(0, 3))
        assert m.provenance == "declared"

    def test_declared_sublattice(self):
        m = declared_module([1.0, math.sqrt(2)], [K(2, 0), K(0, 2), K(1, 1)])
        assert not membership(m, K(1, 0))
        assert integer_coordinates(m, K(1, 1)) == (1, 0)


@st.composite
def generator_sets(draw):
    n = draw(st.integers(1, 3))
    count = draw(st.integers(1, 4))
    return [
        R(*[F(draw(st.integers(-10, 10)), draw(st.integers(1, 30))) for _ in range(n)]) for _ in range(count)
    ]


@given(generator_sets())
def test_round_trip_and_fixed_point(gens):
    m = module_basis_rational(gens)
    assert m.rank <= len(gens)
    if m.rank == 0:
        assert all(g.is_zero() for g in gens)
        return
    for g, k in zip(gens, m.generator_coords):
        assert combine(m, k) == g
    again = module_basis_rational([FrequencyVector(coords=row) for row in m.basis])
    assert again.basis == m.basis


@given(generator_sets(), st.lists(st.integers(-5, 5), min_size=4, max_size=4))
def test_group_closure(gens, cs):
    m = module_basis_rational(gens)
    n = gens[0].size
    lam = FrequencyVector(coords=tuple(sum((c * g.coords[j] for c, g in zip(cs, gens)), F(0)) for j in range(n)))
    assert membership(m, lam)


@given(st.integers(1, 30), st.integers(1, 30), st.integers(-60, 60), st.integers(1, 60))
def test_rank_one_membership_matches_gcd(d1, d2, num, den):
    # <1/d1, 1/d2> = (1/lcm) Z
    m = module_basis_rational([R(F(1, d1)), R(F(1, d2))])
    lcm = d1 * d2 // math.gcd(d1, d2)
    lam = F(num, den)
    assert membership(m, R(lam)) == ((lam * lcm).denominator == 1)


class TestKronecker:
    def test_circle(self):
        assert kronecker_fill_distance([1.0], 1.0, 1000, 10) <= 0.05

    def test_dependent_stalls(self):
        assert kronecker_fill_distance([1.0, 1.0], 100.0, 10000, 8) >= 0.1

    def test_independent_fills(self):
        assert kronecker_fill_distance([1.0, math.sqrt(2)], 500.0, 50000, 16) <= 1 / 16

    def test_brute_force_oracle(self):
        lam = np.array([1.0, math.sqrt(2)])
        x = np.linspace(0, 50.0, 3000)
        pts = np.mod(x[:, None] * lam, 1.0)
        c = (np.arange(6) + 0.5) / 6
        worst = 0.0
        for cx in c:
            for cy in c:
                d = np.abs(pts - [cx, cy])
                d = np.minimum(d, 1 - d).max(axis=1)
                worst = max(worst, d.min())
        assert kronecker_fill_distance(lam, 50.0, 3000, 6) == pytest.approx(worst, abs=1e-12)

    def test_monotone_in_range(self):
        lam = [1.0, math.sqrt(2)]
        vals = [kronecker_fill_distance(lam, r, 200 * int(r), 8) for r in (10, 40, 160, 640)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_sample_guard(self):
        with pytest.raises(ValueError):
            kronecker_fill_distance([1.0, 2.0], 1.0, 10, 8)
