import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aphj.apfunc import (
    FrequencyVector,
    SampledLine,
    TrigPoly,
    bohr_coefficient,
    bohr_probe_sampled,
    evaluate,
    fejer_approx,
    mean_value,
    spectrum,
    sup_distance,
)
from aphj.errors import (
    GridMismatch,
    IncompatibleRepresentation,
    NonRealResidue,
    OrderTooLarge,
    WindowTooShort,
)
from aphj.torus import TorusField

R = FrequencyVector.rational
K = FrequencyVector.over_basis
SQ2 = math.sqrt(2)


def sin1():
    return TrigPoly.sin(R(1))


def ap_sqrt2():
    return TrigPoly.constant(2.0, basis=[SQ2]) + TrigPoly.cos(K(1), basis=[SQ2])


class TestFrequencyVector:
    def test_lowest_terms_and_exact_equality(self):
        assert R(Fraction(2, 4)) == R(Fraction(1, 2))
        assert R(Fraction(-3, 6)).coords == (Fraction(-1, 2),)

    def test_rejects_inexact_float(self):
        with pytest.raises(TypeError):
            R(0.1)

    def test_json_round_trip(self):
        f = R(Fraction(99, 70))
        assert FrequencyVector.from_json(f.to_json()) == f
        g = K(1, -2)
        assert FrequencyVector.from_json(g.to_json()) == g

    def test_regimes_do_not_mix(self):
        with pytest.raises(IncompatibleRepresentation):
            R(1) + K(1)


class TestEvaluate:
    def test_constant(self):
        assert evaluate(TrigPoly.constant(3.0), 7.2) == pytest.approx(3.0, abs=1e-15)

    def test_sin_quarter(self):
        assert evaluate(sin1(), 0.25) == pytest.approx(1.0, abs=1e-15)

    def test_declared_basis(self):
        assert evaluate(ap_sqrt2(), 0.0) == pytest.approx(3.0, abs=1e-15)

    def test_unpaired_term_raises(self):
        p = TrigPoly(1, {R(1): 1.0}, real_valued=True)
        with pytest.raises(NonRealResidue):
            evaluate(p, 0.25)

    def test_vectorised(self):
        x = np.linspace(0, 1, 9)
        assert np.allclose(evaluate(sin1(), x), np.sin(2 * np.pi * x), atol=1e-14)


class TestCoefficients:
    def test_mean_values(self):
        assert mean_value(TrigPoly.constant(3.0)) == 3.0
        assert mean_value(sin1()) == 0.0
        assert mean_value(ap_sqrt2()) == 2.0

    def test_bohr_coefficient_examples(self):
        assert bohr_coefficient(sin1(), R(1)) == pytest.approx(1 / 2j)
        assert bohr_coefficient(sin1(), R(Fraction(1, 2))) == 0
        assert bohr_coefficient(ap_sqrt2(), K(-1)) == pytest.approx(0.5)

    def test_regime_mismatch(self):
        with pytest.raises(IncompatibleRepresentation):
            bohr_coefficient(sin1(), K(1))

    def test_spectrum_examples(self):
        assert spectrum(TrigPoly.constant(3.0)) == {R(0)}
        assert spectrum(sin1()) == {R(1), R(-1)}
        p = TrigPoly.sin(K(1, 0), basis=[1, SQ2]) + TrigPoly.sin(K(0, 1), 0.5, basis=[1, SQ2])
        assert spectrum(p) == {K(1, 0), K(-1, 0), K(0, 1), K(0, -1)}


@st.composite
def rational_polys(draw):
    n = draw(st.integers(1, 4))
    poly = TrigPoly.constant(draw(st.floats(-2, 2)))
    for _ in range(n):
        f = R(Fraction(draw(st.integers(1, 12)), draw(st.integers(1, 6))))
        amp = draw(st.floats(-2, 2))
        kind = draw(st.sampled_from([TrigPoly.sin, TrigPoly.cos]))
        poly = poly + kind(f, amp)
    return poly


@given(rational_polys())
def test_mean_is_zero_coefficient(poly):
    assert mean_value(poly) == bohr_coefficient(poly, R(0)).real


@given(rational_polys(), st.integers(-12, 12), st.integers(1, 6))
def test_conjugate_symmetry(poly, num, den):
    lam = R(Fraction(num, den))
    a, b = bohr_coefficient(poly, lam), bohr_coefficient(poly, -lam)
    assert abs(b - a.conjugate()) <= 1e-15 * (1 + abs(a))


@given(rational_polys())
def test_json_round_trip_poly(poly):
    back = TrigPoly.from_json(poly.to_json())
    x = np.linspace(0, 3, 17)
    assert np.array_equal(evaluate(back, x), evaluate(poly, x))


@given(rational_polys(), st.integers(0, 12), st.integers(1, 6))
def test_probe_matches_coefficient_on_common_period(poly, num, den):
    # every frequency has denominator dividing 60, so a 60-periodic window is exact
    lam = Fraction(num, den)
    line = SampledLine.from_function(lambda x: evaluate(poly, x), 60.0, 60 * 64)
    est = bohr_probe_sampled(line, float(lam), 60.0)
    exact = bohr_coefficient(poly, R(lam))
    total = sum(abs(a) for a in poly.terms.values())
    assert abs(est - exact) <= 1e-10 * max(total, 1)


class TestBohrProbe:
    def test_sin_window_32(self):
        line = SampledLine.from_function(lambda x: np.sin(2 * np.pi * x), 32.0, 4096)
        est = bohr_probe_sampled(line, 1.0, 32.0)
        assert abs(est - (-0.5j)) <= 1e-3
        assert abs(bohr_probe_sampled(line, 0.5, 32.0)) <= 1e-3

    def test_constant_integer_window(self):
        line = SampledLine.from_function(lambda x: np.ones_like(x), 8.0, 8 * 64)
        for lam in (0.5, 1.0, 2.25):
            assert abs(bohr_probe_sampled(line, lam, 8.0)) <= 1e-12

    def test_period_70_window(self):
        fn = lambda x: np.sin(2 * np.pi * x) + 0.5 * np.sin(2 * np.pi * 99 / 70 * x)
        line = SampledLine.from_function(fn, 70.0, 70 * 64)
        assert abs(bohr_probe_sampled(line, 99 / 70, 70.0) - (-0.25j)) <= 1e-3

    def test_window_guard(self):
        line = SampledLine.from_function(np.sin, 16.0, 16 * 64)
        with pytest.raises(WindowTooShort):
            bohr_probe_sampled(line, 1.0, 16.0, gap=1 / 16)

    def test_sampling_density_guard(self):
        line = SampledLine.from_function(np.sin, 16.0, 16 * 32)
        with pytest.raises(ValueError):
            bohr_probe_sampled(line, 1.0, 16.0)


class TestFejer:
    def test_constant(self):
        v = TorusField(np.full(32, 2.5))
        p = fejer_approx(v, 4)
        assert evaluate(p, np.array([0.1, 0.7])) == pytest.approx([2.5, 2.5])

    @pytest.mark.parametrize("order,weight", [(1, 0.5), (8, 8 / 9)])
    def test_cos_weights(self, order, weight):
        v = TorusField.from_function(lambda y: np.cos(2 * np.pi * y), 1, 64)
        p = fejer_approx(v, order)
        assert bohr_coefficient(p, R(1)) == pytest.approx(weight / 2, abs=1e-14)
        assert len(spectrum(p)) == 2

    def test_order_guard(self):
        with pytest.raises(OrderTooLarge):
            fejer_approx(TorusField(np.zeros(16)), 8)

    @given(st.integers(0, 2**31 - 1), st.integers(1, 6), st.sampled_from([1, 2]))
    def test_sup_norm_and_integer_spectrum(self, seed, order, rank):
        rng = np.random.default_rng(seed)
        v = TorusField(rng.normal(size=(16,) * rank))
        p = fejer_approx(v, order)
        y = np.arange(16) / 16
        mesh = np.stack(np.meshgrid(*([y] * rank), indexing="ij"), axis=-1)
        vals = evaluate(p, mesh if rank > 1 else mesh[..., 0])
        assert np.max(np.abs(vals)) <= np.max(np.abs(v.values)) + 1e-12
        for f in spectrum(p):
            assert all(c.denominator == 1 and abs(c) <= order for c in f.coords)


class TestSampledLine:
    def test_sup_distance(self):
        a = SampledLine.from_function(lambda x: 0 * x + 1.0, 1.0, 10)
        b = SampledLine.from_function(lambda x: 0 * x - 2.0, 1.0, 10)
        assert sup_distance(a, a) == 0
        assert sup_distance(a, b) == 3.0
        with pytest.raises(GridMismatch):
            sup_distance(a, SampledLine.from_function(np.sin, 1.0, 11))

    def test_csv_round_trip(self, tmp_path):
        line = SampledLine.from_function(np.cos, 2.0, 50)
        line.to_csv(tmp_path / "u.csv")
        back = SampledLine.from_csv(tmp_path / "u.csv")
        assert back.length == pytest.approx(2.0)
        assert np.array_equal(back.values, line.values)
        assert (tmp_path / "u.csv").read_text().splitlines()[0] == "x,value"

    def test_periodic_interpolation_wraps(self):
        line = SampledLine.from_function(lambda x: np.sin(2 * np.pi * x), 1.0, 256)
        assert line.interpolate(1.25) == pytest.approx(1.0, abs=1e-3)
        assert cmath.isclose(line.interpolate(-0.75), 1.0, abs_tol=1e-3)
