import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aphj.apfunc import SampledLine
from aphj.conslaw import (
    CellField1D,
    central_gradient,
    discrete_mean,
    duality_check,
    l1_norm,
    nd2_check,
    solve_cl_1d,
    stabilization_series,
)
from aphj.errors import ConfigError, GridMismatch
from aphj.hamiltonian import Hamiltonian
from aphj.hjsolve import SolveConfig, solve_direct_1d

BURGERS = Hamiltonian.quadratic()
PLATEAU = Hamiltonian.plateau(-0.3, 0.3, 1.0)


def test_constant_stays_exact():
    v0 = CellField1D(np.full(64, 0.75))
    for s in solve_cl_1d(v0, BURGERS, SolveConfig(t_final=1.0, snapshot_cadence=0.5)):
        assert np.all(s.values == 0.75)


def test_linear_flux_transport():
    N, c, t = 400, 0.5, 1.0
    u0 = lambda x: np.sin(2 * np.pi * x) / (2 * np.pi)
    v0 = CellField1D.from_averages_of_derivative(u0, N)
    out = solve_cl_1d(v0, Hamiltonian.linear(c), SolveConfig(t_final=t))[-1]
    exact = CellField1D.from_averages_of_derivative(lambda x: u0(x - c * t), N)
    # first-order LF smearing of the lowest mode over a unit time
    assert l1_norm(CellField1D(out.values - exact.values)) <= 0.05


def test_cell_averages_are_exact():
    v = CellField1D.from_averages_of_derivative(lambda x: x**2, 4)
    # averages of 2x over cells centred at j/4
    assert v.values == pytest.approx([0.0, 0.5, 1.0, 1.5])
    assert v.centres == pytest.approx([0, 0.25, 0.5, 0.75])


def test_discrete_mean_examples():
    assert discrete_mean(CellField1D(np.full(10, -1.5))) == -1.5
    x = np.arange(128) / 128
    assert abs(discrete_mean(CellField1D(np.sin(2 * np.pi * x)))) <= 1e-12


def test_only_lax_friedrichs():
    with pytest.raises(ConfigError):
        solve_cl_1d(CellField1D(np.zeros(8)), BURGERS, SolveConfig(scheme="upwind"))


@st.composite
def cell_data(draw, n=64):
    coeffs = draw(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
    shift = draw(st.floats(-1, 1))
    x = np.arange(n) / n
    v = shift + sum(c * np.sin(2 * np.pi * (k + 1) * x + k) for k, c in enumerate(coeffs))
    return CellField1D(v)


FLUXES = [BURGERS, PLATEAU, Hamiltonian("abs"), Hamiltonian.linear(-1.3)]


@settings(max_examples=20)
@given(cell_data(), st.sampled_from(FLUXES))
def test_mass_each_step(v0, H):
    mass0 = math.fsum(v0.values)
    scale = math.fsum(np.abs(v0.values))
    drift = []
    solve_cl_1d(v0, H, SolveConfig(t_final=0.3), lambda t, v: drift.append(abs(math.fsum(v) - mass0)))
    assert max(drift) <= 1e-12 * scale


@settings(max_examples=15)
@given(cell_data(), cell_data(), st.sampled_from(FLUXES))
def test_ordering_and_l1_contraction(a, b0, H):
    b = CellField1D(np.maximum(a.values, b0.values))
    lo = min(a.values.min(), b.values.min())
    hi = max(a.values.max(), b.values.max())
    # a shared range makes both runs use the same alpha and time step
    pad_a = CellField1D(np.concatenate([a.values, [lo, hi]]))
    pad_b = CellField1D(np.concatenate([b.values, [lo, hi]]))
    ra, rb = [pad_a.values], [pad_b.values]
    cfg = SolveConfig(t_final=0.2)
    solve_cl_1d(pad_a, H, cfg, lambda t, v: ra.append(v.copy()))
    solve_cl_1d(pad_b, H, cfg, lambda t, v: rb.append(v.copy()))
    A, B = np.stack(ra), np.stack(rb)
    assert np.all(B >= A - 1e-15)
    d = np.sum(np.abs(B - A), axis=1)
    assert np.all(np.diff(d) <= 1e-12 * max(d[0], 1.0))


def test_burgers_decay_to_mean():
    v0 = CellField1D.from_averages_of_derivative(lambda x: np.sin(2 * np.pi * x) / (2 * np.pi), 400)
    out = solve_cl_1d(v0, BURGERS, SolveConfig(t_final=20.0, snapshot_cadence=20.0))
    assert l1_norm(out[-1]) <= 0.1 * l1_norm(out[0])


def test_plateau_stabilises():
    u0 = lambda x: 0.05 * np.sin(2 * np.pi * x) + 0.02 * np.cos(6 * np.pi * x)
    v0 = CellField1D.from_averages_of_derivative(u0, 400)
    out = solve_cl_1d(v0, PLATEAU, SolveConfig(t_final=20.0, snapshot_cadence=1.0))
    stab = stabilization_series(out[15:], 1.0)
    assert stab[-1] < 1e-2


class TestDuality:
    def test_constant(self):
        u = [SampledLine(1.0, np.full(32, 2.0), True)]
        v = [CellField1D(np.zeros(32))]
        assert duality_check(u, v)[0] <= 1e-12

    def test_linear_flux(self):
        N = 400
        u0f = lambda x: np.sin(2 * np.pi * x) / (2 * np.pi)
        H = Hamiltonian.linear(0.7)
        cfg = SolveConfig(t_final=0.5, snapshot_cadence=0.25)
        uu = solve_direct_1d(SampledLine.from_function(u0f, 1.0, N), H, cfg)
        vv = solve_cl_1d(CellField1D.from_averages_of_derivative(u0f, N), H, cfg)
        assert np.all(duality_check(uu, vv) <= 40 / N)

    def test_burgers(self):
        N = 800
        u0f = lambda x: np.sin(2 * np.pi * x) / (2 * np.pi)
        cfg = SolveConfig(t_final=0.5, snapshot_cadence=0.1)
        uu = solve_direct_1d(SampledLine.from_function(u0f, 1.0, N), BURGERS, cfg)
        vv = solve_cl_1d(CellField1D.from_averages_of_derivative(u0f, N), BURGERS, cfg)
        assert np.max(duality_check(uu, vv)) <= 0.05

    def test_mismatch(self):
        with pytest.raises(GridMismatch):
            duality_check([SampledLine(1.0, np.zeros(32), True)], [CellField1D(np.zeros(16))])
        with pytest.raises(GridMismatch):
            duality_check([SampledLine(1.0, np.zeros(16), True)], [CellField1D(np.zeros(16), 0.5)])
        with pytest.raises(GridMismatch):
            duality_check([], [CellField1D(np.zeros(16))])

    def test_central_gradient_of_sine(self):
        u = SampledLine.from_function(lambda x: np.sin(2 * np.pi * x), 1.0, 256)
        g = central_gradient(u)
        assert np.max(np.abs(g - 2 * np.pi * np.cos(2 * np.pi * u.x))) <= 2e-3


class TestND2:
    def test_convex(self):
        assert nd2_check(BURGERS, 0.0, 0.5, 1e-6)

    def test_affine(self):
        H = Hamiltonian.linear(2.0)
        assert not any(nd2_check(H, I, 0.5, 1e-9) for I in (-3.0, 0.0, 1.7))

    def test_plateau(self):
        assert not nd2_check(PLATEAU, 0.0, 0.2, 1e-6)
        assert nd2_check(PLATEAU, 0.0, 0.5, 1e-6)

    def test_width(self):
        with pytest.raises(ValueError):
            nd2_check(BURGERS, 0.0, 0.0, 1e-6)
