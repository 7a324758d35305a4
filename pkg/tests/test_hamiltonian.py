import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aphj.errors import ConfigError
from aphj.hamiltonian import Hamiltonian


def test_quadratic_and_shift():
    H = Hamiltonian("quadratic", {"scale": 2.0, "shift": 0.5})
    assert H(np.array([1.0, -2.0])) == pytest.approx([1.5, 4.5])
    assert H.h0 == 0.5


def test_plateau_metadata_matches_evaluation():
    H = Hamiltonian.plateau(-0.3, 0.3, 1.0)
    p = np.linspace(-0.3, 0.3, 101)
    assert np.max(np.abs(H(p) - p)) <= 1e-12
    assert H.linear_interval() == (-0.3, 0.3, 1.0)
    assert H(0.5) == pytest.approx(0.5 + 0.2**3)


def test_multi_dim_quadratic():
    H = Hamiltonian.quadratic(dim=2)
    assert H(np.array([[3.0, 4.0]])) == pytest.approx([12.5])


def test_from_spec_round_trip():
    spec = {"family": "piecewise_linear", "dim": 1, "nodes": [-1, 0, 2], "values": [1, 0, 4]}
    H = Hamiltonian.from_spec(spec)
    assert H.to_spec() == spec
    assert H(np.array([-2.0, 1.0, 3.0])) == pytest.approx([2.0, 2.0, 6.0])


@pytest.mark.parametrize(
    "spec",
    [
        {"family": "cubic"},
        {"family": "quadratic", "scle": 1.0},
        {"family": "plateau", "a": 0.2, "b": 0.5},
        {"family": "sampled", "nodes": [0, 0], "values": [1, 2]},
        {"family": "linear", "c": [1.0, 2.0]},
    ],
)
def test_bad_specs(spec):
    with pytest.raises(ConfigError):
        Hamiltonian.from_spec(spec)


def test_sampled_refuses_extrapolation():
    H = Hamiltonian("sampled", {"nodes": [-1.0, 1.0], "values": [1.0, 1.0]})
    with pytest.raises(ValueError):
        H(2.0)


FAMILIES = [
    Hamiltonian.quadratic(),
    Hamiltonian.quadratic(-1.0),
    Hamiltonian.linear(-2.0),
    Hamiltonian("power", {"gamma": 1.5}),
    Hamiltonian("abs"),
    Hamiltonian.plateau(-0.3, 0.3, 1.0),
    Hamiltonian.plateau(-1.0, 1.0, 2.0, "quadratic"),
    Hamiltonian("piecewise_linear", {"nodes": [-1, 0, 1], "values": [2, 0.5, -1]}),
    Hamiltonian("quadratic", {"scale": 1.0, "shift": 0.7}),
]


@pytest.mark.parametrize("H", FAMILIES, ids=lambda h: h.kind)
def test_monotone_split(H):
    lo, hi = -3.0, 3.0
    up, down = H.monotone_split(lo, hi)
    s = np.linspace(lo, hi, 2001)
    assert np.all(np.diff(up(s)) >= -1e-12)
    assert np.all(np.diff(down(s)) <= 1e-12)
    assert up(0.0) == pytest.approx(0.0, abs=1e-12)
    # tabulated splits reproduce the piecewise-linear interpolant; 4097 nodes on [-3, 3]
    assert np.max(np.abs(up(s) + down(s) - H(s))) <= 1e-3 * (1 + np.max(np.abs(H(s))))


@given(st.floats(-0.9, -0.05), st.floats(0.05, 0.9), st.floats(-3, 3), st.floats(-4, 4))
def test_plateau_linear_on_interval(a, b, c, p):
    H = Hamiltonian.plateau(a, b, c)
    q = min(max(p, a), b)
    assert H(q) == pytest.approx(c * q, abs=1e-12)
