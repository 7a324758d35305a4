"""Periodic 1-D scalar conservation law ``v_t + H(v)_x = 0`` and the HJ duality harness.

Finite volumes on ``N`` cells of width ``1/N`` with the global Lax-Friedrichs
flux. Cell j is centred at ``j/N`` so cells line up with the HJ nodes. The
discrete mean is checked every step with ``math.fsum``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .apfunc import SampledLine
from .errors import BlowUp, CFLFailure, ConfigError, GridMismatch, InvariantBreach
from .hamiltonian import Hamiltonian
from .hjsolve import ALPHA_INFLATION, MAX_STEPS, SolveConfig, _checked_secant_sup

MASS_RTOL = 1e-12
ND2_SAMPLES = 257


@dataclass
class CellField1D:
    values: np.ndarray
    time: float = 0.0
    length: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError("CellField1D needs a 1-D array of >= 2 cells")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("cell values must be finite")

    @property
    def grid_n(self) -> int:
        return self.values.size

    @property
    def dx(self) -> float:
        return self.length / self.values.size

    @property
    def centres(self) -> np.ndarray:
        return np.arange(self.grid_n) * self.dx

    @classmethod
    def from_averages_of_derivative(cls, u0: Callable, grid_n: int, length: float = 1.0) -> "CellField1D":
        """Exact cell averages of ``u0'``: ``(u0(x_j + dx/2) - u0(x_j - dx/2)) / dx``."""
        edges = (np.arange(grid_n + 1) - 0.5) * (length / grid_n)
        u = np.asarray(u0(edges), dtype=float)
        return cls(np.diff(u) / (length / grid_n), 0.0, length)

    def oscillation(self) -> float:
        return float(self.values.max() - self.values.min())


def discrete_mean(v: CellField1D) -> float:
    return math.fsum(v.values) / v.grid_n


def flux_alpha(H: Hamiltonian, lo: float, hi: float, delta: float | None = None) -> float:
    """Inflated sup of |H'| over ``[lo - delta, hi + delta]`` from dense secants."""
    if delta is None:
        delta = 0.05 * max(hi - lo, 1e-3)
    return ALPHA_INFLATION * _checked_secant_sup(H, lo - delta, hi + delta, 1025)


def _lf_flux(H: Hamiltonian, v: np.ndarray, alpha: float) -> np.ndarray:
    vr = np.roll(v, -1)
    return 0.5 * (H(v) + H(vr)) - 0.5 * alpha * (vr - v)


def solve_cl_1d(
    v0: CellField1D,
    H: Hamiltonian,
    cfg: SolveConfig,
    step_callback: Callable[[float, np.ndarray], None] | None = None,
) -> list[CellField1D]:
    """Conservative Lax-Friedrichs steps with ``alpha dt / dx <= cfl_safety``.

    The monotone range ``[min v0, max v0]`` is invariant, so a global alpha
    computed once is valid for the whole run.
    """
    if cfg.scheme != "lax_friedrichs":
        raise ConfigError("the conservation-law solver supports lax_friedrichs only")
    if cfg.grid_n is not None and cfg.grid_n != v0.grid_n:
        raise ConfigError(f"config grid_n={cfg.grid_n} but the field has {v0.grid_n}")
    if H.dim != 1:
        raise ConfigError("flux must be one-dimensional")
    v = v0.values.copy()
    lo, hi = float(v.min()), float(v.max())
    alpha = flux_alpha(H, lo, hi)
    dx = v0.dx
    dt_max = math.inf if alpha == 0 else cfg.cfl_safety * dx / alpha
    mass0 = math.fsum(v)
    mass_scale = max(math.fsum(np.abs(v)), np.finfo(float).tiny)
    sup0 = max(abs(lo), abs(hi), np.finfo(float).tiny)
    rng = max(hi - lo, 0.0)
    t = float(v0.time)
    times = [t + s for s in cfg.snapshot_times()]
    out = [CellField1D(v.copy(), t, v0.length)]
    steps = 0
    for target in times[1:]:
        span = target - t
        nsteps = max(1, math.ceil(span / dt_max - 1e-9)) if math.isfinite(dt_max) else 1
        dt = span / nsteps
        if dt < 1e-14 * max(cfg.t_final, 1.0) or steps + nsteps > MAX_STEPS:
            raise CFLFailure(f"time step {dt:.3e} underflows ({nsteps} steps requested)")
        r = dt / dx
        for k in range(nsteps):
            F = _lf_flux(H, v, alpha)
            v = v - r * (F - np.roll(F, 1))
            steps += 1
            tk = t + (k + 1) * dt
            if not np.all(np.isfinite(v)) or np.max(np.abs(v)) > 10 * sup0:
                raise BlowUp(f"cell values exceeded 10x the initial sup-norm at t={tk:.6g}")
            if abs(math.fsum(v) - mass0) > MASS_RTOL * mass_scale:
                raise InvariantBreach(f"mass drift at t={tk:.6g}")
            if v.max() > hi + 1e-12 * (rng + sup0) or v.min() < lo - 1e-12 * (rng + sup0):
                raise InvariantBreach(f"monotone range violated at t={tk:.6g}")
            if step_callback is not None:
                step_callback(tk, v)
        t = target
        out.append(CellField1D(v.copy(), t, v0.length))
    return out


def central_gradient(u: SampledLine) -> np.ndarray:
    """``(u_{j+1} - u_{j-1}) / (2 dx)`` on the periodic node grid."""
    return (np.roll(u.values, -1) - np.roll(u.values, 1)) / (2 * u.spacing)


def duality_check(u_traj: Sequence[SampledLine], v_traj: Sequence[CellField1D]) -> np.ndarray:
    """L^1 distance per snapshot between the central difference of u and v."""
    if len(u_traj) != len(v_traj):
        raise GridMismatch("trajectories have different lengths")
    errs = []
    for u, v in zip(u_traj, v_traj):
        if u.count != v.grid_n or not np.isclose(u.length, v.length, rtol=1e-12):
            raise GridMismatch(f"grids differ: {u.count} nodes vs {v.grid_n} cells")
        if not np.isclose(u.time, v.time, rtol=1e-9, atol=1e-12):
            raise GridMismatch(f"times differ: {u.time} vs {v.time}")
        errs.append(float(np.sum(np.abs(central_gradient(u) - v.values)) * v.dx))
    return np.array(errs)


def nd2_check(H: Hamiltonian, I: float, width: float, tol: float) -> bool:
    """True when H deviates from its secant over ``[I - width, I + width]`` by more than ``tol``.

    A False answer means H looks affine on that neighbourhood of I at this
    sampling resolution (257 points).
    """
    if not width > 0:
        raise ValueError("width must be positive")
    s = np.linspace(I - width, I + width, ND2_SAMPLES)
    h = H(s)
    secant = h[0] + (h[-1] - h[0]) * (s - s[0]) / (s[-1] - s[0])
    return bool(np.max(np.abs(h - secant)) > tol)


def l1_norm(v: CellField1D, ref: float = 0.0) -> float:
    return float(np.sum(np.abs(v.values - ref)) * v.dx)


def shifted_cells(v: CellField1D, c: float) -> np.ndarray:
    """Cell values of ``y -> v(t, y + c t)`` by periodic linear interpolation."""
    xc = v.centres
    xp = np.concatenate([[xc[-1] - v.length], xc, [xc[0] + v.length]])
    fp = np.concatenate([[v.values[-1]], v.values, [v.values[0]]])
    return np.interp(np.mod(xc + c * v.time - xp[0], v.length) + xp[0], xp, fp)


def stabilization_series(traj: Sequence[CellField1D], c: float) -> np.ndarray:
    """L^1 distance between consecutive snapshots in the frame moving with speed c."""
    sh = [shifted_cells(v, c) for v in traj]
    dx = traj[0].dx
    return np.array([float(np.sum(np.abs(b - a)) * dx) for a, b in zip(sh[:-1], sh[1:])])
