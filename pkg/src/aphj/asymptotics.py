"""Long-time diagnostics: linear intervals, profiles, oscillation series and verdicts.

Also hosts the brute-force Hopf-Lax oracle for ``H = p^2 / 2`` that the solver
tests are pinned against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .apfunc import FrequencyVector, SampledLine, bohr_probe_sampled
from .errors import GridMismatch, NotConverged
from .freqmod import SpectrumModule, membership
from .hamiltonian import Hamiltonian

DETECT_SAMPLES = 1025
BISECTION_STEPS = 60
LIPSCHITZ_MAX_SAMPLES = 1024
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class LinearInterval:
    a: float
    b: float
    c: float
    degenerate: bool

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "degenerate": self.degenerate}


@dataclass
class DiagnosticsSeries:
    times: np.ndarray
    mins: np.ndarray
    maxs: np.ndarray
    l1ref: np.ndarray | None = None
    probes: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.mins = np.asarray(self.mins, dtype=float)
        self.maxs = np.asarray(self.maxs, dtype=float)
        n = self.times.size
        if self.mins.size != n or self.maxs.size != n:
            raise ValueError("series lengths differ")
        if self.l1ref is not None:
            self.l1ref = np.asarray(self.l1ref, dtype=float)
            if self.l1ref.size != n:
                raise ValueError("l1ref length differs from times")
        for k, v in self.probes.items():
            if len(v) != n:
                raise ValueError(f"probe {k} length differs from times")

    @property
    def osc(self) -> np.ndarray:
        return np.maximum(self.maxs - self.mins, 0.0)

    def __len__(self):
        return self.times.size

    def columns(self) -> tuple[list[str], list[np.ndarray]]:
        names = ["t", "min", "max", "osc"]
        cols = [self.times, self.mins, self.maxs, self.osc]
        if self.l1ref is not None:
            names.append("l1ref")
            cols.append(self.l1ref)
        for k in sorted(self.probes):
            names.append(f"probe_{k}")
            cols.append(np.asarray(self.probes[k], dtype=float))
        return names, cols

    def to_json(self) -> list[dict]:
        names, cols = self.columns()
        return [{n: float(c[i]) for n, c in zip(names, cols)} for i in range(len(self))]


@dataclass
class Profile:
    """Traveling-wave profile ``p = offset + shape`` with ``shape(0) = 0``.

    ``shape`` holds periodic samples on ``[0, length)``; ``offset`` is the
    limiting constant m_* and ``speed`` the wave speed c.
    """

    shape: SampledLine
    offset: float
    speed: float
    certificate: float = 0.0

    @property
    def length(self) -> float:
        return self.shape.length

    def full(self) -> SampledLine:
        return SampledLine(self.shape.length, self.shape.values + self.offset, True)

    def at(self, x) -> np.ndarray:
        return self.shape.interpolate(x) + self.offset


def _slope_ok(H: Hamiltonian, c: float, lo: float, hi: float, tol: float) -> bool:
    u = np.linspace(lo, hi, DETECT_SAMPLES)
    slope = (H(u + tol / 2) - H(u - tol / 2)) / tol
    return bool(np.max(np.abs(slope - c)) < tol)


def detect_linear_interval(H: Hamiltonian, search_radius: float, tol: float) -> LinearInterval:
    """Largest ``[a, b]`` around 0 on which the slope of H stays within ``tol`` of c.

    ``c`` is the symmetric secant slope at scale ``tol``. Flatness is judged
    on slopes (centred differences at scale ``tol``), which locates the
    endpoints to O(tol) for smooth extensions. Each endpoint is found by
    bisection up to ``search_radius``; the result is degenerate when neither
    side extends past ``tol``.
    """
    if not search_radius > 0 or not tol > 0:
        raise ValueError("search_radius and tol must be positive")
    c = float((H(tol / 2) - H(-tol / 2)) / tol)

    def reach(sign: float) -> float:
        def ok(r):
            lo, hi = (0.0, r) if sign > 0 else (-r, 0.0)
            return _slope_ok(H, c, lo, hi, tol)

        if ok(search_radius):
            return search_radius
        if not ok(tol / 2):
            return 0.0
        lo, hi = tol / 2, search_radius
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        return lo

    b = reach(1.0)
    a = -reach(-1.0)
    if b <= tol and a >= -tol:
        return LinearInterval(0.0, 0.0, c, True)
    return LinearInterval(a, b, c, False)


def hopf_lax_oracle(
    u0: SampledLine | Callable,
    t: float,
    x,
    period: float | None = None,
    refine: int = 8,
    resolution: int | None = None,
    chunk: int = 256,
) -> np.ndarray:
    """``min_y u0(y) + (x - y)^2 / (2t)`` by exhaustive search (``H = p^2 / 2``).

    The y-grid has ``refine`` times the sample density of ``u0`` (or of
    ``resolution`` samples per period for a callable ``u0``) and spans
    ``|y - x| <= sqrt(2 t osc(u0)) + period``.
    """
    if not t > 0:
        raise ValueError("Hopf-Lax oracle needs t > 0")
    if refine < 8:
        raise ValueError("refine must be >= 8")
    if isinstance(u0, SampledLine):
        if not u0.periodic:
            raise ValueError("oracle needs periodic data")
        period = u0.length
        fn = u0.interpolate
        base = u0.count
        osc = float(u0.values.max() - u0.values.min())
    else:
        if period is None or resolution is None:
            raise ValueError("callable data needs period and resolution")
        fn = u0
        base = resolution
        probe = np.asarray(fn(np.linspace(0.0, period, 8 * base, endpoint=False)), dtype=float)
        osc = float(probe.max() - probe.min())
    h = period / (base * refine)
    half = math.sqrt(2.0 * t * osc) + period
    nw = int(math.ceil(half / h))
    offsets = np.arange(-nw, nw + 1) * h
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    # u0 is periodic, so tabulate one period and index into it
    ny = base * refine
    table = np.asarray(fn(np.arange(ny) * h), dtype=float)
    out = np.empty(xs.size)
    for s in range(0, xs.size, chunk):
        xc = xs[s : s + chunk]
        # snap each x to the fine grid so table lookups are exact
        j0 = np.floor(xc / h).astype(np.int64)
        r = xc - j0 * h
        idx = (j0[:, None] + np.arange(-nw, nw + 1)[None, :]) % ny
        d = offsets[None, :] - r[:, None]
        vals = table[idx] + d**2 / (2.0 * t)
        out[s : s + chunk] = vals.min(axis=1)
    return out if np.ndim(x) else out[0]


def _values_of(snap) -> np.ndarray:
    return np.asarray(snap.values, dtype=float)


def oscillation_series(
    traj: Sequence,
    profile: Profile | None = None,
    reference: Sequence | None = None,
    probes: dict[str, Callable[[SampledLine], float]] | None = None,
) -> DiagnosticsSeries:
    """min/max of ``u(t, x) - p(x - ct)`` per snapshot (raw min/max without a profile).

    ``reference`` (one SampledLine per snapshot) adds an L^1 column;
    ``probes`` maps a column label to a callable evaluated per snapshot.
    """
    if not traj:
        raise ValueError("empty trajectory")
    shape0 = _values_of(traj[0]).shape
    times, mins, maxs, l1 = [], [], [], []
    cols: dict[str, list] = {k: [] for k in (probes or {})}
    for i, snap in enumerate(traj):
        vals = _values_of(snap)
        if vals.shape != shape0:
            raise GridMismatch("snapshots have different grids")
        if profile is not None:
            if not isinstance(snap, SampledLine):
                raise TypeError("profile comparison needs SampledLine snapshots")
            if not np.isclose(snap.length, profile.length, rtol=1e-12):
                raise GridMismatch("profile period differs from the snapshot domain")
            vals = vals - profile.at(snap.x - profile.speed * snap.time)
        times.append(float(snap.time))
        mins.append(float(vals.min()))
        maxs.append(float(vals.max()))
        if reference is not None:
            ref = reference[i]
            if ref.values.shape != snap.values.shape:
                raise GridMismatch("reference grid differs")
            l1.append(float(np.mean(np.abs(snap.values - ref.values)) * getattr(snap, "length", 1.0)))
        for k, fn in (probes or {}).items():
            cols[k].append(float(fn(snap)))
    return DiagnosticsSeries(
        times, mins, maxs,
        l1ref=np.array(l1) if reference is not None else None,
        probes={k: np.array(v) for k, v in cols.items()},
    )


def shifted(snap: SampledLine, c: float) -> np.ndarray:
    """Samples of ``y -> u(t, y + c t)`` on the snapshot grid."""
    return snap.interpolate(snap.x + c * snap.time)


def extract_profile(traj: Sequence[SampledLine], c: float, threshold: float) -> Profile:
    """Average the late snapshots in the frame moving with speed ``c``.

    The certificate is the largest pointwise disagreement among the shifted
    snapshots. The offset m_* is the mean over snapshots of ``(m + M) / 2``
    against the normalised shape.
    """
    if len(traj) < 2:
        raise ValueError("extract_profile needs at least two snapshots")
    if not math.isfinite(c):
        raise ValueError("speed must be finite")
    L, n = traj[0].length, traj[0].count
    for s in traj:
        if s.count != n or not np.isclose(s.length, L, rtol=1e-12):
            raise GridMismatch("snapshots have different grids")
    stack = np.stack([shifted(s, c) for s in traj])
    cert = float(np.max(stack.max(axis=0) - stack.min(axis=0)))
    if cert > threshold:
        raise NotConverged(f"shifted snapshots disagree by {cert:.3e} > {threshold:.3e}")
    mean = stack.mean(axis=0)
    shape = SampledLine(L, mean - mean[0], True)
    diffs = stack - shape.values[None, :]
    offset = float(np.mean(0.5 * (diffs.min(axis=1) + diffs.max(axis=1))))
    return Profile(shape, offset, float(c), cert)


def one_sided_lipschitz_check(p: Profile | SampledLine, a: float, b: float, tol: float) -> bool:
    """``a (y2 - y1) - tol <= p(y2) - p(y1) <= b (y2 - y1) + tol`` for all sample pairs.

    Pairs run over ``y1 < y2 < y1 + period`` using the periodic extension;
    lines longer than 1024 samples are decimated first.
    """
    if not a <= 0 <= b:
        raise ValueError("need a <= 0 <= b")
    line = p.full() if isinstance(p, Profile) else p
    vals, L = line.values, line.length
    n = vals.size
    if n > LIPSCHITZ_MAX_SAMPLES:
        idx = np.unique(np.floor(np.arange(LIPSCHITZ_MAX_SAMPLES) * (n / LIPSCHITZ_MAX_SAMPLES)).astype(int))
    else:
        idx = np.arange(n)
    x = idx * line.spacing
    v = vals[idx]
    k = idx.size
    for d in range(1, k):
        j = np.arange(k) + d
        wrap = j >= k
        jj = j % k
        dy = x[jj] - x + wrap * L
        dv = v[jj] - v
        if np.any(dv > b * dy + tol) or np.any(dv < a * dy - tol):
            return False
    return True


def decay_verdict(series: DiagnosticsSeries, threshold: float) -> dict:
    if len(series) == 0:
        raise ValueError("empty series")
    osc = series.osc
    first, last = float(osc[0]), float(osc[-1])
    if first == 0.0:
        ratio = 0.0 if last == 0.0 else math.inf
    else:
        ratio = last / first
    steps = np.diff(osc)
    violations = int(np.sum(steps > MONOTONE_SLACK * max(first, 1.0)))
    return {
        "final_oscillation": last,
        "initial_oscillation": first,
        "ratio": ratio,
        "monotonicity_violations": violations,
        "threshold": threshold,
        "pass": bool(ratio <= threshold and violations == 0),
    }


def _freq_value(M: SpectrumModule, f: FrequencyVector) -> float:
    if f.regime == "rational":
        return float(f.value()[0])
    return float(f.value(M.declared)[0])


def _rational_gap(M: SpectrumModule, f: FrequencyVector) -> float | None:
    """Distance from a rational frequency to a rank-1 rational module (exact)."""
    if M.regime != "rational" or M.rank != 1 or M.dim != 1 or f.regime != "rational":
        return None
    step = M.basis[0][0]
    q = f.coords[0] / step
    r = q - math.floor(q)
    return float(min(r, 1 - r) * abs(step))


def spectrum_containment_probe(
    u: SampledLine,
    M: SpectrumModule,
    in_probes: Sequence[FrequencyVector],
    out_probes: Sequence[FrequencyVector],
    window: float,
    bound: float,
    in_bound: float | None = None,
) -> dict:
    """Probe ``u`` at module and non-module frequencies.

    Passes iff every out-probe magnitude is below ``bound`` and at least one
    in-probe exceeds ``in_bound`` (default ``bound``). When nothing exceeds
    the bound and ``osc(u) <= bound`` the verdict is ``"degenerate pass"``.
    For a rank-1 rational module the exact gap to the module is used as the
    window guard of the probe.
    """
    in_bound = bound if in_bound is None else in_bound
    for f in out_probes:
        if membership(M, f):
            raise ValueError(f"out-probe {f!r} lies in the module")
    for f in in_probes:
        if not membership(M, f):
            raise ValueError(f"in-probe {f!r} is not in the module")
    rows = []
    for kind, group in (("in", in_probes), ("out", out_probes)):
        for f in group:
            lam = _freq_value(M, f)
            gap = _rational_gap(M, f) if kind == "out" else None
            mag = abs(bohr_probe_sampled(u, lam, window, gap=gap))
            rows.append({"kind": kind, "lambda": lam, "magnitude": mag, "freq": f.to_json()})
    outs = [r["magnitude"] for r in rows if r["kind"] == "out"]
    ins = [r["magnitude"] for r in rows if r["kind"] == "in"]
    out_ok = all(m < bound for m in outs)
    in_ok = any(m > in_bound for m in ins)
    osc = float(u.values.max() - u.values.min())
    if out_ok and in_ok:
        status = "pass"
    elif out_ok and osc <= bound:
        status = "degenerate pass"
    else:
        status = "fail"
    return {
        "probes": rows,
        "window": window,
        "bound": bound,
        "in_bound": in_bound,
        "out_ok": out_ok,
        "in_ok": in_ok,
        "status": status,
    }
