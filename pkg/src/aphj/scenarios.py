"""Named reproduction scenarios and their config resolution.

A scenario is a default config plus a runner. User configs are deep-merged
over the defaults (``initial``, ``hamiltonian`` and ``module`` are replaced
wholesale), then ``--override`` entries are applied, then every section is
validated before any compute starts.
"""

from __future__ import annotations

import copy
import json
import math
import random
import time
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from . import asymptotics as asy
from .apfunc import FrequencyVector, SampledLine, TrigPoly, bohr_probe_sampled, evaluate
from .conslaw import (
    CellField1D,
    discrete_mean,
    duality_check,
    l1_norm,
    solve_cl_1d,
    stabilization_series,
)
from .errors import ConfigError, InvariantBreach
from .freqmod import (
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
from .hamiltonian import Hamiltonian
from .hjsolve import (
    SolveConfig,
    default_gradient_box,
    lift_initial,
    solve_direct_1d,
    solve_lifted,
    trace_back,
)
from .torus import TorusField

SQRT2 = math.sqrt(2.0)
TOP_LEVEL = ("scenario", "initial", "hamiltonian", "module", "solve", "diagnostics", "output")
WHOLESALE = ("initial", "hamiltonian", "module")
SNAPSHOT_MODES = ("all", "final", "none")


@dataclass
class ScenarioConfig:
    scenario: str
    initial: dict | None = None
    hamiltonian: dict | None = None
    module: dict | None = None
    solve: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def solve_config(self, **changes) -> SolveConfig:
        return SolveConfig.from_dict({**self.solve, **changes})


@dataclass
class ScenarioResult:
    scenario: str
    verdict: dict
    thresholds: dict
    params: dict = field(default_factory=dict)
    series: asy.DiagnosticsSeries | None = None
    snapshots: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.verdict.get("pass", False))


@dataclass
class Scenario:
    name: str
    anchor: str
    summary: str
    defaults: dict
    runner: Callable[[ScenarioConfig], ScenarioResult]


REGISTRY: dict[str, Scenario] = {}


def scenario(name: str, anchor: str, summary: str, defaults: dict):
    def deco(fn):
        base = {"initial": None, "hamiltonian": None, "module": None, "solve": {},
                "diagnostics": {}, "output": {"snapshots": "all"}}
        base.update(copy.deepcopy(defaults))
        base["output"] = {"snapshots": "all", **base["output"]}
        REGISTRY[name] = Scenario(name, anchor, summary, base, fn)
        return fn

    return deco


# --- config resolution ---------------------------------------------------------


def _deep_merge(base: dict, top: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in top.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in WHOLESALE:
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_override(item: str) -> tuple[list[str], object]:
    if "=" not in item:
        raise ConfigError(f"override {item!r} must look like key.path=value")
    key, raw = item.split("=", 1)
    path = [p for p in key.strip().split(".") if p]
    if not path:
        raise ConfigError(f"override {item!r} has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_override(cfg: dict, path: list[str], value) -> None:
    if path[0] not in TOP_LEVEL:
        raise ConfigError(f"unknown config key {path[0]!r}")
    node = cfg
    for p in path[:-1]:
        if node.get(p) is None:
            node[p] = {}
        if not isinstance(node[p], dict):
            raise ConfigError(f"cannot override inside non-object key {p!r}")
        node = node[p]
    node[path[-1]] = value


def resolve_config(raw: dict, overrides: list[str] | None = None) -> ScenarioConfig:
    """Merge ``raw`` over the scenario defaults, apply overrides and validate."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(TOP_LEVEL)
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    name = raw.get("scenario")
    parsed = [parse_override(o) for o in overrides or []]
    for path, value in parsed:
        if path == ["scenario"]:
            name = value
    if name not in REGISTRY:
        raise ConfigError(f"unknown scenario {name!r}; see 'aphj list'")
    sc = REGISTRY[name]
    merged = _deep_merge(sc.defaults, {k: v for k, v in raw.items() if k != "scenario"})
    merged["scenario"] = name
    for path, value in parsed:
        apply_override(merged, path, value)
    for sect in ("solve", "diagnostics", "output"):
        if not isinstance(merged.get(sect), dict):
            raise ConfigError(f"section {sect!r} must be an object")
        extra = set(merged[sect]) - set(sc.defaults[sect]) - ({"dir"} if sect == "output" else set())
        if extra:
            raise ConfigError(f"unknown {sect} keys {sorted(extra)} for scenario {name!r}")
    if merged["output"].get("snapshots") not in SNAPSHOT_MODES:
        raise ConfigError(f"output.snapshots must be one of {SNAPSHOT_MODES}")
    cfg = ScenarioConfig(**merged)
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig) -> None:
    """Build every typed object once so that config errors surface before compute."""
    if cfg.solve:
        cfg.solve_config()
    if cfg.hamiltonian is not None:
        build_hamiltonian(cfg.hamiltonian)
    if cfg.initial is not None:
        init = build_initial(cfg.initial)
        if cfg.module is not None and isinstance(init, TrigPoly):
            mod = build_module(cfg.module, init)
            for f in init.terms:
                if not membership(mod, f):
                    raise ConfigError(f"initial frequency {f!r} is not in the configured module")


def _args(spec: dict, allowed: set, where: str) -> None:
    extra = set(spec) - allowed
    if extra:
        raise ConfigError(f"unknown {where} keys {sorted(extra)}")


def _parse_freq(v) -> Fraction:
    try:
        return Fraction(str(v)) if not isinstance(v, (int, Fraction)) else Fraction(v)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"bad frequency {v!r}") from None


def build_initial(spec: dict):
    """TrigPoly (``modes`` or ``trigpoly``) or SampledLine (``samples``)."""
    if not isinstance(spec, dict) or len(spec.keys() & {"modes", "trigpoly", "samples"}) != 1:
        raise ConfigError("initial needs exactly one of 'modes', 'trigpoly', 'samples'")
    try:
        if "trigpoly" in spec:
            _args(spec, {"trigpoly"}, "initial")
            return TrigPoly.from_json(spec["trigpoly"])
        if "samples" in spec:
            _args(spec, {"samples", "periodic"}, "initial")
            return SampledLine.from_csv(spec["samples"], periodic=spec.get("periodic", True))
        _args(spec, {"modes", "constant", "basis"}, "initial")
        basis = spec.get("basis")
        poly = TrigPoly.constant(float(spec.get("constant", 0.0)), 1, basis)
        for m in spec["modes"]:
            _args(m, {"kind", "amp", "freq", "k"}, "initial mode")
            kind = m.get("kind", "sin")
            if kind not in ("sin", "cos"):
                raise ConfigError(f"mode kind must be sin or cos, got {kind!r}")
            if "k" in m:
                f = FrequencyVector.over_basis(*m["k"])
            else:
                f = FrequencyVector(coords=(_parse_freq(m["freq"]),))
            term = getattr(TrigPoly, kind)(f, float(m.get("amp", 1.0)), 1, basis)
            poly = poly + term
        return poly
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad initial spec: {exc}") from None


def build_hamiltonian(spec: dict) -> Hamiltonian:
    if not isinstance(spec, dict):
        raise ConfigError("hamiltonian must be an object with a 'family'")
    try:
        return Hamiltonian.from_spec(spec)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad hamiltonian spec: {exc}") from None


def build_module(spec: dict | None, poly: TrigPoly | None = None) -> SpectrumModule:
    """``{"rational": [...]}``, ``{"declared": [...]}`` or ``{"from": "initial"}``."""
    if spec is None or spec == {"from": "initial"}:
        if poly is None:
            raise ConfigError("module from initial data needs a trigonometric polynomial")
        return module_of(poly)
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError("module needs exactly one of 'rational', 'declared', 'from'")
    if "rational" in spec:
        gens = [FrequencyVector(coords=(_parse_freq(g),)) for g in spec["rational"]]
        return module_basis_rational(gens)
    if "declared" in spec:
        return declared_module([float(b) for b in spec["declared"]])
    raise ConfigError(f"unknown module spec {spec!r}")


def lift_problem(poly: TrigPoly, mod: SpectrumModule, grid_n: int) -> tuple[TorusField, np.ndarray]:
    """Torus data and the Lambda column for a one-dimensional TrigPoly."""
    v0 = lift_initial(poly, mod, grid_n)
    if mod.rank == 0:
        return v0, np.array([[1.0]])
    return v0, mod.basis_matrix()


def _poly_fn(poly) -> Callable:
    if isinstance(poly, SampledLine):
        return poly.interpolate
    return lambda x: np.asarray(evaluate(poly, np.asarray(x, dtype=float)), dtype=float)


def _modes(*items) -> dict:
    return {"modes": [dict(i) for i in items]}


# --- scenarios -------------------------------------------------------------------


@scenario(
    "constant-sanity", "Lemma lem1 / Eq. (1d1)",
    "u0 = 3 under H = p^2/2 stays identically 3",
    {
        "initial": {"modes": [], "constant": 3.0},
        "hamiltonian": {"family": "quadratic", "scale": 1.0},
        "solve": {"grid_n": 64, "t_final": 1.0, "snapshot_cadence": 0.25},
        "diagnostics": {"tolerance": 0.0},
    },
)
def _constant_sanity(cfg: ScenarioConfig) -> ScenarioResult:
    poly = build_initial(cfg.initial)
    H = build_hamiltonian(cfg.hamiltonian)
    scfg = cfg.solve_config()
    v0, lam = lift_problem(poly, build_module(cfg.module, poly), scfg.grid_n)
    snaps = solve_lifted(v0, H, lam, scfg)
    const = float(cfg.initial.get("constant", 0.0))
    dev = max(float(np.max(np.abs(s.values - const))) for s in snaps)
    tol = cfg.diagnostics["tolerance"]
    return ScenarioResult(
        cfg.scenario,
        {"max_deviation": dev, "pass": dev <= tol},
        {"tolerance": tol},
        {"steps": snaps[-1].meta.get("steps", 0)},
        asy.oscillation_series(snaps),
        [("u", s) for s in snaps],
    )


@scenario(
    "transport-exact", "Eq. (1d1), H = c p",
    "linear H transports sin(2 pi x) at speed c (scheme error bound)",
    {
        "initial": _modes({"kind": "sin", "amp": 1.0, "freq": 1}),
        "hamiltonian": {"family": "linear", "c": [1.0]},
        "solve": {"grid_n": 400, "t_final": 0.5, "snapshot_cadence": 0.1},
        "diagnostics": {"linf_threshold": 0.05},
    },
)
def _transport_exact(cfg: ScenarioConfig) -> ScenarioResult:
    poly = build_initial(cfg.initial)
    H = build_hamiltonian(cfg.hamiltonian)
    if H.kind != "linear":
        raise ConfigError("transport-exact needs a linear hamiltonian")
    c = float(H.params["c"][0])
    scfg = cfg.solve_config()
    fn = _poly_fn(poly)
    u0 = SampledLine.from_function(fn, 1.0, scfg.grid_n)
    traj = solve_direct_1d(u0, H, scfg)
    exact = [SampledLine.from_function(lambda x, t=s.time: fn(x - c * t), 1.0, scfg.grid_n) for s in traj]
    errs = [float(np.max(np.abs(s.values - e.values))) for s, e in zip(traj, exact)]
    thr = cfg.diagnostics["linf_threshold"]
    return ScenarioResult(
        cfg.scenario,
        {"linf_error": max(errs), "pass": max(errs) <= thr},
        {"linf_threshold": thr},
        {"speed": c, "linf_per_snapshot": errs},
        asy.oscillation_series(traj, reference=exact),
        [("u", s) for s in traj],
    )


def _hopf_lax_run(poly: TrigPoly, H: Hamiltonian, scfg: SolveConfig, refine: int):
    fn = _poly_fn(poly)
    u0 = SampledLine.from_function(fn, 1.0, scfg.grid_n)
    traj = solve_direct_1d(u0, H, scfg)
    oracle = []
    for s in traj:
        if s.time == 0:
            oracle.append(u0)
        else:
            vals = asy.hopf_lax_oracle(fn, s.time, s.x, period=1.0, refine=refine, resolution=scfg.grid_n)
            oracle.append(SampledLine(1.0, vals, True, s.time))
    err = float(np.max(np.abs(traj[-1].values - oracle[-1].values)))
    return traj, oracle, err


@scenario(
    "burgers-hopf-lax", "Eq. (1d1) vs Hopf-Lax",
    "H = p^2/2 against the brute-force Hopf-Lax oracle, first-order convergence",
    {
        "initial": _modes({"kind": "sin", "amp": 1 / (2 * math.pi), "freq": 1}),
        "hamiltonian": {"family": "quadratic", "scale": 1.0},
        "solve": {"grid_n": 800, "t_final": 0.5, "snapshot_cadence": 0.1},
        "diagnostics": {
            "coarse_grid_n": 400, "oracle_refine": 8, "linf_threshold": 0.02,
            "halving_tolerance": 0.3, "runtime_limit_s": 30.0,
        },
    },
)
def _burgers_hopf_lax(cfg: ScenarioConfig) -> ScenarioResult:
    poly = build_initial(cfg.initial)
    H = build_hamiltonian(cfg.hamiltonian)
    if not (H.kind == "quadratic" and H.params.get("scale", 1.0) == 1.0 and "shift" not in H.params):
        raise ConfigError("the Hopf-Lax oracle is pinned to H = p^2/2")
    d = cfg.diagnostics
    scfg = cfg.solve_config()
    t0 = time.perf_counter()
    traj, oracle, err = _hopf_lax_run(poly, H, scfg, d["oracle_refine"])
    elapsed = time.perf_counter() - t0
    coarse = replace(scfg, grid_n=d["coarse_grid_n"])
    _, _, err_c = _hopf_lax_run(poly, H, coarse, d["oracle_refine"])
    ratio = err_c / err if err > 0 else math.inf
    tol = d["halving_tolerance"]
    ratio_ok = 2 * (1 - tol) <= ratio <= 2 * (1 + tol)
    verdict = {
        "linf_error": err,
        "linf_error_coarse": err_c,
        "halving_ratio": ratio,
        "runtime_ok": elapsed < d["runtime_limit_s"],
        "pass": err <= d["linf_threshold"] and ratio_ok and elapsed < d["runtime_limit_s"],
    }
    return ScenarioResult(
        cfg.scenario, verdict,
        {"linf_threshold": d["linf_threshold"], "halving_tolerance": tol, "runtime_limit_s": d["runtime_limit_s"]},
        {"grid_n": scfg.grid_n, "coarse_grid_n": coarse.grid_n},
        asy.oscillation_series(traj, reference=oracle),
        [("u", s) for s in traj],
    )


def random_trig_poly(rng: random.Random, max_freq: int, amp: float) -> TrigPoly:
    poly = TrigPoly.constant(rng.uniform(-amp, amp))
    for k in range(1, max_freq + 1):
        f = FrequencyVector.rational(k)
        poly = poly + TrigPoly.sin(f, rng.uniform(-amp, amp) / k) + TrigPoly.cos(f, rng.uniform(-amp, amp) / k)
    return poly


class _Recorder:
    """Collects per-step solution arrays from the solver callback."""

    def __init__(self):
        self.times: list[float] = []
        self.values: list[np.ndarray] = []

    def __call__(self, t, v):
        self.times.append(t)
        self.values.append(np.array(v, copy=True))


def _paired_solve(a: TorusField, b: TorusField, H, lam, scfg: SolveConfig, box_factor: float):
    """Solve both with a common gradient box so they share alpha and dt step for step."""
    box = np.maximum(default_gradient_box(a, box_factor), default_gradient_box(b, box_factor))
    common = replace(scfg, gradient_box=box.tolist(), adaptive_box=False)
    ra, rb = _Recorder(), _Recorder()
    solve_lifted(a, H, lam, common, ra)
    solve_lifted(b, H, lam, common, rb)
    if ra.times != rb.times:
        raise InvariantBreach("paired solves took different time steps")
    return np.stack([a.values] + ra.values), np.stack([b.values] + rb.values), np.array([0.0] + ra.times)


def _monotone_violations(series: np.ndarray, sign: float, slack: float) -> int:
    """Steps where ``sign * series`` increases by more than ``slack``."""
    return int(np.sum(sign * np.diff(series) > slack))


@scenario(
    "contraction-suite", "Theorem th1 / Corollary cor1",
    "seeded random pairs: sup-contraction, ordering and max principle at every step",
    {
        "hamiltonian": {"family": "quadratic", "scale": 1.0},
        "solve": {"grid_n": 200, "t_final": 1.0},
        "diagnostics": {"pairs": 20, "seed": 20240601, "max_freq": 4, "amplitude": 0.3, "slack": 1e-12},
        "output": {"snapshots": "none"},
    },
)
def _contraction_suite(cfg: ScenarioConfig) -> ScenarioResult:
    H = build_hamiltonian(cfg.hamiltonian)
    d = cfg.diagnostics
    scfg = cfg.solve_config()
    rng = random.Random(d["seed"])
    M = module_basis_rational([FrequencyVector.rational(1)])
    lam = M.basis_matrix()
    slack = d["slack"]
    rows = []
    totals = {"contraction": 0, "ordering": 0, "max_principle": 0}
    for i in range(d["pairs"]):
        pa = random_trig_poly(rng, d["max_freq"], d["amplitude"])
        pb = random_trig_poly(rng, d["max_freq"], d["amplitude"])
        bump = random_trig_poly(rng, d["max_freq"], d["amplitude"])
        a = lift_initial(pa, M, scfg.grid_n)
        b = lift_initial(pb, M, scfg.grid_n)
        # c >= a + gap pointwise, with the gap strictly positive
        braw = lift_initial(bump, M, scfg.grid_n).values
        gap = braw - braw.min() + 0.05
        c = TorusField(a.values + gap)
        va, vb, _ = _paired_solve(a, b, H, lam, scfg, scfg.box_factor)
        wa, wc, _ = _paired_solve(a, c, H, lam, scfg, scfg.box_factor)
        sup = np.max(np.abs(va - vb), axis=1)
        n_con = _monotone_violations(sup, 1.0, slack)
        n_ord = int(np.sum(np.min(wc - wa, axis=1) < 0.0))
        n_max = 0
        for traj in (va, vb, wc):
            n_max += _monotone_violations(traj.max(axis=1), 1.0, slack)
            n_max += _monotone_violations(traj.min(axis=1), -1.0, slack)
        totals["contraction"] += n_con
        totals["ordering"] += n_ord
        totals["max_principle"] += n_max
        rows.append({"pair": i, "steps": int(sup.size - 1), "sup0": float(sup[0]), "sup_final": float(sup[-1]),
                     "contraction_violations": n_con, "ordering_violations": n_ord,
                     "max_principle_violations": n_max})
    verdict = {
        "contraction_violations": totals["contraction"],
        "ordering_violations": totals["ordering"],
        "max_principle_violations": totals["max_principle"],
        "pass": all(v == 0 for v in totals.values()),
    }
    return ScenarioResult(cfg.scenario, verdict, {"slack": slack, "ordering": "exact"}, {"pairs": rows})


@scenario(
    "mass-conservation", "Eq. (mass)",
    "conservation-law runs keep the discrete mean fixed at every step",
    {
        "solve": {"grid_n": 400, "t_final": 2.0, "snapshot_cadence": 0.5},
        "diagnostics": {
            "fluxes": [{"family": "quadratic", "scale": 1.0},
                       {"family": "plateau", "a": -0.3, "b": 0.3, "c": 1.0, "extension": "cubic"}],
            "runs_per_flux": 3, "seed": 7, "rtol": 1e-12,
        },
    },
)
def _mass_conservation(cfg: ScenarioConfig) -> ScenarioResult:
    d = cfg.diagnostics
    scfg = cfg.solve_config()
    rng = random.Random(d["seed"])
    rows, snaps = [], []
    worst = 0.0
    for fi, fspec in enumerate(d["fluxes"]):
        H = build_hamiltonian(fspec)
        for r in range(d["runs_per_flux"]):
            poly = random_trig_poly(rng, 3, 0.2)
            mean_shift = rng.uniform(-0.5, 0.5)
            v0 = CellField1D.from_averages_of_derivative(_poly_fn(poly), scfg.grid_n)
            v0 = CellField1D(v0.values + mean_shift)
            m0 = discrete_mean(v0)
            scale = max(abs(m0), float(np.mean(np.abs(v0.values))))
            drift = [0.0]

            def watch(t, v, m0=m0, scale=scale, drift=drift):
                drift[0] = max(drift[0], abs(math.fsum(v) / v.size - m0) / scale)

            traj = solve_cl_1d(v0, H, scfg, watch)
            worst = max(worst, drift[0])
            rows.append({"flux": fspec["family"], "run": r, "mean0": m0, "max_relative_drift": drift[0]})
            snaps += [(f"v_{fi}_{r}", s) for s in traj]
    verdict = {"max_relative_drift": worst, "pass": worst <= d["rtol"]}
    return ScenarioResult(cfg.scenario, verdict, {"rtol": d["rtol"]}, {"runs": rows}, None, snaps)


@scenario(
    "duality-burgers", "Section 3.1, v = u_x",
    "HJ solve and conservation-law solve agree through v = u_x (Burgers)",
    {
        "initial": _modes({"kind": "sin", "amp": 1 / (2 * math.pi), "freq": 1}),
        "hamiltonian": {"family": "quadratic", "scale": 1.0},
        "solve": {"grid_n": 800, "t_final": 0.5, "snapshot_cadence": 0.1},
        "diagnostics": {"l1_threshold": 0.05},
    },
)
def _duality_burgers(cfg: ScenarioConfig) -> ScenarioResult:
    poly = build_initial(cfg.initial)
    H = build_hamiltonian(cfg.hamiltonian)
    scfg = cfg.solve_config()
    fn = _poly_fn(poly)
    u_traj = solve_direct_1d(SampledLine.from_function(fn, 1.0, scfg.grid_n), H, scfg)
    v_traj = solve_cl_1d(CellField1D.from_averages_of_derivative(fn, scfg.grid_n), H, scfg)
    errs = duality_check(u_traj, v_traj)
    thr = cfg.diagnostics["l1_threshold"]
    series = asy.DiagnosticsSeries(
        [v.time for v in v_traj], [v.values.min() for v in v_traj], [v.values.max() for v in v_traj], l1ref=errs,
    )
    return ScenarioResult(
        cfg.scenario, {"max_l1_error": float(errs.max()), "pass": bool(errs.max() <= thr)},
        {"l1_threshold": thr}, {"l1_per_snapshot": errs.tolist()}, series,
        [("u", s) for s in u_traj] + [("v", s) for s in v_traj],
    )


def periodic_tiles(line: SampledLine, copies: int) -> SampledLine:
    """The periodic extension of ``line`` over ``copies`` periods."""
    return SampledLine(line.length * copies, np.tile(line.values, copies), True, line.time)


@scenario(
    "spectrum-containment-ap", "Theorem th2",
    "Sp(u(t)) stays in the module of u0: Bohr probes plus lifted-vs-direct agreement",
    {
        "initial": _modes({"kind": "sin", "amp": 1.0, "freq": 1}, {"kind": "sin", "amp": 0.5, "freq": "99/70"}),
        "hamiltonian": {"family": "quadratic", "scale": 1.0},
        "module": {"from": "initial"},
        "solve": {"scheme": "upwind", "t_final": 1.0},
        "diagnostics": {
            "samples_per_unit": 64, "window_periods": 4,
            "in_probes": ["1", "99/70"], "out_probes": ["71/140", "141/140", "197/140"],
            "out_bound": 5e-3, "in_bound": 0.1,
            "lifted_basis": [1.0, SQRT2], "lifted_modes": [[1, [1, 0]], [0.5, [0, 1]]],
            "lifted_grid_n": 256, "compare_range": 10.0, "agreement_threshold": 0.05,
        },
        "output": {"snapshots": "final"},
    },
)
def _spectrum_containment(cfg: ScenarioConfig) -> ScenarioResult:
    d = cfg.diagnostics
    poly = build_initial(cfg.initial)
    H = build_hamiltonian(cfg.hamiltonian)
    mod = build_module(cfg.module, poly)
    if mod.regime != "rational" or mod.rank != 1:
        raise ConfigError("direct solve needs a rank-1 rational module")
    period = float(1 / mod.basis[0][0])
    count = int(round(d["samples_per_unit"] * period))
    scfg = cfg.solve_config(grid_n=count)
    u0 = SampledLine.from_function(_poly_fn(poly), period, count)
    direct = solve_direct_1d(u0, H, scfg)
    u_t = direct[-1]
    tiled = periodic_tiles(u_t, d["window_periods"])
    fv = lambda s: FrequencyVector(coords=(_parse_freq(s),))
    probe = asy.spectrum_containment_probe(
        tiled, mod, [fv(s) for s in d["in_probes"]], [fv(s) for s in d["out_probes"]],
        window=tiled.length, bound=d["out_bound"], in_bound=d["in_bound"],
    )
    # lifted solve on T^2 with the irrational basis, traced back onto the direct grid
    basis = d["lifted_basis"]
    lifted_poly = TrigPoly.constant(0.0, 1, basis)
    for amp, k in d["lifted_modes"]:
        lifted_poly = lifted_poly + TrigPoly.sin(FrequencyVector.over_basis(*k), amp, 1, basis)
    lmod = declared_module(basis)
    lcfg = cfg.solve_config(grid_n=d["lifted_grid_n"])
    v0, lam = lift_problem(lifted_poly, lmod, lcfg.grid_n)
    lifted = solve_lifted(v0, H, lam, lcfg)
    n_cmp = int(round(d["compare_range"] / u_t.spacing))
    xs = u_t.x[:n_cmp + 1]
    traced = trace_back(lifted[-1], lam, xs)
    agreement = float(np.max(np.abs(traced.values - u_t.values[:n_cmp + 1])))
    # informational: Bohr probes of the traced-back lifted solution over the same window
    n_win = int(round(tiled.length / u_t.spacing))
    long_line = trace_back(lifted[-1], lam, (tiled.length * (n_win + 1) / n_win, n_win + 1))
    lifted_probes = {s: abs(bohr_probe_sampled(long_line, float(_parse_freq(s)), tiled.length))
                     for s in d["in_probes"] + d["out_probes"]}
    out_mags = [p["magnitude"] for p in probe["probes"] if p["kind"] == "out"]
    in_mags = [p["magnitude"] for p in probe["probes"] if p["kind"] == "in"]
    verdict = {
        "out_probes_ok": probe["out_ok"],
        "in_probe_ok": probe["in_ok"],
        "max_out_magnitude": max(out_mags),
        "max_in_magnitude": max(in_mags),
        "lifted_agreement": agreement,
        "lifted_ok": agreement <= d["agreement_threshold"],
        "probe_status": probe["status"],
    }
    verdict["pass"] = bool(probe["status"] == "pass" and verdict["lifted_ok"])
    params = {
        "module_basis": [str(mod.basis[0][0])], "period": period, "samples": count,
        "probe_window": tiled.length, "probes": probe["probes"],
        "lifted_steps": lifted[-1].meta.get("steps"), "lifted_probes": lifted_probes, "direct_samples_per_unit": d["samples_per_unit"],
    }
    return ScenarioResult(
        cfg.scenario, verdict,
        {"out_bound": d["out_bound"], "in_bound": d["in_bound"], "agreement_threshold": d["agreement_threshold"]},
        params, asy.oscillation_series(direct),
        [("direct", s) for s in direct] + [("lifted", s) for s in lifted],
    )


class _TorusExtremaWatch:
    def __init__(self, v0: np.ndarray):
        self.maxs = [float(v0.max())]
        self.mins = [float(v0.min())]

    def __call__(self, t, v):
        self.maxs.append(float(v.max()))
        self.mins.append(float(v.min()))


@scenario(
    "decay-ap", "Theorem thM1",
    "lifted T^2 solve of the almost-periodic datum decays to a constant",
    {
        "initial": {"modes": [{"kind": "sin", "amp": 1.0, "k": [1, 0]}, {"kind": "sin", "amp": 0.5, "k": [0, 1]}],
                    "basis": [1.0, SQRT2]},
        "hamiltonian": {"family": "quadratic", "scale": 1.0},
        "module": {"declared": [1.0, SQRT2]},
        "solve": {"scheme": "upwind", "grid_n": 256, "t_final": 20.0, "snapshot_cadence": 1.0,
                  "adaptive_box": True, "box_factor": 1.0},
        "diagnostics": {"trace_range": 100.0, "trace_samples_per_unit": 64, "ratio_threshold": 0.05,
                        "slack": 1e-12, "runtime_limit_s": 600.0},
        "output": {"snapshots": "final"},
    },
)
def _decay_ap(cfg: ScenarioConfig) -> ScenarioResult:
    d = cfg.diagnostics
    poly = build_initial(cfg.initial)
    H = build_hamiltonian(cfg.hamiltonian)
    mod = build_module(cfg.module, poly)
    scfg = cfg.solve_config()
    v0, lam = lift_problem(poly, mod, scfg.grid_n)
    watch = _TorusExtremaWatch(v0.values)
    t0 = time.perf_counter()
    snaps = solve_lifted(v0, H, lam, scfg, watch)
    elapsed = time.perf_counter() - t0
    spec = (d["trace_range"], int(round(d["trace_range"] * d["trace_samples_per_unit"])))
    traced = [trace_back(s, lam, spec) for s in snaps]
    series = asy.oscillation_series(traced)
    verdict = asy.decay_verdict(series, d["ratio_threshold"])
    slack = d["slack"]
    torus_viol = (_monotone_violations(np.array(watch.maxs), 1.0, slack)
                  + _monotone_violations(np.array(watch.mins), -1.0, slack))
    verdict["traced_snapshot_violations"] = verdict.pop("monotonicity_violations")
    verdict["torus_step_violations"] = torus_viol
    verdict["runtime_ok"] = elapsed < d["runtime_limit_s"]
    verdict["pass"] = bool(verdict["ratio"] <= d["ratio_threshold"] and torus_viol == 0
                           and verdict["traced_snapshot_violations"] == 0 and verdict["runtime_ok"])
    torus_osc = [s.oscillation() for s in snaps]
    return ScenarioResult(
        cfg.scenario, verdict,
        {"ratio_threshold": d["ratio_threshold"], "slack": slack, "runtime_limit_s": d["runtime_limit_s"]},
        {"steps": snaps[-1].meta.get("steps"), "torus_oscillation": torus_osc},
        series, [("v", s) for s in snaps],
    )


@scenario(
    "traveling-wave-plateau", "Theorem thM, Eq. (7)",
    "plateau H: u(t, x) - p(x - ct) settles to m_* with p one-sided Lipschitz",
    {
        "initial": _modes({"kind": "sin", "amp": 0.2, "freq": 1}),
        "hamiltonian": {"family": "plateau", "a": -0.3, "b": 0.3, "c": 1.0, "extension": "cubic"},
        "solve": {"grid_n": 400, "t_final": 20.0, "snapshot_cadence": 1.0, "adaptive_box": True},
        "diagnostics": {
            "late_from": 15.0, "detect_radius": 2.0, "detect_tol": 1e-6,
            "certificate_threshold": 1e-2, "lipschitz_bounds": [-0.3, 0.3], "lipschitz_tol": 1e-2,
            "sup_threshold": 2e-2,
        },
    },
)
def _traveling_wave_plateau(cfg: ScenarioConfig) -> ScenarioResult:
    d = cfg.diagnostics
    poly = build_initial(cfg.initial)
    H = build_hamiltonian(cfg.hamiltonian)
    scfg = cfg.solve_config()
    li = asy.detect_linear_interval(H, d["detect_radius"], d["detect_tol"])
    traj = solve_direct_1d(SampledLine.from_function(_poly_fn(poly), 1.0, scfg.grid_n), H, scfg)
    late = [s for s in traj if s.time >= d["late_from"] - 1e-12]
    profile = asy.extract_profile(late, li.c, d["certificate_threshold"])
    a, b = d["lipschitz_bounds"]
    lip_ok = asy.one_sided_lipschitz_check(profile, a, b, d["lipschitz_tol"])
    final = traj[-1]
    sup = float(np.max(np.abs(final.values - profile.at(final.x - li.c * final.time))))
    series = asy.oscillation_series(traj, profile)
    verdict = {
        "certificate": profile.certificate,
        "lipschitz_ok": lip_ok,
        "sup_distance": sup,
        "pass": bool(profile.certificate <= d["certificate_threshold"] and lip_ok and sup <= d["sup_threshold"]),
    }
    params = {"linear_interval": li.to_json(), "offset": profile.offset,
              "profile_range": float(np.ptp(profile.shape.values)), "steps": len(traj)}
    return ScenarioResult(
        cfg.scenario, verdict,
        {"certificate_threshold": d["certificate_threshold"], "lipschitz_bounds": [a, b],
         "lipschitz_tol": d["lipschitz_tol"], "sup_threshold": d["sup_threshold"]},
        params, series, [("u", s) for s in traj] + [("profile", profile.full())],
    )


@scenario(
    "cl-decay", "Theorem th3",
    "Burgers flux, zero-mean data: L1 distance to the mean decays",
    {
        "initial": _modes({"kind": "sin", "amp": 1 / (2 * math.pi), "freq": 1},
                          {"kind": "cos", "amp": 1 / (8 * math.pi), "freq": 2}),
        "hamiltonian": {"family": "quadratic", "scale": 1.0},
        "solve": {"grid_n": 400, "t_final": 20.0, "snapshot_cadence": 1.0},
        "diagnostics": {"ratio_threshold": 0.1},
        "output": {"snapshots": "final"},
    },
)
def _cl_decay(cfg: ScenarioConfig) -> ScenarioResult:
    poly = build_initial(cfg.initial)
    H = build_hamiltonian(cfg.hamiltonian)
    scfg = cfg.solve_config()
    v0 = CellField1D.from_averages_of_derivative(_poly_fn(poly), scfg.grid_n)
    traj = solve_cl_1d(v0, H, scfg)
    I = discrete_mean(v0)
    l1 = np.array([l1_norm(v, I) for v in traj])
    ratio = float(l1[-1] / l1[0]) if l1[0] > 0 else 0.0
    thr = cfg.diagnostics["ratio_threshold"]
    series = asy.DiagnosticsSeries([v.time for v in traj], [v.values.min() for v in traj],
                                   [v.values.max() for v in traj], l1ref=l1)
    return ScenarioResult(cfg.scenario, {"l1_ratio": ratio, "pass": ratio <= thr}, {"ratio_threshold": thr},
                          {"mean": I}, series, [("v", v) for v in traj])


@scenario(
    "cl-traveling-wave", "Theorem th4",
    "plateau flux: snapshots shifted by ct stop changing",
    {
        "initial": _modes({"kind": "sin", "amp": 0.2, "freq": 1}),
        "hamiltonian": {"family": "plateau", "a": -0.3, "b": 0.3, "c": 1.0, "extension": "cubic"},
        "solve": {"grid_n": 400, "t_final": 20.0, "snapshot_cadence": 1.0},
        "diagnostics": {"detect_radius": 2.0, "detect_tol": 1e-6, "stabilization_threshold": 1e-2},
        "output": {"snapshots": "final"},
    },
)
def _cl_traveling_wave(cfg: ScenarioConfig) -> ScenarioResult:
    d = cfg.diagnostics
    poly = build_initial(cfg.initial)
    H = build_hamiltonian(cfg.hamiltonian)
    scfg = cfg.solve_config()
    li = asy.detect_linear_interval(H, d["detect_radius"], d["detect_tol"])
    traj = solve_cl_1d(CellField1D.from_averages_of_derivative(_poly_fn(poly), scfg.grid_n), H, scfg)
    stab = stabilization_series(traj, li.c)
    final = float(stab[-1])
    thr = d["stabilization_threshold"]
    # l1ref[i] compares snapshot i with snapshot i + 1 in the moving frame
    series = asy.DiagnosticsSeries([v.time for v in traj[:-1]], [v.values.min() for v in traj[:-1]],
                                   [v.values.max() for v in traj[:-1]], l1ref=stab)
    return ScenarioResult(cfg.scenario, {"final_stabilization": final, "pass": final <= thr},
                          {"stabilization_threshold": thr}, {"linear_interval": li.to_json()},
                          series, [("v", v) for v in traj])


@scenario(
    "kronecker-fill", "proof of Theorem thM1 (density)",
    "the line x Lambda fills T^2 for independent Lambda, not for dependent Lambda",
    {
        "diagnostics": {
            "lam": [1.0, SQRT2], "x_range": 500.0, "samples": 50000, "probe_grid": 16, "fill_threshold": 1 / 16,
            "control_lam": [1.0, 1.0], "control_probe_grid": 8, "control_floor": 0.1,
        },
        "output": {"snapshots": "none"},
    },
)
def _kronecker_fill(cfg: ScenarioConfig) -> ScenarioResult:
    d = cfg.diagnostics
    fill = kronecker_fill_distance(d["lam"], d["x_range"], d["samples"], d["probe_grid"])
    ctrl = kronecker_fill_distance(d["control_lam"], d["x_range"], d["samples"], d["control_probe_grid"])
    verdict = {"fill_distance": fill, "control_fill_distance": ctrl,
               "pass": fill <= d["fill_threshold"] and ctrl >= d["control_floor"]}
    return ScenarioResult(cfg.scenario, verdict,
                          {"fill_threshold": d["fill_threshold"], "control_floor": d["control_floor"]})


def random_generators(rng: random.Random, n: int, count: int, max_den: int, max_num: int = 10):
    return [
        FrequencyVector(coords=tuple(Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))
                                     for _ in range(n)))
        for _ in range(count)
    ]


def small_combinations(gens, bound: int):
    """All sums ``sum c_i g_i`` with ``|c_i| <= bound`` (brute force)."""
    import itertools

    n = gens[0].size
    out = set()
    for cs in itertools.product(range(-bound, bound + 1), repeat=len(gens)):
        out.add(tuple(sum((c * g.coords[j] for c, g in zip(cs, gens)), Fraction(0)) for j in range(n)))
    return out


def lattice_failures(gens, rng: random.Random, probes: int = 20, bound: int = 1) -> list[str]:
    """Round-trip, idempotence and brute-force membership checks for one generator set."""
    fails = []
    mod = module_basis_rational(gens)
    if hermite_normal_form(mod.hnf.rows) != mod.hnf:
        fails.append("hnf not idempotent")
    for g, k in zip(gens, mod.generator_coords):
        if combine(mod, k) != g:
            fails.append(f"round trip failed for {g!r}")
    again = module_basis_rational([FrequencyVector(coords=row) for row in mod.basis])
    if again.basis != mod.basis:
        fails.append("basis is not a fixed point")
    reachable = small_combinations(gens, bound)
    for coords in reachable:
        if not membership(mod, FrequencyVector(coords=coords)):
            fails.append(f"brute-force combination {coords} rejected")
    n = gens[0].size
    for _ in range(probes):
        cand = tuple(Fraction(rng.randint(-20, 20), rng.randint(1, 2 * mod.scale)) for _ in range(n))
        f = FrequencyVector(coords=cand)
        inside = membership(mod, f)
        if inside and combine(mod, integer_coordinates(mod, f)) != f:
            fails.append(f"coordinates of {cand} do not recombine")
        if not inside and cand in reachable:
            fails.append(f"{cand} is reachable but rejected")
    return fails


@scenario(
    "lattice-algebra", "Theorem th2 (frequency module)",
    "HNF module bases: round trip, idempotence, brute-force membership",
    {
        "diagnostics": {"sets": 100, "seed": 31337, "max_dim": 3, "max_generators": 4, "max_den": 30},
        "output": {"snapshots": "none"},
    },
)
def _lattice_algebra(cfg: ScenarioConfig) -> ScenarioResult:
    d = cfg.diagnostics
    rng = random.Random(d["seed"])
    failures = []
    ranks = []
    for i in range(d["sets"]):
        n = rng.randint(1, d["max_dim"])
        gens = random_generators(rng, n, rng.randint(1, d["max_generators"]), d["max_den"])
        fails = lattice_failures(gens, rng)
        ranks.append(module_basis_rational(gens).rank)
        failures += [f"set {i}: {m}" for m in fails]
    return ScenarioResult(cfg.scenario, {"failures": len(failures), "pass": not failures},
                          {"failures": 0}, {"messages": failures[:20], "ranks": ranks})


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    return REGISTRY[cfg.scenario].runner(cfg)


def run_named(name: str, overrides: list[str] | None = None) -> ScenarioResult:
    return run_scenario(resolve_config({"scenario": name}, overrides))
