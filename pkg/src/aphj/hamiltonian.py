"""Hamiltonian families H(p) used by the HJ and conservation-law solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError

FAMILIES = ("quadratic", "linear", "power", "abs", "piecewise_linear", "sampled", "plateau")


@dataclass
class Hamiltonian:
    """Evaluation rule for H on R^n (n = ``dim``), vectorised over leading axes.

    Families and their ``params``:

    ``quadratic``        ``scale`` s: H = s/2 |p|^2
    ``linear``           ``c`` (list of n): H = c . p
    ``power``            ``gamma``: H = |p|^gamma
    ``abs``              H = |p|
    ``piecewise_linear`` ``nodes``, ``values``: kink table, linear beyond the ends
    ``sampled``          ``nodes``, ``values``: interpolated table, undefined outside
    ``plateau``          ``a``, ``b``, ``c``, ``extension`` (cubic|quadratic),
                         ``strength`` k: H = c p on [a, b],
                         c p + k (p - b)^e for p > b and c p - k (a - p)^e for p < a
    ``shift`` (any family) is added to H; it makes H(0) != 0 cases easy to build.
    """

    kind: str
    params: dict = field(default_factory=dict)
    dim: int = 1

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ConfigError(f"unknown hamiltonian family {self.kind!r}; expected one of {FAMILIES}")
        p = self.params
        allowed = {
            "quadratic": {"scale"},
            "linear": {"c"},
            "power": {"gamma"},
            "abs": set(),
            "piecewise_linear": {"nodes", "values"},
            "sampled": {"nodes", "values"},
            "plateau": {"a", "b", "c", "extension", "strength"},
        }[self.kind] | {"shift"}
        unknown = set(p) - allowed
        if unknown:
            raise ConfigError(f"unknown parameters {sorted(unknown)} for family {self.kind!r}")
        if self.kind in ("piecewise_linear", "sampled"):
            nodes = np.asarray(p["nodes"], dtype=float)
            if nodes.ndim != 1 or nodes.size < 2 or np.any(np.diff(nodes) <= 0):
                raise ConfigError("table nodes must be strictly increasing")
            if len(p["values"]) != nodes.size:
                raise ConfigError("table nodes and values differ in length")
        if self.kind == "plateau":
            if not p.get("a", -1) <= 0 <= p.get("b", 1):
                raise ConfigError("plateau needs a <= 0 <= b")
            if p.get("extension", "cubic") not in ("cubic", "quadratic"):
                raise ConfigError("plateau extension must be cubic or quadratic")
        if self.kind == "linear":
            c = np.atleast_1d(np.asarray(p.get("c", 1.0), dtype=float))
            if c.size != self.dim:
                raise ConfigError(f"linear H needs {self.dim} coefficients")
        if self.kind == "power" and p.get("gamma", 2.0) <= 0:
            raise ConfigError("power H needs gamma > 0")
        if self.dim > 1 and self.kind in ("piecewise_linear", "sampled", "plateau"):
            raise ConfigError(f"family {self.kind!r} is one-dimensional")

    # construction helpers -------------------------------------------------
    @classmethod
    def quadratic(cls, scale: float = 1.0, dim: int = 1) -> "Hamiltonian":
        return cls("quadratic", {"scale": scale}, dim)

    @classmethod
    def linear(cls, c, dim: int | None = None) -> "Hamiltonian":
        c = list(np.atleast_1d(np.asarray(c, dtype=float)))
        return cls("linear", {"c": c}, dim or len(c))

    @classmethod
    def plateau(cls, a: float, b: float, c: float, extension: str = "cubic", strength: float = 1.0):
        return cls("plateau", {"a": a, "b": b, "c": c, "extension": extension, "strength": strength})

    @classmethod
    def from_spec(cls, spec: dict) -> "Hamiltonian":
        spec = dict(spec)
        try:
            kind = spec.pop("family")
        except KeyError:
            raise ConfigError("hamiltonian spec needs a 'family'") from None
        dim = int(spec.pop("dim", 1))
        return cls(kind, spec, dim)

    def to_spec(self) -> dict:
        return {"family": self.kind, "dim": self.dim, **self.params}

    # evaluation ------------------------------------------------------------
    def __call__(self, p) -> np.ndarray:
        """H(p); for dim = 1 ``p`` is any array of scalars, else trailing axis n."""
        p = np.asarray(p, dtype=float)
        k, prm = self.kind, self.params
        if self.dim > 1 and p.shape[-1] != self.dim:
            raise ValueError(f"gradient needs trailing dimension {self.dim}")
        if k == "quadratic":
            sq = p * p if self.dim == 1 else np.sum(p * p, axis=-1)
            out = 0.5 * prm.get("scale", 1.0) * sq
        elif k == "linear":
            c = np.asarray(prm["c"], dtype=float)
            out = c[0] * p if self.dim == 1 else p @ c
        elif k == "power":
            r = np.abs(p) if self.dim == 1 else np.sqrt(np.sum(p * p, axis=-1))
            out = r ** prm.get("gamma", 2.0)
        elif k == "abs":
            out = np.abs(p) if self.dim == 1 else np.sqrt(np.sum(p * p, axis=-1))
        elif k == "piecewise_linear":
            out = _table_extrapolated(prm["nodes"], prm["values"], p)
        elif k == "sampled":
            nodes = np.asarray(prm["nodes"], dtype=float)
            if np.any(p < nodes[0] - 1e-12) or np.any(p > nodes[-1] + 1e-12):
                raise ValueError(f"sampled hamiltonian queried outside [{nodes[0]}, {nodes[-1]}]")
            out = np.interp(p, nodes, np.asarray(prm["values"], dtype=float))
        else:
            a, b, c = prm.get("a", -1.0), prm.get("b", 1.0), prm.get("c", 1.0)
            e = 3 if prm.get("extension", "cubic") == "cubic" else 2
            s = prm.get("strength", 1.0)
            out = c * p + s * np.maximum(p - b, 0.0) ** e - s * np.maximum(a - p, 0.0) ** e
        return out + prm.get("shift", 0.0)

    @property
    def h0(self) -> float:
        z = 0.0 if self.dim == 1 else np.zeros(self.dim)
        return float(self(z))

    def linear_interval(self) -> tuple[float, float, float] | None:
        """Known (a, b, c) of the plateau family, else None."""
        if self.kind == "plateau":
            prm = self.params
            return prm.get("a", -1.0), prm.get("b", 1.0), prm.get("c", 1.0)
        if self.kind == "linear" and self.dim == 1:
            return -np.inf, np.inf, float(self.params["c"][0])
        return None

    def quasiconvex_about_zero(self) -> bool:
        """True when H is nonincreasing on (-inf, 0] and nondecreasing on [0, inf)."""
        if self.kind == "quadratic":
            return self.params.get("scale", 1.0) >= 0
        return self.kind in ("power", "abs")

    def monotone_split(self, lo: float, hi: float, nodes: int = 4097) -> tuple[Callable, Callable]:
        """Split ``H = H_up + H_down`` with H_up nondecreasing and H_down nonincreasing.

        Exact for quasiconvex and linear families. Other families are
        tabulated on ``[lo, hi]`` (with 0 as a node) and split by the sign of
        the table increments, so the split sums to the piecewise-linear
        interpolant of H.
        """
        if self.dim != 1:
            raise ConfigError("monotone split is implemented for one-dimensional H only")
        h0 = self.h0
        if self.quasiconvex_about_zero():
            return (lambda s: self(np.maximum(s, 0.0)) - h0), (lambda s: self(np.minimum(s, 0.0)))
        if self.kind == "linear":
            c = float(self.params["c"][0])
            if c >= 0:
                return (lambda s: c * s), (lambda s: 0.0 * s + h0)
            return (lambda s: 0.0 * s), (lambda s: c * s + h0)
        lo, hi = min(lo, -1e-12), max(hi, 1e-12)
        half = (nodes - 1) // 2
        grid = np.unique(np.concatenate([np.linspace(lo, 0.0, half + 1), np.linspace(0.0, hi, half + 1)]))
        vals = self(grid)
        i0 = int(np.searchsorted(grid, 0.0))
        inc = np.diff(vals)
        up = np.concatenate([[0.0], np.cumsum(np.maximum(inc, 0.0))])
        down = np.concatenate([[0.0], np.cumsum(np.minimum(inc, 0.0))])
        up -= up[i0]
        down += h0 - down[i0]

        def table(v):
            return lambda s: _table_extrapolated(grid, v, s)

        return table(up), table(down)


def _table_extrapolated(nodes, values, p) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    p = np.asarray(p, dtype=float)
    out = np.interp(p, nodes, values)
    left = (values[1] - values[0]) / (nodes[1] - nodes[0])
    right = (values[-1] - values[-2]) / (nodes[-1] - nodes[-2])
    out = np.where(p < nodes[0], values[0] + left * (p - nodes[0]), out)
    out = np.where(p > nodes[-1], values[-1] + right * (p - nodes[-1]), out)
    return out
