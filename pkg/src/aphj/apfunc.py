"""Trigonometric polynomials, sampled lines and Bohr-Fourier analysis.

Frequencies come in exactly two regimes:

* rational: every coordinate is a :class:`fractions.Fraction`, so equality and
  group membership are exact;
* basis: an integer vector ``k`` over a declared real basis, meaning
  ``lambda = sum_j k_j * basis[j]``.

Mixing the two regimes raises :class:`IncompatibleRepresentation`.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    GridMismatch,
    IncompatibleRepresentation,
    NonRealResidue,
    OrderTooLarge,
    WindowTooShort,
)
from .torus import TorusField

RESIDUE_RTOL = 1e-12
MIN_SAMPLES_PER_UNIT = 64


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (Integral, Rational)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float) and v.is_integer():
        return Fraction(int(v))
    raise TypeError(f"rational frequency coordinate must be exact, got {v!r}")


@dataclass(frozen=True)
class FrequencyVector:
    """A frequency in the rational regime (``coords``) or the basis regime (``k``)."""

    coords: tuple[Fraction, ...] | None = None
    k: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.coords is None) == (self.k is None):
            raise ValueError("exactly one of coords / k must be given")
        if self.coords is not None:
            object.__setattr__(self, "coords", tuple(_to_fraction(c) for c in self.coords))
            if not self.coords:
                raise ValueError("empty frequency vector")
        else:
            ks = tuple(int(c) for c in self.k)
            if any(int(c) != c for c in self.k) or not ks:
                raise ValueError(f"basis coordinates must be integers, got {self.k!r}")
            object.__setattr__(self, "k", ks)

    @classmethod
    def rational(cls, *values) -> "FrequencyVector":
        if len(values) == 1 and isinstance(values[0], (list, tuple)):
            values = tuple(values[0])
        return cls(coords=tuple(values))

    @classmethod
    def over_basis(cls, *k) -> "FrequencyVector":
        if len(k) == 1 and isinstance(k[0], (list, tuple, np.ndarray)):
            k = tuple(k[0])
        return cls(k=tuple(k))

    @property
    def regime(self) -> str:
        return "rational" if self.coords is not None else "basis"

    @property
    def size(self) -> int:
        return len(self.coords) if self.coords is not None else len(self.k)

    def is_zero(self) -> bool:
        items = self.coords if self.coords is not None else self.k
        return all(c == 0 for c in items)

    def _check_same(self, other: "FrequencyVector"):
        if self.regime != other.regime or self.size != other.size:
            raise IncompatibleRepresentation(f"cannot combine {self} and {other}")

    def __neg__(self):
        if self.coords is not None:
            return FrequencyVector(coords=tuple(-c for c in self.coords))
        return FrequencyVector(k=tuple(-c for c in self.k))

    def __add__(self, other: "FrequencyVector"):
        self._check_same(other)
        if self.coords is not None:
            return FrequencyVector(coords=tuple(a + b for a, b in zip(self.coords, other.coords)))
        return FrequencyVector(k=tuple(a + b for a, b in zip(self.k, other.k)))

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, n: int) -> "FrequencyVector":
        if self.coords is not None:
            return FrequencyVector(coords=tuple(n * c for c in self.coords))
        return FrequencyVector(k=tuple(n * c for c in self.k))

    def value(self, basis: np.ndarray | None = None) -> np.ndarray:
        """Numeric frequency in R^n (basis regime needs the ``(m, n)`` basis matrix)."""
        if self.coords is not None:
            return np.array([float(c) for c in self.coords])
        if basis is None:
            raise IncompatibleRepresentation("basis-regime frequency needs a basis to evaluate")
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        return np.asarray(self.k, dtype=float) @ basis

    def to_json(self) -> dict:
        if self.coords is not None:
            return {"freq": [{"num": c.numerator, "den": c.denominator} for c in self.coords]}
        return {"k": list(self.k)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "FrequencyVector":
        if "freq" in obj:
            return cls(coords=tuple(Fraction(int(c["num"]), int(c["den"])) for c in obj["freq"]))
        if "k" in obj:
            return cls(k=tuple(obj["k"]))
        raise ValueError("frequency JSON needs 'freq' or 'k'")

    def __repr__(self):
        if self.coords is not None:
            return "FrequencyVector(" + ", ".join(str(c) for c in self.coords) + ")"
        return f"FrequencyVector(k={list(self.k)})"


def _basis_matrix(basis) -> np.ndarray | None:
    if basis is None:
        return None
    b = np.asarray(basis, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    return b


class TrigPoly:
    """Finite sum ``sum_lambda a_lambda exp(2 pi i lambda . x)`` on R^n.

    ``basis`` (shape ``(m, n)``, or a flat list of m reals when n = 1) is
    required exactly when the frequencies are in the basis regime.
    """

    def __init__(
        self,
        dim: int,
        terms: Mapping[FrequencyVector, complex] | Iterable[tuple[complex, FrequencyVector]],
        real_valued: bool = True,
        basis=None,
    ):
        self.dim = int(dim)
        self.real_valued = bool(real_valued)
        self.basis = _basis_matrix(basis)
        if isinstance(terms, Mapping):
            items = [(complex(a), f) for f, a in terms.items()]
        else:
            items = [(complex(a), f) for a, f in terms]
        acc: dict[FrequencyVector, complex] = {}
        for a, f in items:
            acc[f] = acc.get(f, 0j) + a
        self._terms = acc
        self._validate()

    def _validate(self):
        regimes = {f.regime for f in self._terms}
        if len(regimes) > 1:
            raise IncompatibleRepresentation("TrigPoly mixes rational and basis frequencies")
        regime = regimes.pop() if regimes else ("basis" if self.basis is not None else "rational")
        if regime == "basis":
            if self.basis is None:
                raise IncompatibleRepresentation("basis-regime TrigPoly needs a declared basis")
            if self.basis.shape[1] != self.dim:
                raise ValueError(f"basis vectors must have dim {self.dim}")
            if any(f.size != self.basis.shape[0] for f in self._terms):
                raise ValueError("k-vector length must equal the basis size")
        else:
            if self.basis is not None and self._terms:
                raise IncompatibleRepresentation("rational TrigPoly must not carry a basis")
            if any(f.size != self.dim for f in self._terms):
                raise ValueError(f"frequency dims must equal {self.dim}")
        self.regime = regime

    @property
    def terms(self) -> dict[FrequencyVector, complex]:
        return dict(self._terms)

    def zero_frequency(self) -> FrequencyVector:
        if self.regime == "basis":
            return FrequencyVector(k=(0,) * self.basis.shape[0])
        return FrequencyVector(coords=(0,) * self.dim)

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, c: float, dim: int = 1, basis=None) -> "TrigPoly":
        p = cls(dim, {}, basis=basis)
        return cls(dim, {p.zero_frequency(): complex(c)}, basis=basis)

    @classmethod
    def cos(cls, freq: FrequencyVector, amp: float = 1.0, dim: int = 1, basis=None) -> "TrigPoly":
        if freq.is_zero():
            return cls(dim, {freq: complex(amp)}, basis=basis)
        return cls(dim, {freq: amp / 2, -freq: amp / 2}, basis=basis)

    @classmethod
    def sin(cls, freq: FrequencyVector, amp: float = 1.0, dim: int = 1, basis=None) -> "TrigPoly":
        if freq.is_zero():
            return cls(dim, {freq: 0j}, basis=basis)
        return cls(dim, {freq: amp / 2j, -freq: -amp / 2j}, basis=basis)

    # algebra -------------------------------------------------------------
    def _compatible(self, other: "TrigPoly"):
        if self.dim != other.dim:
            raise IncompatibleRepresentation("dimension mismatch")
        if other._terms and self._terms and self.regime != other.regime:
            raise IncompatibleRepresentation("frequency regimes differ")
        if (self.basis is None) != (other.basis is None) or (
            self.basis is not None and not np.array_equal(self.basis, other.basis)
        ):
            raise IncompatibleRepresentation("declared bases differ")

    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(float(other), self.dim, self.basis)
        self._compatible(other)
        merged = list((a, f) for f, a in self._terms.items())
        merged += [(a, f) for f, a in other._terms.items()]
        return TrigPoly(self.dim, merged, self.real_valued and other.real_valued, self.basis)

    __radd__ = __add__

    def __mul__(self, s):
        s = complex(s)
        real = self.real_valued and s.imag == 0
        return TrigPoly(self.dim, {f: a * s for f, a in self._terms.items()}, real, self.basis)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __call__(self, x):
        return evaluate(self, x)

    def frequency_values(self) -> tuple[list[FrequencyVector], np.ndarray, np.ndarray]:
        freqs = list(self._terms)
        lam = np.array([f.value(self.basis) for f in freqs]).reshape(len(freqs), self.dim)
        coef = np.array([self._terms[f] for f in freqs], dtype=complex)
        return freqs, lam, coef

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        obj = {"dim": self.dim}
        if self.basis is not None:
            b = self.basis
            obj["basis"] = [float(r[0]) for r in b] if self.dim == 1 else b.tolist()
        obj["realValued"] = self.real_valued
        obj["terms"] = [
            {"re": a.real, "im": a.imag, **f.to_json()} for f, a in self._terms.items()
        ]
        return obj

    @classmethod
    def from_json(cls, obj: Mapping | str) -> "TrigPoly":
        if isinstance(obj, str):
            obj = json.loads(obj)
        terms = [
            (complex(t.get("re", 0.0), t.get("im", 0.0)), FrequencyVector.from_json(t))
            for t in obj["terms"]
        ]
        return cls(obj["dim"], terms, obj.get("realValued", True), obj.get("basis"))

    def __repr__(self):
        body = " + ".join(f"({a:.6g})e[{f!r}]" for f, a in self._terms.items())
        return f"TrigPoly(dim={self.dim}, {body or '0'})"


def evaluate(poly: TrigPoly, x) -> float | np.ndarray:
    """Real value of ``poly`` at ``x`` (scalar/array for n = 1, trailing axis n otherwise).

    The imaginary part is discarded after checking it is below
    ``1e-12 * sum |a_lambda|``; a larger residue means the conjugate pairing
    of a real-valued polynomial is broken.
    """
    if not poly.real_valued:
        raise ValueError("evaluate() needs a real-valued TrigPoly")
    x = np.asarray(x, dtype=float)
    if poly.dim == 1:
        pts = x[..., None]
    else:
        if x.shape[-1] != poly.dim:
            raise ValueError(f"points need trailing dimension {poly.dim}")
        pts = x
    _, lam, coef = poly.frequency_values()
    if len(coef) == 0:
        out = np.zeros(pts.shape[:-1])
        return float(out) if out.ndim == 0 else out
    phase = 2.0 * np.pi * np.tensordot(pts, lam, axes=([-1], [1]))
    total = np.tensordot(np.exp(1j * phase), coef, axes=([-1], [0]))
    scale = float(np.sum(np.abs(coef)))
    resid = float(np.max(np.abs(total.imag))) if np.size(total) else 0.0
    if resid > RESIDUE_RTOL * max(scale, np.finfo(float).tiny):
        raise NonRealResidue(f"imaginary residue {resid:.3e} exceeds {RESIDUE_RTOL:g} * {scale:.3e}")
    out = total.real
    return float(out) if out.ndim == 0 else out


def mean_value(poly: TrigPoly) -> float:
    return bohr_coefficient(poly, poly.zero_frequency()).real


def bohr_coefficient(poly: TrigPoly, lam: FrequencyVector) -> complex:
    """Exact coefficient of ``lam`` in ``poly`` (0 when absent)."""
    if poly._terms:
        ref = next(iter(poly._terms))
        if ref.regime != lam.regime or ref.size != lam.size:
            raise IncompatibleRepresentation(f"{lam!r} does not match the regime of the polynomial")
    elif (lam.regime == "basis") != (poly.basis is not None):
        raise IncompatibleRepresentation(f"{lam!r} does not match the regime of the polynomial")
    return complex(poly._terms.get(lam, 0j))


def spectrum(poly: TrigPoly) -> frozenset[FrequencyVector]:
    return frozenset(f for f, a in poly._terms.items() if a != 0)


# --- sampled lines ------------------------------------------------------------


@dataclass
class SampledLine:
    """Samples ``values[i] = f(i * length / K)`` on ``[0, length)``."""

    length: float
    values: np.ndarray
    periodic: bool = True
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.length <= 0:
            raise ValueError("domain length must be positive")
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError("SampledLine needs at least 2 samples")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("SampledLine values must be finite")

    @property
    def count(self) -> int:
        return self.values.size

    @property
    def spacing(self) -> float:
        return self.length / self.values.size

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.values.size) * self.spacing

    @classmethod
    def from_function(cls, fn, length: float, count: int, periodic: bool = True, time: float = 0.0):
        x = np.arange(count) * (length / count)
        return cls(length, np.broadcast_to(fn(x), (count,)).astype(float), periodic, time)

    def interpolate(self, x) -> np.ndarray:
        """Linear interpolation; periodic lines wrap, others clamp at the ends."""
        x = np.asarray(x, dtype=float)
        if self.periodic:
            xp = np.append(self.x, self.length)
            fp = np.append(self.values, self.values[0])
            return np.interp(np.mod(x, self.length), xp, fp)
        return np.interp(x, self.x, self.values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "value"])
            for xi, vi in zip(self.x, self.values):
                w.writerow([repr(float(xi)), repr(float(vi))])

    @classmethod
    def from_csv(cls, path, periodic: bool = True) -> "SampledLine":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if [c.strip() for c in rows[0]] != ["x", "value"]:
            raise ValueError(f"{path}: expected header 'x,value'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        h = data[1, 0] - data[0, 0]
        if not np.allclose(np.diff(data[:, 0]), h, rtol=1e-9, atol=1e-12):
            raise ValueError(f"{path}: samples are not uniformly spaced")
        return cls(h * len(data), data[:, 1], periodic)


def bohr_probe_sampled(f: SampledLine, lam: float, window: float, gap: float | None = None) -> complex:
    """Trapezoid estimate of ``(1/W) int_0^W f(x) exp(-2 pi i lam x) dx``.

    Error model: ``O(1/(W * gap)) + O(dx^2)`` where ``gap`` is the distance
    from ``lam`` to the nearest frequency actually present in ``f``. When a
    window holds a whole number of periods of every present frequency the
    leakage term vanishes. Passing ``gap`` enables the ``W >= 2/gap`` guard.
    """
    if window <= 0 or window > f.length * (1 + 1e-12):
        raise ValueError(f"window {window} must lie in (0, {f.length}]")
    if f.count / f.length < MIN_SAMPLES_PER_UNIT * (1 - 1e-12):
        raise ValueError(f"need >= {MIN_SAMPLES_PER_UNIT} samples per unit length")
    if gap is not None and window < 2.0 / gap:
        raise WindowTooShort(f"window {window} < 2/gap = {2.0 / gap}")
    h = f.spacing
    n_float = window / h
    n = int(round(n_float))
    if abs(n - n_float) > 1e-9 * max(1.0, n_float):
        raise ValueError("window must be a whole number of sample spacings")
    if n >= f.count and not (n == f.count and f.periodic):
        raise ValueError("window exceeds the sampled range")
    idx = np.arange(n + 1)
    vals = f.values[idx % f.count]
    w = np.full(n + 1, h)
    w[0] = w[-1] = h / 2
    x = idx * h
    return complex(np.sum(w * vals * np.exp(-2j * np.pi * lam * x)) / window)


def fejer_approx(v: TorusField, order: int, drop_tol: float = 1e-13) -> TrigPoly:
    """Fejer-weighted truncation of the grid DFT of ``v``.

    Each coefficient with ``|k_j| <= order`` is multiplied by
    ``prod_j (1 - |k_j| / (order + 1))``. Coefficients below
    ``drop_tol * sup|v|`` (FFT round-off) are dropped so that the spectrum
    reflects the field rather than noise.
    """
    if order < 1:
        raise ValueError("order must be positive")
    n = v.grid_n
    if n < 2 * order + 2:
        raise OrderTooLarge(f"grid {n} < 2*order+2 = {2 * order + 2}")
    m = v.rank
    c = np.fft.fftn(v.values) / n**m
    real = bool(np.isrealobj(v.values))
    ks = np.arange(-order, order + 1)
    grids = np.meshgrid(*([ks] * m), indexing="ij")
    kvec = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(1.0 - np.abs(kvec) / (order + 1.0), axis=1)
    coef = c[tuple((kvec % n).T)]
    if real:
        conj = c[tuple(((-kvec) % n).T)]
        coef = 0.5 * (coef + np.conj(conj))
    coef = coef * weights
    cutoff = drop_tol * max(float(np.max(np.abs(v.values))), np.finfo(float).tiny)
    terms = {}
    for k, a in zip(kvec, coef):
        if abs(a) > cutoff:
            terms[FrequencyVector(coords=tuple(int(t) for t in k))] = complex(a)
    if not terms:
        terms[FrequencyVector(coords=(0,) * m)] = 0j
    return TrigPoly(m, terms, real_valued=real)


def sup_distance(f: SampledLine, g: SampledLine) -> float:
    if f.count != g.count or not np.isclose(f.length, g.length, rtol=1e-12, atol=0):
        raise GridMismatch(f"grids differ: ({f.length},{f.count}) vs ({g.length},{g.count})")
    return float(np.max(np.abs(f.values - g.values)))
