"""Exact lattice algebra for the frequency module generated by a finite spectrum.

Rational generators are scaled to integers by their common denominator and
reduced to Hermite normal form with Python integers, so bases and integer
coordinates are exact. Irrational frequencies enter only through a declared
real basis whose Z-independence is taken on trust.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .apfunc import FrequencyVector, TrigPoly, spectrum
from .errors import EmptyInput, IncompatibleRepresentation, NotInModule


@dataclass(frozen=True)
class IntegerMatrix:
    rows: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, rows) -> "IntegerMatrix":
        return cls(tuple(tuple(int(v) for v in r) for r in rows))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> IntegerMatrix:
    """Row-style HNF of the lattice spanned by ``rows``; zero rows are dropped.

    The result is in echelon form with positive pivots, and every entry above
    a pivot lies in ``[0, pivot)``. Elimination pivots on the smallest
    nonzero entry of the current column.
    """
    a = [list(map(int, r)) for r in rows]
    if not a:
        return IntegerMatrix(())
    ncols = len(a[0])
    if any(len(r) != ncols for r in a):
        raise ValueError("ragged integer matrix")
    pivot_row = 0
    pivots: list[tuple[int, int]] = []
    for col in range(ncols):
        while True:
            live = [i for i in range(pivot_row, len(a)) if a[i][col] != 0]
            if not live:
                break
            best = min(live, key=lambda i: abs(a[i][col]))
            a[pivot_row], a[best] = a[best], a[pivot_row]
            p = a[pivot_row][col]
            done = True
            for i in range(pivot_row + 1, len(a)):
                if a[i][col] != 0:
                    q = a[i][col] // p
                    a[i] = [x - q * y for x, y in zip(a[i], a[pivot_row])]
                    if a[i][col] != 0:
                        done = False
            if done:
                break
        if pivot_row < len(a) and a[pivot_row][col] != 0:
            if a[pivot_row][col] < 0:
                a[pivot_row] = [-x for x in a[pivot_row]]
            pivots.append((pivot_row, col))
            pivot_row += 1
            if pivot_row == len(a):
                break
    for r, c in pivots:
        p = a[r][c]
        for i in range(r):
            q = a[i][c] // p
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
    return IntegerMatrix.of(a[:pivot_row])


@dataclass
class SpectrumModule:
    """A free abelian subgroup of R^n given by a basis.

    Rational regime: ``basis`` rows are tuples of Fractions, ``hnf`` holds the
    integer HNF rows at common denominator ``scale``.
    Declared regime: ``basis`` rows are floats; ``lattice`` is an integer HNF
    (over the declared reals) of the subgroup actually spanned, identity by
    default. Module elements are then k-vectors over the declared basis.
    """

    rank: int
    dim: int
    regime: str
    basis: tuple
    provenance: str
    hnf: IntegerMatrix | None = None
    scale: int = 1
    declared: np.ndarray | None = None
    lattice: IntegerMatrix | None = None
    generator_coords: tuple[tuple[int, ...], ...] = field(default_factory=tuple)

    def basis_matrix(self) -> np.ndarray:
        """Numeric ``(rank, dim)`` matrix whose rows are the module basis."""
        if self.regime == "rational":
            return np.array([[float(c) for c in row] for row in self.basis])
        return np.asarray(self.basis, dtype=float)

    def to_json(self) -> dict:
        if self.regime == "rational":
            basis = [[{"num": c.numerator, "den": c.denominator} for c in row] for row in self.basis]
        else:
            basis = [list(map(float, row)) for row in self.basis]
        return {
            "rank": self.rank,
            "dim": self.dim,
            "regime": self.regime,
            "basis": basis,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, obj) -> "SpectrumModule":
        if obj["regime"] == "rational":
            gens = [
                FrequencyVector(coords=tuple(Fraction(c["num"], c["den"]) for c in row))
                for row in obj["basis"]
            ]
            mod = module_basis_rational(gens)
            mod.provenance = obj.get("provenance", mod.provenance)
            return mod
        return declared_module(obj["basis"])


def _common_scale(gens: Sequence[FrequencyVector]) -> int:
    d = 1
    for g in gens:
        for c in g.coords:
            d = d * c.denominator // math.gcd(d, c.denominator)
    return d


def module_basis_rational(gens: Sequence[FrequencyVector]) -> SpectrumModule:
    """Basis of the subgroup of Q^n generated by ``gens`` (exact)."""
    gens = list(gens)
    if not gens:
        raise EmptyInput("module_basis_rational needs at least one generator")
    if any(g.regime != "rational" for g in gens):
        raise IncompatibleRepresentation("all generators must be rational")
    n = gens[0].size
    if any(g.size != n for g in gens):
        raise ValueError("generators must share a dimension")
    scale = _common_scale(gens)
    rows = [[int(c * scale) for c in g.coords] for g in gens]
    hnf = hermite_normal_form(rows)
    basis = tuple(tuple(Fraction(v, scale) for v in r) for r in hnf.rows)
    mod = SpectrumModule(
        rank=len(basis), dim=n, regime="rational", basis=basis, provenance="computed",
        hnf=hnf, scale=scale,
    )
    if mod.rank:
        mod.generator_coords = tuple(integer_coordinates(mod, g) for g in gens)
    return mod


def declared_module(basis, generators: Sequence[FrequencyVector] | None = None) -> SpectrumModule:
    """Module over a declared real basis (Z-independence is not verified).

    With ``generators`` (k-vectors) the module is the sublattice they span,
    reduced by HNF; its basis is then the corresponding integer combination
    of the declared reals.
    """
    b = np.asarray(basis, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    m, n = b.shape
    if np.any(np.all(b == 0, axis=1)):
        raise ValueError("declared basis vectors must be nonzero")
    if generators is None:
        lattice = IntegerMatrix.of(np.eye(m, dtype=int).tolist())
    else:
        gens = list(generators)
        if not gens:
            raise EmptyInput("declared_module with empty generator list")
        if any(g.regime != "basis" or g.size != m for g in gens):
            raise IncompatibleRepresentation("generators must be k-vectors over the declared basis")
        lattice = hermite_normal_form([g.k for g in gens])
    lat = np.array(lattice.rows, dtype=float).reshape(len(lattice.rows), m)
    mb = lat @ b
    mod = SpectrumModule(
        rank=len(lattice.rows), dim=n, regime="declared", basis=tuple(map(tuple, mb)),
        provenance="declared", declared=b, lattice=lattice,
    )
    if generators is not None:
        mod.generator_coords = tuple(integer_coordinates(mod, g) for g in generators)
    return mod


def module_of(poly: TrigPoly) -> SpectrumModule:
    """Frequency module generated by the spectrum of ``poly``."""
    sp = [f for f in spectrum(poly) if not f.is_zero()]
    if poly.regime == "rational":
        if not sp:
            sp = [poly.zero_frequency()]
        return module_basis_rational(sp)
    return declared_module(poly.basis[:, 0] if poly.dim == 1 else poly.basis, sp or None)


def _solve_echelon(rows: Sequence[Sequence], target: Sequence) -> tuple[int, ...]:
    k: list[int] = []
    for r, row in enumerate(rows):
        col = next(c for c, v in enumerate(row) if v != 0)
        resid = target[col] - sum(k[s] * rows[s][col] for s in range(r))
        q = Fraction(resid) / Fraction(row[col])
        if q.denominator != 1:
            raise NotInModule(f"non-integral coordinate {q}")
        k.append(int(q))
    recon = [sum(k[s] * rows[s][c] for s in range(len(rows))) for c in range(len(target))]
    if list(recon) != list(target):
        raise NotInModule("vector is outside the span of the basis")
    return tuple(k)


def integer_coordinates(mod: SpectrumModule, lam: FrequencyVector) -> tuple[int, ...]:
    """The unique integer vector ``k`` with ``lam = sum_j k_j basis_j``."""
    if mod.regime == "rational":
        if lam.regime != "rational":
            raise IncompatibleRepresentation("rational module needs a rational frequency")
        if lam.size != mod.dim:
            raise IncompatibleRepresentation("dimension mismatch")
        if mod.rank == 0:
            if lam.is_zero():
                return ()
            raise NotInModule("trivial module")
        scaled = [c * mod.scale for c in lam.coords]
        if any(c.denominator != 1 for c in scaled):
            raise NotInModule(f"{lam!r} has denominators outside 1/{mod.scale}")
        return _solve_echelon(mod.hnf.rows, [int(c) for c in scaled])
    if lam.regime != "basis":
        raise IncompatibleRepresentation("declared module needs a k-vector frequency")
    if lam.size != mod.declared.shape[0]:
        raise IncompatibleRepresentation("k-vector length must equal the declared basis size")
    return _solve_echelon(mod.lattice.rows, list(lam.k))


def membership(mod: SpectrumModule, lam: FrequencyVector) -> bool:
    try:
        integer_coordinates(mod, lam)
    except NotInModule:
        return False
    return True


def combine(mod: SpectrumModule, k: Sequence[int]) -> FrequencyVector:
    """The module element ``sum_j k_j basis_j`` (exact in the rational regime)."""
    if len(k) != mod.rank:
        raise ValueError("coordinate length must equal the module rank")
    if mod.regime == "rational":
        return FrequencyVector(
            coords=tuple(sum((kj * row[c] for kj, row in zip(k, mod.basis)), Fraction(0))
                         for c in range(mod.dim))
        )
    lat = mod.lattice.rows
    m = mod.declared.shape[0]
    return FrequencyVector(k=tuple(sum(kj * row[c] for kj, row in zip(k, lat)) for c in range(m)))


def kronecker_fill_distance(lam: Sequence[float], x_range: float, samples: int, probe_grid: int) -> float:
    """Largest torus-infinity distance from a probe cell centre to the sampled line.

    Samples ``x_i * lam mod 1`` at ``samples`` uniform points of ``[0, x_range]``
    and probes the centres of the ``probe_grid**m`` cells of the unit torus.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    m = lam.size
    if samples < probe_grid**m:
        raise ValueError(f"samples must be >= probe_grid**m = {probe_grid**m}")
    x = np.linspace(0.0, x_range, samples)
    pts = np.mod(x[:, None] * lam[None, :], 1.0)
    pts[pts >= 1.0] = 0.0
    c = (np.arange(probe_grid) + 0.5) / probe_grid
    centres = np.stack([g.ravel() for g in np.meshgrid(*([c] * m), indexing="ij")], axis=1)
    tree = cKDTree(pts, boxsize=1.0)
    d, _ = tree.query(centres, k=1, p=np.inf)
    return float(np.max(d))
