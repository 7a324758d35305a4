"""Gridded scalar fields on the unit torus T^m."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class TorusField:
    """Values of a periodic function on the uniform grid ``(j/N)`` of ``[0,1)^m``.

    ``values`` has shape ``(N,) * rank``; axis ``i`` is the torus coordinate
    ``y_i``. ``h0_shift`` records the affine correction ``-H(0) t`` already
    folded into ``values`` when the solver normalised ``H(0)`` away.
    """

    values: np.ndarray
    time: float = 0.0
    h0_shift: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim < 1:
            raise ValueError("TorusField needs rank >= 1")
        n = self.values.shape[0]
        if any(s != n for s in self.values.shape):
            raise ValueError(f"grid must be uniform per axis, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("TorusField values must be finite")

    @property
    def rank(self) -> int:
        return self.values.ndim

    @property
    def grid_n(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return 1.0 / self.grid_n

    def copy(self) -> "TorusField":
        return TorusField(self.values.copy(), self.time, self.h0_shift, dict(self.meta))

    def coords(self) -> list[np.ndarray]:
        """Open meshgrid of node coordinates, one array per axis."""
        y = np.arange(self.grid_n) / self.grid_n
        return list(np.meshgrid(*([y] * self.rank), indexing="ij", sparse=True))

    @classmethod
    def from_function(cls, fn, rank: int, grid_n: int, time: float = 0.0) -> "TorusField":
        y = np.arange(grid_n) / grid_n
        mesh = np.meshgrid(*([y] * rank), indexing="ij")
        return cls(np.broadcast_to(fn(*mesh), (grid_n,) * rank).copy(), time)

    def oscillation(self) -> float:
        return float(self.values.max() - self.values.min())

    def grid_lipschitz(self) -> np.ndarray:
        """Per-axis max |forward difference| / spacing (periodic)."""
        out = []
        for ax in range(self.rank):
            d = np.roll(self.values, -1, axis=ax) - self.values
            out.append(float(np.max(np.abs(d))) * self.grid_n)
        return np.array(out)
