"""Functions on the discretized half-space and their elementary operations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._kernels import ball_sum, max_sq
from .errors import DomainError
from .geometry import Region, SpaceGrid, TimeLevels


@dataclass(frozen=True, eq=False)
class HalfSpaceGrid:
    """Product of a spatial grid with geometric time levels.

    A cell ``(y, j)`` carries the measure ``h^n * ln(ratio)``, the discrete
    form of ``dmu(y) dt/t``.
    """

    space: SpaceGrid
    levels: TimeLevels

    @property
    def shape(self) -> tuple:
        return self.space.shape + (self.levels.J,)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def t(self) -> np.ndarray:
        return self.levels.t

    @property
    def cell_measure(self) -> float:
        return self.space.cell_measure * self.levels.w

    @cached_property
    def V(self) -> np.ndarray:
        """``V(y, t_j)`` for every cell, shape ``(*extents, J)``."""
        cols = [
            self.space.cell_measure * self.count_field(max_sq(t / self.space.h, False))
            for t in self.levels.t
        ]
        out = np.stack(cols, axis=-1)
        out.setflags(write=False)
        return out

    @cached_property
    def _counts(self) -> dict:
        return {}

    def count_field(self, M: int) -> np.ndarray:
        """Number of grid points in the ball ``{|d|^2 <= M}`` around every point (cached)."""
        c = self._counts.get(M)
        if c is None:
            c = ball_sum(np.ones(self.space.shape), M, "fast")
            c.setflags(write=False)
            self._counts[M] = c
        return c

    def refine(self) -> "HalfSpaceGrid":
        """Halve the spacing, double the points per axis and the levels per octave."""
        return HalfSpaceGrid(self.space.refine(), self.levels.refine())

    def same_as(self, other: "HalfSpaceGrid") -> bool:
        return other is self or (self.space == other.space and self.levels == other.levels)

    def zeros(self) -> "GridFunction":
        return GridFunction(np.zeros(self.shape), self)

    def ones(self) -> "GridFunction":
        return GridFunction(np.ones(self.shape), self)

    def from_callable(self, fn) -> "GridFunction":
        """Sample ``fn(y, t)`` with ``y`` of shape ``(*extents, 1, n)`` and ``t`` of shape ``(J,)``."""
        y = self.space.coords()[..., None, :]
        return GridFunction(np.broadcast_to(fn(y, self.t), self.shape), self)


class GridFunction:
    """Immutable values on a :class:`HalfSpaceGrid`, indexed ``[*spatial, level]``."""

    __slots__ = ("values", "grid")

    def __init__(self, values, grid: HalfSpaceGrid):
        arr = np.array(values, copy=True)
        if not np.iscomplexobj(arr):
            arr = arr.astype(float)
        if arr.shape != grid.shape:
            raise DomainError(f"values of shape {arr.shape} do not match grid shape {grid.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("grid functions must have finite entries")
        arr.setflags(write=False)
        self.values = arr
        self.grid = grid

    def __repr__(self):
        return f"GridFunction(shape={self.values.shape}, dtype={self.values.dtype})"

    def _check(self, other: "GridFunction"):
        if not self.grid.same_as(other.grid):
            raise DomainError("grid functions live on different grids")

    def _wrap(self, values):
        return GridFunction(values, self.grid)

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return self._wrap(self.values + other.values)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return self._wrap(self.values - other.values)
        return NotImplemented

    def __neg__(self):
        return self._wrap(-self.values)

    def __mul__(self, c):
        if isinstance(c, GridFunction):
            self._check(c)
            return self._wrap(self.values * c.values)
        return self._wrap(self.values * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self._wrap(self.values / c)

    def abs(self) -> "GridFunction":
        return self._wrap(np.abs(self.values))

    def conj(self) -> "GridFunction":
        return self._wrap(np.conj(self.values))

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def restrict(self, region) -> "GridFunction":
        """``1_region * f``."""
        return self._wrap(np.where(_mask(self.grid, region), self.values, 0))

    def support(self) -> np.ndarray:
        return self.values != 0


def _mask(grid: HalfSpaceGrid, region) -> np.ndarray:
    if region is None:
        return np.ones(grid.shape, dtype=bool)
    m = region.mask if isinstance(region, Region) else np.asarray(region, dtype=bool)
    if m.shape != grid.shape:
        raise DomainError(f"region of shape {m.shape} does not match grid shape {grid.shape}")
    return m


def integrate(f: GridFunction, region=None):
    """``sum f(y, j) * mu(y) * w`` over the region (the whole grid by default)."""
    m = _mask(f.grid, region)
    total = np.sum(f.values[m]) * f.grid.cell_measure
    return total if np.iscomplexobj(total) else float(total)


def v_multiply(f: GridFunction, s: float) -> GridFunction:
    """``(V^s f)(y, t) = V(y, t)^s f(y, t)``; ``s = 0`` returns ``f`` unchanged."""
    if s == 0:
        return f
    return f._wrap(f.values * f.grid.V**s)


def power(f: GridFunction, M: float) -> GridFunction:
    """``|f|^M`` with ``|0|^M = 0``."""
    if not (M > 0):
        raise DomainError(f"power must be positive, got {M}")
    if M == 1:
        return f.abs()
    return f._wrap(np.abs(f.values) ** M)


def truncate(f: GridFunction, a: float, b: float) -> GridFunction:
    """``f_{a,b} = 1_{X x (a,b)} f``: keeps the levels with ``a < t_j < b``."""
    if not (0 <= a < b):
        raise DomainError(f"truncation needs 0 <= a < b, got ({a}, {b})")
    keep = f.grid.levels.level_mask(a, b)
    if keep.all():
        return f
    return f._wrap(np.where(keep, f.values, 0))


def pairing(f: GridFunction, g: GridFunction):
    """``<f, g> = sum f conj(g) mu w``."""
    f._check(g)
    total = np.sum(f.values * np.conj(g.values)) * f.grid.cell_measure
    return total if np.iscomplexobj(total) else float(total)


def lq_norm(f: GridFunction, q: float) -> float:
    """``L^q(X^+)`` quasi-norm; ``q = inf`` is the maximum modulus."""
    a = np.abs(f.values)
    if q == math.inf:
        return float(a.max(initial=0.0))
    return float((np.sum(a**q) * f.grid.cell_measure) ** (1.0 / q))
