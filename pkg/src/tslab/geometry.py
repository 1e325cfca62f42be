"""Uniform Euclidean grids, their balls, and regions of the half-space."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.ndimage import distance_transform_edt

from ._kernels import TOL, ball_sum, max_sq, offsets
from .errors import ConfigurationError, DomainError

INF = math.inf


def delta_exponent(p: float, q: float) -> float:
    """Return ``1/q - 1/p`` with ``1/inf = 0``.

    Examples
    --------
    >>> delta_exponent(4, 2)
    0.25
    >>> delta_exponent(math.inf, 1)
    1.0
    """
    for v in (p, q):
        if not (v > 0):
            raise DomainError(f"exponent must lie in (0, inf], got {v}")
    inv = lambda v: 0.0 if v == INF else 1.0 / v
    return inv(q) - inv(p)


@dataclass(frozen=True)
class SpaceGrid:
    """Uniform grid ``origin + h * i`` with ``0 <= i < extents`` in R^n.

    Every point carries the measure ``h**n``.
    """

    n: int
    extents: tuple
    h: float
    origin: tuple = None

    def __post_init__(self):
        ext = tuple(int(e) for e in np.atleast_1d(self.extents))
        if self.n < 1 or len(ext) != self.n:
            raise ConfigurationError(f"need {self.n} positive extents, got {self.extents}")
        if any(e < 1 for e in ext):
            raise ConfigurationError(f"extents must be positive, got {ext}")
        if not (self.h > 0):
            raise ConfigurationError(f"spacing must be positive, got {self.h}")
        org = (0.0,) * self.n if self.origin is None else tuple(float(o) for o in np.atleast_1d(self.origin))
        if len(org) != self.n:
            raise ConfigurationError("origin length does not match dimension")
        object.__setattr__(self, "extents", ext)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "origin", org)

    @property
    def shape(self) -> tuple:
        return self.extents

    @property
    def size(self) -> int:
        return int(np.prod(self.extents))

    @property
    def cell_measure(self) -> float:
        return self.h**self.n

    @property
    def L(self) -> float:
        """Domain extent: the longest side length."""
        return max(self.extents) * self.h

    def coords(self) -> np.ndarray:
        """Physical coordinates, shape ``(*extents, n)``."""
        axes = [o + self.h * np.arange(e) for o, e in zip(self.origin, self.extents)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def check_index(self, x) -> tuple:
        x = tuple(int(v) for v in np.atleast_1d(x))
        if len(x) != self.n or any(not (0 <= v < e) for v, e in zip(x, self.extents)):
            raise DomainError(f"point {x} is not on the grid {self.extents}")
        return x

    def point(self, x) -> np.ndarray:
        x = self.check_index(x)
        return np.array(self.origin) + self.h * np.array(x, dtype=float)

    def ball_mask(self, x, r: float, closed: bool = False) -> np.ndarray:
        """Boolean mask of ``B(x, r)`` (``d < r``, or ``d <= r`` when closed)."""
        x = self.check_index(x)
        M = max_sq(r / self.h, closed)
        mask = np.zeros(self.shape, dtype=bool)
        off = offsets(self.n, M)
        if len(off):
            pts = off + np.array(x)
            ok = np.all((pts >= 0) & (pts < np.array(self.extents)), axis=1)
            mask[tuple(pts[ok].T)] = True
        return mask

    def ball_volume(self, x, r: float) -> float:
        """``V(x, r) = h^n * #{y : d(x, y) < r}``, clipped to the grid."""
        if not (r > 0):
            raise DomainError(f"radius must be positive, got {r}")
        x = self.check_index(x)
        M = max_sq(r / self.h, False)
        R = math.isqrt(M)
        if all(R <= v < e - R for v, e in zip(x, self.extents)):
            return self.cell_measure * len(offsets(self.n, M))
        return self.cell_measure * int(self.ball_mask(x, r).sum())

    def volume_field(self, r: float, closed: bool = False, mode: str = "exact") -> np.ndarray:
        """``V(x, r)`` at every grid point."""
        M = max_sq(r / self.h, closed)
        return self.cell_measure * ball_sum(np.ones(self.shape), M, mode)

    def distance_to(self, mask: np.ndarray) -> np.ndarray:
        """Grid distance from every point to the nearest point of ``mask``.

        Returns ``inf`` everywhere when ``mask`` is empty.
        """
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            return np.full(self.shape, np.inf)
        return self.h * distance_transform_edt(~mask)

    def refine(self) -> "SpaceGrid":
        return SpaceGrid(self.n, tuple(2 * e for e in self.extents), self.h / 2, self.origin)

    def doubling_constant(self, r_min: float | None = None, r_max: float | None = None) -> float:
        """Largest ``V(x, 2r) / V(x, r)`` for unclipped balls with radii in the window.

        Radii run over ``k*h/2`` in ``[r_min, r_max]``; defaults are ``h`` and ``L/4``.
        """
        r_min = self.h if r_min is None else r_min
        r_max = self.L / 4 if r_max is None else r_max
        worst = 1.0
        for k in range(1, int(2 * r_max / self.h + TOL) + 1):
            r = k * self.h / 2
            if r < r_min - TOL * self.h:
                continue
            small = len(offsets(self.n, max_sq(r / self.h, False)))
            big = len(offsets(self.n, max_sq(2 * r / self.h, False)))
            worst = max(worst, big / small)
        return worst


@dataclass(frozen=True)
class TimeLevels:
    """Geometric levels ``t_j = t_min * ratio**j`` for ``0 <= j < J``.

    With ``ratio = 2**(1/m)`` every dyadic band ``(2^k, 2^(k+1)]`` holds
    exactly ``m`` levels.  Each level carries the weight ``ln(ratio)`` of
    the measure ``dt/t``.
    """

    t_min: float
    m: int | None
    J: int
    ratio: float = None

    def __post_init__(self):
        if not (self.t_min > 0):
            raise ConfigurationError(f"t_min must be positive, got {self.t_min}")
        if int(self.J) < 1:
            raise ConfigurationError(f"need at least one level, got J={self.J}")
        object.__setattr__(self, "J", int(self.J))
        if self.m is not None:
            if int(self.m) != self.m or self.m < 1:
                raise ConfigurationError(f"levels per octave must be a positive integer, got {self.m}")
            object.__setattr__(self, "m", int(self.m))
            object.__setattr__(self, "ratio", 2.0 ** (1.0 / self.m))
        elif self.ratio is None or not (self.ratio > 1):
            raise ConfigurationError("level ratio must exceed 1")

    @classmethod
    def from_ratio(cls, t_min: float, ratio: float, J: int) -> "TimeLevels":
        return cls(t_min, None, J, float(ratio))

    @property
    def aligned(self) -> bool:
        return self.m is not None

    @property
    def w(self) -> float:
        return math.log(self.ratio)

    @property
    def t(self) -> np.ndarray:
        if self.m is not None:
            return self.t_min * 2.0 ** (np.arange(self.J) / self.m)
        return self.t_min * self.ratio ** np.arange(self.J)

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def refine(self) -> "TimeLevels":
        if self.m is None:
            return TimeLevels.from_ratio(self.t_min, math.sqrt(self.ratio), 2 * self.J)
        return TimeLevels(self.t_min, 2 * self.m, 2 * self.J)

    def level_mask(self, a: float, b: float) -> np.ndarray:
        """Levels with ``a < t_j < b``."""
        t = self.t
        return (t > a) & (t < b)


# ---------------------------------------------------------------- regions

REGION_KINDS = ("cone", "translated cone", "tent", "Whitney region", "cylinder", "Whitney cube")


@dataclass(frozen=True)
class Region:
    """An index set of the half-space grid, stored as a boolean mask ``(*extents, J)``."""

    kind: str
    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise DomainError(f"unknown region kind {self.kind!r}")
        m = np.asarray(self.mask, dtype=bool)
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    def __contains__(self, idx) -> bool:
        return bool(self.mask[tuple(idx)])

    def __len__(self) -> int:
        return int(self.mask.sum())


def _dist_from(space: SpaceGrid, x) -> np.ndarray:
    """Squared distance to ``x`` in grid units."""
    x = space.check_index(x)
    idx = np.indices(space.shape)
    return sum((idx[i] - x[i]) ** 2 for i in range(space.n))


def _lt(d2: np.ndarray, rho) -> np.ndarray:
    """``sqrt(d2) < rho`` with the tie convention of the ball kernels (broadcasting)."""
    rho = np.asarray(rho, dtype=float)
    r2 = np.where(rho > 0, rho * rho, -1.0)
    return d2 < np.where(rho > 0, r2 - TOL * np.maximum(1.0, r2), -1.0)


def _le(d2: np.ndarray, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    r2 = rho * rho
    return (rho >= 0) & (d2 <= r2 + TOL * np.maximum(1.0, r2))


def cone_mask(space: SpaceGrid, levels: TimeLevels, x, aperture: float = 1.0) -> np.ndarray:
    """``Gamma^a(x) = {(y, t) : d(x, y) < a t}``."""
    if not (aperture > 0):
        raise DomainError(f"aperture must be positive, got {aperture}")
    d2 = _dist_from(space, x)[..., None]
    return _lt(d2, aperture * levels.t / space.h)


def translated_cone_mask(space: SpaceGrid, levels: TimeLevels, x, s: float) -> np.ndarray:
    """``Gamma(x) + s = {(y, t) : d(x, y) < t - s}``."""
    if not (s >= 0):
        raise DomainError(f"translation must be nonnegative, got {s}")
    d2 = _dist_from(space, x)[..., None]
    return _lt(d2, (levels.t - s) / space.h)


def tent_ball_mask(space: SpaceGrid, levels: TimeLevels, center, r: float) -> np.ndarray:
    """Tent over ``B(c, r)``: ``{(y, t) : d(y, c) + t <= r}``."""
    if not (r > 0):
        raise DomainError(f"radius must be positive, got {r}")
    d2 = _dist_from(space, center)[..., None]
    return _le(d2, (r - levels.t) / space.h)


def tent_set_mask(space: SpaceGrid, levels: TimeLevels, O: np.ndarray) -> np.ndarray:
    """Tent over a set of grid points: ``{(y, t) : dist(y, O^c) >= t}``.

    Only grid points count as the complement, so on a grid this is the
    complement of the union of the cones over ``O^c``.
    """
    O = np.asarray(O, dtype=bool)
    if O.shape != space.shape:
        raise DomainError("set shape does not match the grid")
    if O.all():
        return np.ones(space.shape + (levels.J,), dtype=bool)
    d2 = _edt_sq(~O)
    return ~_lt(d2[..., None], levels.t / space.h)


def _edt_sq(mask: np.ndarray) -> np.ndarray:
    """Exact squared grid distance to the nearest ``True`` cell of ``mask``."""
    d = distance_transform_edt(~mask)
    return np.rint(d * d)


def cylinder_mask(space: SpaceGrid, levels: TimeLevels, center, r: float, a: float, b: float) -> np.ndarray:
    """``B(c, r) x (a, b)``."""
    if not (r > 0) or not (0 <= a < b):
        raise DomainError("cylinder needs r > 0 and 0 <= a < b")
    return space.ball_mask(center, r)[..., None] & levels.level_mask(a, b)


def whitney_region_mask(space: SpaceGrid, levels: TimeLevels, x, t: float, c0: float, c1: float) -> np.ndarray:
    """``Omega_{c0,c1}(x, t) = B(x, c0 t) x (t/c1, c1 t)``."""
    if not (c0 > 0) or not (c1 > 1) or not (t > 0):
        raise DomainError("Whitney region needs c0 > 0, c1 > 1, t > 0")
    band = whitney_band(levels, t, c1)
    return space.ball_mask(x, c0 * t)[..., None] & band


def whitney_band(levels: TimeLevels, t: float, c1: float) -> np.ndarray:
    """Levels ``tau`` with ``t/c1 < tau < c1 t``."""
    gap = np.abs(np.log(levels.t / t))
    return gap < math.log(c1) - TOL


def build_region(kind: str, space: SpaceGrid, levels: TimeLevels, **params) -> Region:
    """Construct one of the regions of the half-space.

    Parameters by kind: ``cone(x, aperture=1)``, ``translated cone(x, s)``,
    ``tent(center, r)`` or ``tent(O)``, ``Whitney region(x, t, c0, c1)``,
    ``cylinder(center, r, a, b)``, ``Whitney cube(cube)``.
    """
    try:
        if kind == "cone":
            m = cone_mask(space, levels, params["x"], params.get("aperture", 1.0))
        elif kind == "translated cone":
            m = translated_cone_mask(space, levels, params["x"], params["s"])
        elif kind == "tent":
            if "O" in params:
                m = tent_set_mask(space, levels, params["O"])
            else:
                m = tent_ball_mask(space, levels, params["center"], params["r"])
        elif kind == "Whitney region":
            m = whitney_region_mask(space, levels, params["x"], params["t"], params["c0"], params["c1"])
        elif kind == "cylinder":
            m = cylinder_mask(space, levels, params["center"], params["r"], params["a"], params["b"])
        elif kind == "Whitney cube":
            m = params["cube"].mask(space, levels)
        else:
            raise DomainError(f"unknown region kind {kind!r}")
    except KeyError as exc:
        raise DomainError(f"missing parameter {exc} for region {kind!r}") from None
    return Region(kind, m)


# ---------------------------------------------------------------- dyadic cubes


@dataclass(frozen=True)
class DyadicCube:
    """Dyadic cube ``Q = 2^k (corner + [0,1)^n)``; its Whitney cube is ``Q x (2^k, 2^(k+1)]``."""

    k: int
    corner: tuple

    @property
    def side(self) -> float:
        return 2.0**self.k

    def mask(self, space: SpaceGrid, levels: TimeLevels) -> np.ndarray:
        ks = dyadic_level(levels.t)
        corners = np.floor(space.coords() / self.side + TOL).astype(np.int64)
        inside = np.all(corners == np.array(self.corner), axis=-1)
        return inside[..., None] & (ks == self.k)


def dyadic_level(t: np.ndarray) -> np.ndarray:
    """Integer ``k`` with ``2^k < t <= 2^(k+1)``."""
    return (np.ceil(np.log2(t) - TOL) - 1).astype(np.int64)


@dataclass(frozen=True)
class WhitneyCover:
    """Partition of the half-space grid into Whitney cubes.

    ``labels[y, j]`` is the index in ``cubes`` of the cube containing the cell.
    """

    cubes: list
    labels: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.cubes)


def dyadic_whitney_cover(space: SpaceGrid, levels: TimeLevels) -> WhitneyCover:
    """Assign every cell of the half-space grid to its Whitney cube."""
    if not levels.aligned:
        raise ConfigurationError(
            "dyadic Whitney cover needs levels with ratio 2**(1/m) for an integer m, "
            f"got ratio {levels.ratio!r}; rebuild the levels with an integer m"
        )
    ks = dyadic_level(levels.t)
    coords = space.coords()
    keys = []
    for k in ks:
        corner = np.floor(coords / 2.0**k + TOL).astype(np.int64)
        keys.append(np.concatenate([np.full(space.shape + (1,), k), corner], axis=-1))
    keys = np.stack(keys, axis=space.n)  # (*extents, J, n+1)
    flat = keys.reshape(-1, space.n + 1)
    uniq, inv = np.unique(flat, axis=0, return_inverse=True)
    cubes = [DyadicCube(int(u[0]), tuple(int(v) for v in u[1:])) for u in uniq]
    labels = inv.reshape(space.shape + (levels.J,))
    labels.setflags(write=False)
    return WhitneyCover(cubes, labels)
