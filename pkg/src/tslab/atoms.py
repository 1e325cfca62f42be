"""Atoms, the Vitali covering with its partition of unity, and atomic decomposition."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .functionals import NormParams, lusin, tent_norm
from .geometry import _lt, delta_exponent, tent_ball_mask, tent_set_mask
from .gridfn import GridFunction, HalfSpaceGrid, lq_norm, v_multiply

INF = math.inf
SIZE_TOL = 1e-9


@dataclass(frozen=True)
class Ball:
    """Ball ``B(center, radius)`` with a grid-index centre and a physical radius."""

    center: tuple
    radius: float

    def check(self, grid: HalfSpaceGrid) -> "Ball":
        c = grid.space.check_index(self.center)
        if not (self.radius > 0):
            raise DomainError(f"ball radius must be positive, got {self.radius}")
        return Ball(c, float(self.radius))

    def volume(self, grid: HalfSpaceGrid) -> float:
        return grid.space.ball_volume(self.center, self.radius)

    def tent(self, grid: HalfSpaceGrid) -> np.ndarray:
        return tent_ball_mask(grid.space, grid.levels, self.center, self.radius)


@dataclass(frozen=True, eq=False)
class Atom:
    """Candidate ``T^{p,q}_s``-atom associated with a ball.

    Values are kept on a spatial box around the support; ``values``
    materializes the full grid function.
    """

    grid: HalfSpaceGrid
    box: tuple
    local: np.ndarray = field(repr=False)
    ball: Ball
    p: float
    q: float
    s: float = 0.0

    @classmethod
    def from_function(cls, a: GridFunction, ball: Ball, p: float, q: float, s: float = 0.0) -> "Atom":
        box = _support_box(a.values)
        return cls(a.grid, box, a.values[box].copy(), ball, p, q, s)

    @property
    def values(self) -> GridFunction:
        out = np.zeros(self.grid.shape, dtype=self.local.dtype)
        out[self.box] = self.local
        return GridFunction(out, self.grid)


def _support_box(vals: np.ndarray) -> tuple:
    spatial = np.any(vals != 0, axis=-1)
    idx = np.nonzero(spatial)
    if len(idx[0]) == 0:
        return tuple(slice(0, 0) for _ in spatial.shape)
    return tuple(slice(int(i.min()), int(i.max()) + 1) for i in idx)


@dataclass(frozen=True)
class AtomReport:
    """Outcome of :func:`atom_validate`.

    ``slack`` is ``mu(B)^{delta_{p,q}} - ||a||_{T^{q,q}_s}``; ``derived`` is the
    measured ``||a||_{T^{p,q}_s}``, which is at most one for a valid atom.
    """

    support_ok: bool
    size: float
    bound: float
    slack: float
    size_ok: bool
    derived: float
    derived_ok: bool

    @property
    def valid(self) -> bool:
        return self.support_ok and self.size_ok


def atom_size(a: GridFunction, q: float, s: float) -> float:
    """``||a||_{T^{q,q}_s}``, which equals ``||V^{-s} a||_{L^q(X^+)}``."""
    return lq_norm(v_multiply(a, -s), q)


def atom_validate(atom: Atom, mode: str = "fast", tol: float = SIZE_TOL) -> AtomReport:
    """Check support in the tent, the size bound, and the derived ``T^{p,q}_s`` bound."""
    grid = atom.grid
    ball = atom.ball.check(grid)
    if not (atom.p > 0) or not (atom.q >= atom.p):
        raise DomainError("atoms need p > 0 and q >= p")
    a = atom.values
    support_ok = not np.any(a.values[~ball.tent(grid)])
    mu = ball.volume(grid)
    bound = mu ** delta_exponent(atom.p, atom.q)
    size = atom_size(a, atom.q, atom.s)
    derived = tent_norm(a, NormParams(atom.p, atom.q, atom.s), mode)
    return AtomReport(
        support_ok=support_ok,
        size=size,
        bound=bound,
        slack=bound - size,
        size_ok=size <= bound * (1 + tol),
        derived=derived,
        derived_ok=derived <= 1 + tol,
    )


def normalized_atom(grid: HalfSpaceGrid, profile: np.ndarray, ball: Ball, p: float, q: float, s: float = 0.0) -> Atom:
    """Restrict ``profile`` to the tent of ``ball`` and scale it to the size bound exactly."""
    ball = ball.check(grid)
    vals = np.where(ball.tent(grid), profile, 0.0)
    a = GridFunction(vals, grid)
    size = atom_size(a, q, s)
    if size == 0:
        return Atom.from_function(a, ball, p, q, s)
    target = ball.volume(grid) ** delta_exponent(p, q)
    return Atom.from_function(a * (target / size), ball, p, q, s)


# ---------------------------------------------------------------- covering


@dataclass(frozen=True)
class CoveringPartition:
    """Selected centres, radii ``dist(x, O^c)/10`` and the partition of unity.

    ``phi[i]`` is stored as a box of slices and the values inside it.
    """

    O: np.ndarray = field(repr=False)
    centers: list
    radii: np.ndarray
    boxes: list = field(repr=False)
    overlap: int

    def __len__(self):
        return len(self.centers)

    def phi(self, i: int) -> np.ndarray:
        out = np.zeros(self.O.shape)
        box, vals = self.boxes[i]
        out[box] = vals
        return out

    def phi_sum(self) -> np.ndarray:
        out = np.zeros(self.O.shape)
        for box, vals in self.boxes:
            out[box] += vals
        return out


def _box(space, x, r):
    R = int(math.ceil(r / space.h)) + 1
    return tuple(slice(max(c - R, 0), min(c + R + 1, e)) for c, e in zip(x, space.extents))


def covering_partition(space, O: np.ndarray) -> CoveringPartition:
    """Vitali-type covering of ``O`` with a subordinate partition of unity.

    Points are visited by decreasing ``r(x) = dist(x, O^c)/10`` (ties by grid
    index) and a point is selected when no selected ball ``B(x_i, r_i)``
    contains it.  Selected centres are then at least ``max(r_i, r_j)`` apart,
    so the quarter balls are disjoint.  The partition functions are
    normalized hats ``max(0, 1 - d(x, x_i)/(2 r_i))``.
    """
    O = np.asarray(O, dtype=bool)
    if O.shape != space.shape:
        raise DomainError("set shape does not match the grid")
    if not O.any() or O.all():
        raise DomainError("covering needs a nonempty proper subset of the grid")
    r = space.distance_to(~O) / 10.0
    pts = np.argwhere(O)
    flat = np.ravel_multi_index(tuple(pts.T), space.shape)
    order = np.lexsort((flat, -r[tuple(pts.T)]))
    coords = np.indices(space.shape)
    covered = np.zeros(space.shape, dtype=bool)
    centers, radii = [], []
    for k in order:
        x = tuple(int(v) for v in pts[k])
        if covered[x]:
            continue
        rx = float(r[x])
        centers.append(x)
        radii.append(rx)
        box = _box(space, x, rx)
        d2 = sum((coords[a][box] - x[a]) ** 2 for a in range(space.n))
        covered[box] |= _lt(d2, rx / space.h)
    radii = np.array(radii)
    hats, total = [], np.zeros(space.shape)
    for x, rx in zip(centers, radii):
        box = _box(space, x, 2 * rx)
        d = space.h * np.sqrt(sum((coords[a][box] - x[a]) ** 2 for a in range(space.n)))
        psi = np.where(O[box], np.maximum(0.0, 1.0 - d / (2 * rx)), 0.0)
        hats.append((box, psi))
        total[box] += psi
    boxes = [(box, np.divide(psi, total[box], out=np.zeros_like(psi), where=psi > 0)) for box, psi in hats]
    X = np.array(centers, dtype=float) * space.h
    if len(X):
        D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
        overlap = int(((D < 5 * (radii[:, None] + radii[None, :]))).sum(axis=1).max())
    else:
        overlap = 0
    return CoveringPartition(O, centers, radii, boxes, overlap)


# ---------------------------------------------------------------- decomposition


@dataclass(frozen=True)
class AtomTerm:
    lam: float
    atom: Atom
    k: int
    i: int


@dataclass(frozen=True)
class LevelInfo:
    """Diagnostics of one level set ``O^k = {G > 2^k}``."""

    k: int
    count: int
    measure: float
    quarter_measure: float
    full: bool


@dataclass
class AtomicDecomposition:
    """Coefficients and atoms with ``sum lam * atom = f``."""

    grid: HalfSpaceGrid
    p: float
    q: float
    s: float
    terms: list
    levels: list
    G: np.ndarray = field(repr=False)
    residual: float = 0.0
    folded: int = 0

    def __len__(self):
        return len(self.terms)

    @property
    def lp_sum(self) -> float:
        """``sum |lam|^p``."""
        return float(sum(t.lam**self.p for t in self.terms))

    def reconstruct(self) -> GridFunction:
        cplx = any(np.iscomplexobj(t.atom.local) for t in self.terms)
        acc = np.zeros(self.grid.shape, dtype=complex if cplx else float)
        for t in self.terms:
            acc[t.atom.box] += t.lam * t.atom.local
        return GridFunction(acc, self.grid)

    def budget_chain(self) -> tuple:
        """``(sum 2^{(k+1)p} sum_i mu(B_i/4), sum 2^{(k+1)p} mu(O^k))``."""
        p = self.p
        left = sum(2.0 ** ((L.k + 1) * p) * L.quarter_measure for L in self.levels)
        right = sum(2.0 ** ((L.k + 1) * p) * L.measure for L in self.levels)
        return left, right

    def distribution_check(self) -> tuple:
        """Layer-cake sandwich ``(lower, ||G||_p^p, upper)``.

        With ``S = sum_k 2^{kp} mu(O^k)`` over all integers ``k`` (levels below
        the lowest computed one repeat its set), the exact bounds are
        ``(1 - 2^{-p}) S <= ||G||_p^p <= (2^p - 1) S``.
        """
        p = self.p
        if not self.levels:
            return 0.0, 0.0, 0.0
        lo = self.levels[0]
        S = sum(2.0 ** (L.k * p) * L.measure for L in self.levels)
        S += lo.measure * 2.0 ** (lo.k * p) / (2.0**p - 1.0)
        val = float(np.sum(self.G**p) * self.grid.space.cell_measure)
        return (1 - 2.0**-p) * S, val, (2.0**p - 1) * S


def _lq(vals: np.ndarray, q: float, measure: float) -> float:
    a = np.abs(vals)
    if q == INF:
        return float(a.max(initial=0.0))
    return float((np.sum(a**q) * measure) ** (1.0 / q))


def _support_touches_edge(support: np.ndarray) -> bool:
    for ax in range(support.ndim):
        lo = np.take(support, 0, axis=ax)
        hi = np.take(support, -1, axis=ax)
        if lo.any() or hi.any():
            return True
    return False


def decompose(f: GridFunction, p: float, q: float = INF, s: float = 0.0, mode: str = "fast") -> AtomicDecomposition:
    """Atomic decomposition of ``f`` in ``T^{p,q}_s`` for ``0 < p <= 1``.

    With ``g = V^{-s} f`` and ``G = A^q g`` the level sets ``O^k = {G > 2^k}``
    split the support of ``g`` into bands ``T(O^k) minus T(O^{k+1})``; each band
    is cut by the partition of unity of ``O^k``.  The piece at centre ``x_i``
    is an atom for ``B(x_i, 14 r_i)`` with coefficient ``2^{k+1} mu(B)^{1/p}``,
    raised if needed so the ``T^{q,q}`` size bound holds.  When ``O^k`` is the
    whole grid the band becomes a single atom over a ball whose tent contains it.
    """
    if not (0 < p <= 1):
        raise DomainError(f"atomic decompositions need 0 < p <= 1, got {p}")
    if not (q >= p):
        raise DomainError("atomic decompositions need q >= p")
    grid = f.grid
    space = grid.space
    g = v_multiply(f, -s)
    G = lusin(g, q, 1.0, mode)
    dec = AtomicDecomposition(grid, p, q, s, [], [], G)
    if g.is_zero():
        return dec
    support = np.any(g.values != 0, axis=-1)
    if _support_touches_edge(support):
        raise DomainError("support of f touches the grid boundary; enlarge the grid")
    delta = delta_exponent(p, q)
    k = int(math.floor(math.log2(G[G > 0].min()))) - 1
    O = G > 2.0**k
    T_k = tent_set_mask(space, grid.levels, O)
    terms, levels, folded = [], [], 0
    while O.any():
        O_next = G > 2.0 ** (k + 1)
        T_next = tent_set_mask(space, grid.levels, O_next) if O_next.any() else np.zeros(grid.shape, bool)
        band = T_k & ~T_next
        piece = np.where(band, g.values, 0)
        full = bool(O.all())
        quarter = 0.0
        count = 0
        if piece.any():
            if full:
                ball = _bounding_ball(grid, piece)
            else:
                cov = covering_partition(space, O)
                parts = []
                for i, (x, rx) in enumerate(zip(cov.centers, cov.radii)):
                    box, phi = cov.boxes[i]
                    parts.append((Ball(x, 14 * rx), box, phi[..., None] * piece[box]))
                    quarter += space.ball_volume(x, rx / 4)
                count = len(cov)
            if full:
                parts = [(ball, tuple(slice(None) for _ in space.shape), piece)]
            for i, (ball, box, at) in enumerate(parts):
                if not np.any(at):
                    continue
                mu = ball.volume(grid)
                lam = 2.0 ** (k + 1) * mu ** (1.0 / p)
                size = _lq(at, q, grid.cell_measure)
                need = size * mu ** (-delta)
                if need > lam:
                    lam = need
                    folded += 1
                local = at / lam
                if s != 0:
                    local = local * grid.V[box] ** s
                terms.append(AtomTerm(lam, Atom(grid, box, local, ball, p, q, s), k, i))
        elif not full:
            cov = covering_partition(space, O)
            count = len(cov)
            quarter = sum(space.ball_volume(x, rx / 4) for x, rx in zip(cov.centers, cov.radii))
        levels.append(LevelInfo(k, count, space.cell_measure * int(O.sum()), quarter, full))
        k += 1
        O, T_k = O_next, T_next
    dec.terms = terms
    dec.levels = levels
    dec.folded = folded
    rec = dec.reconstruct()
    denom = lq_norm(f, q)
    dec.residual = lq_norm(rec - f, q) / denom if denom > 0 else 0.0
    return dec


def _bounding_ball(grid: HalfSpaceGrid, piece: np.ndarray) -> Ball:
    """Ball centred near the middle of the support whose tent contains the support."""
    space = grid.space
    cells = np.argwhere(piece != 0)
    mid = np.rint((cells[:, :-1].min(0) + cells[:, :-1].max(0)) / 2).astype(int)
    c = tuple(int(v) for v in mid)
    d = space.h * np.sqrt(((cells[:, :-1] - mid) ** 2).sum(-1))
    R = float(np.max(d + grid.t[cells[:, -1]]))
    return Ball(c, R)
