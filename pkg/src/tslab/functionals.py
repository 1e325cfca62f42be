"""Lusin and Carleson functionals, tent-space quasi-norms, Whitney averages and Z-norms."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import TOL, ball_max, ball_sum, max_sq
from .errors import DomainError
from .geometry import dyadic_whitney_cover
from .gridfn import GridFunction, HalfSpaceGrid, v_multiply

INF = math.inf


@dataclass(frozen=True)
class NormParams:
    """Exponents selecting one quasi-norm of the weighted tent scale.

    Parameters
    ----------
    p, q : float
        Outer and inner exponents in ``(0, inf]``.
    s : float
        Regularity; the norm is taken of ``V^{-s} f``.
    alpha : float
        Carleson exponent, only allowed with ``p = inf``.
    aperture : float
        Cone aperture for ``p < inf``.
    """

    p: float
    q: float
    s: float = 0.0
    alpha: float = 0.0
    aperture: float = 1.0

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (v > 0) or (math.isnan(v)):
                raise DomainError(f"{name} must lie in (0, inf], got {v}")
            object.__setattr__(self, name, float(v))
        if not math.isfinite(self.s) or not math.isfinite(self.alpha):
            raise DomainError("s and alpha must be finite")
        if self.alpha != 0 and self.p != INF:
            raise DomainError("a Carleson exponent alpha != 0 needs p = inf")
        if not (self.aperture > 0) or not math.isfinite(self.aperture):
            raise DomainError(f"aperture must be positive, got {self.aperture}")

    def replace(self, **kw) -> "NormParams":
        d = dict(p=self.p, q=self.q, s=self.s, alpha=self.alpha, aperture=self.aperture)
        d.update(kw)
        return NormParams(**d)


# ---------------------------------------------------------------- helpers


def weighted(f: GridFunction, s: float, weight: str = "volume") -> GridFunction:
    """``V^{-s} f`` (``weight="volume"``) or ``t^{-ns} f`` (``weight="power"``)."""
    if weight == "volume":
        return v_multiply(f, -s)
    if weight == "power":
        if s == 0:
            return f
        return f._wrap(f.values * f.grid.t ** (-f.grid.n * s))
    raise DomainError(f"unknown weight {weight!r}")


def _crop(active: np.ndarray, pad: int):
    """Bounding box of ``active`` grown by ``pad`` cells, clipped to the array."""
    idx = np.nonzero(active)
    if len(idx[0]) == 0:
        return None
    return tuple(
        slice(max(int(i.min()) - pad, 0), min(int(i.max()) + pad + 1, size))
        for i, size in zip(idx, active.shape)
    )


def _lp(field: np.ndarray, p: float, measure: float) -> float:
    if p == INF:
        return float(field.max(initial=0.0))
    return float((np.sum(field**p) * measure) ** (1.0 / p))


# ---------------------------------------------------------------- Lusin


def lusin_levels(g: GridFunction, q: float, aperture: float = 1.0, mode: str = "fast") -> np.ndarray:
    """Per-level contributions to ``A^q g(x)^q``, shape ``(*extents, J)``.

    Entry ``[x, j]`` is ``sum_{|y-x| < a t_j} |g(y, t_j)|^q mu(y) w / V(y, t_j)``,
    so partial sums over levels give the functional of truncations.
    """
    if not (0 < q < INF):
        raise DomainError("per-level contributions need 0 < q < inf")
    grid = g.grid
    F = np.abs(g.values) ** q * (grid.cell_measure / grid.V)
    out = np.zeros(grid.shape)
    box = _crop(np.any(F > 0, axis=-1), int(math.ceil(aperture * grid.t[-1] / grid.space.h)) + 1)
    if box is None:
        return out
    for j, t in enumerate(grid.t):
        Fj = F[box + (j,)]
        if Fj.any():
            out[box + (j,)] = ball_sum(Fj, max_sq(aperture * t / grid.space.h, False), mode)
    return np.maximum(out, 0.0)


def lusin(g: GridFunction, q: float, aperture: float = 1.0, mode: str = "fast") -> np.ndarray:
    """Lusin area functional ``A^q g`` on the spatial grid.

    For ``q < inf`` this is the ``L^q`` norm of ``g`` over the cone
    ``|x - y| < a t`` against ``mu(y) w / V(y, t)``; for ``q = inf`` it is
    the maximum of ``|g|`` over the cone.
    """
    if not (q > 0):
        raise DomainError(f"q must be positive, got {q}")
    grid = g.grid
    if q == INF:
        A = np.abs(g.values)
        out = np.zeros(grid.space.shape)
        box = _crop(np.any(A > 0, axis=-1), int(math.ceil(aperture * grid.t[-1] / grid.space.h)) + 1)
        if box is None:
            return out
        sub = out[box]
        for j, t in enumerate(grid.t):
            Aj = A[box + (j,)]
            if Aj.any():
                np.maximum(sub, ball_max(Aj, max_sq(aperture * t / grid.space.h, False), mode), out=sub)
        return out
    return lusin_levels(g, q, aperture, mode).sum(axis=-1) ** (1.0 / q)


# ---------------------------------------------------------------- Carleson


def carleson_radii(grid: HalfSpaceGrid, max_radius: float | None = None, geometric: bool = False) -> np.ndarray:
    """Radii of the Carleson ball family.

    The default family is ``k h / 2`` for ``1 <= k <= 2L/h``, which realizes
    every distinct grid ball.  ``geometric=True`` uses steps of ``sqrt(2)``
    from ``h/2`` instead.
    """
    h, L = grid.space.h, grid.space.L
    top = L if max_radius is None else min(L, max_radius)
    if geometric:
        k = np.arange(0, int(math.floor(2 * math.log2(2 * top / h) + TOL)) + 1)
        return (h / 2) * 2.0 ** (k / 2)
    return (h / 2) * np.arange(1, int(math.floor(2 * top / h + TOL)) + 1)


@dataclass(frozen=True)
class CarlesonResult:
    """Carleson field with the maximizing ball of the family."""

    field: np.ndarray
    value: float
    center: tuple | None
    radius: float | None


def carleson(
    g: GridFunction,
    q: float,
    alpha: float = 0.0,
    mode: str = "fast",
    max_radius: float | None = None,
    geometric: bool = False,
    full: bool = False,
):
    """Carleson functional ``C^q_alpha g`` on the spatial grid.

    For each ball ``B = B(c, r)`` of the family the value is
    ``mu(B)^{-alpha} (mu(B)^{-1} sum_{T(B)} |g|^q mu w)^{1/q}`` (``q < inf``)
    or ``mu(B)^{-alpha} max_{T(B)} |g|`` (``q = inf``), with the tent
    ``T(B) = {d(y, c) + t <= r}``.  The field at ``x`` is the largest value
    over balls containing ``x``.

    Parameters
    ----------
    full : bool
        Return a :class:`CarlesonResult` carrying the maximizing ball.
    """
    if not (q > 0):
        raise DomainError(f"q must be positive, got {q}")
    grid = g.grid
    h = grid.space.h
    t = grid.t
    A = np.abs(g.values)
    F = A if q == INF else A**q * grid.cell_measure
    radii = carleson_radii(grid, max_radius, geometric)
    out = np.zeros(grid.space.shape)
    best = (0.0, None, None)
    pad = int(math.ceil(2 * radii[-1] / h)) + 1 if len(radii) else 0
    box = _crop(np.any(F > 0, axis=-1), pad)
    if box is None or not len(radii):
        return CarlesonResult(out, 0.0, None, None) if full else out
    live = [j for j in range(grid.levels.J) if F[box + (j,)].any()]
    sub_out = out[box]
    origin = np.array([s.start for s in box])
    for r in radii:
        js = [j for j in live if t[j] <= r * (1 + TOL)]
        if not js:
            continue
        if q == INF:
            S = np.zeros(sub_out.shape)
            for j in js:
                np.maximum(S, ball_max(F[box + (j,)], max_sq((r - t[j]) / h, True), mode), out=S)
        else:
            S = np.zeros(sub_out.shape)
            for j in js:
                S += ball_sum(F[box + (j,)], max_sq((r - t[j]) / h, True), mode)
            np.maximum(S, 0.0, out=S)
        M_open = max_sq(r / h, False)
        mu = grid.space.cell_measure * grid.count_field(M_open)[box]
        v = mu ** (-alpha) * (S if q == INF else (S / mu) ** (1.0 / q))
        i = int(np.argmax(v))
        if v.flat[i] > best[0]:
            c = tuple(int(a) for a in np.array(np.unravel_index(i, v.shape)) + origin)
            best = (float(v.flat[i]), c, float(r))
        np.maximum(sub_out, ball_max(v, M_open, mode), out=sub_out)
    if full:
        return CarlesonResult(out, best[0], best[1], best[2])
    return out


def carleson_ball_value(g: GridFunction, q: float, alpha: float, center, r: float) -> float:
    """Direct evaluation of the Carleson quantity of one ball by tent enumeration."""
    from .geometry import tent_ball_mask

    grid = g.grid
    tent = tent_ball_mask(grid.space, grid.levels, center, r)
    mu = grid.space.ball_volume(center, r)
    A = np.abs(g.values)[tent]
    if q == INF:
        return float(mu ** (-alpha) * A.max(initial=0.0))
    return float(mu ** (-alpha) * (np.sum(A**q) * grid.cell_measure / mu) ** (1.0 / q))


# ---------------------------------------------------------------- tent norms


def tent_norm(
    f: GridFunction,
    params: NormParams,
    mode: str = "fast",
    weight: str = "volume",
    max_radius: float | None = None,
    geometric: bool = False,
) -> float:
    """Quasi-norm of ``f`` in the weighted tent space selected by ``params``.

    ``p < inf``: ``L^p`` norm of ``A^q(V^{-s} f)``.
    ``p = inf, q < inf``: supremum of ``C^q_alpha(V^{-s} f)``.
    ``p = q = inf``: supremum over balls of ``mu(B)^{-alpha} max_{T(B)} |V^{-s} f|``,
    which is the maximum of ``|V^{-s} f|`` when ``alpha = 0``.
    """
    g = weighted(f, params.s, weight)
    if params.p < INF:
        A = lusin(g, params.q, params.aperture, mode)
        return _lp(A, params.p, f.grid.space.cell_measure)
    if params.q == INF and params.alpha == 0:
        return float(np.abs(g.values).max(initial=0.0))
    field = carleson(g, params.q, params.alpha, mode, max_radius, geometric)
    return float(field.max(initial=0.0))


# ---------------------------------------------------------------- Whitney averages and Z-norms


def whitney_band_matrix(grid: HalfSpaceGrid, c1: float) -> np.ndarray:
    """``B[j, k]`` is true when level ``k`` lies in ``(t_j / c1, c1 t_j)``."""
    lt = np.log(grid.t)
    return np.abs(lt[None, :] - lt[:, None]) < math.log(c1) - TOL


def whitney_average(g: GridFunction, q: float, c0: float, c1: float, mode: str = "fast"):
    """``L^q`` Whitney average over ``Omega_{c0,c1}(x, t)`` at every grid point.

    The average uses the measure ``dmu dtau``, discretized as ``mu(xi) t_k w``,
    over the part of the region inside the grid.

    Returns
    -------
    avg : GridFunction
    clipped : int
        Number of grid points whose region is cut by the grid boundary.
    """
    if not (0 < q < INF):
        raise DomainError("Whitney averages need 0 < q < inf")
    if not (c0 > 0) or not (c1 > 1):
        raise DomainError("Whitney regions need c0 > 0 and c1 > 1")
    grid = g.grid
    h, t = grid.space.h, grid.t
    band = whitney_band_matrix(grid, c1)
    P = np.abs(g.values) ** q * t  # mu and w cancel in the average
    num = np.zeros(grid.shape)
    den = np.zeros(grid.shape)
    full_count = np.zeros(grid.levels.J)
    for j in range(grid.levels.J):
        M = max_sq(c0 * t[j] / h, False)
        count = grid.count_field(M)
        den[..., j] = count * t[band[j]].sum()
        full_count[j] = _unclipped_count(grid.n, M)
        Pj = P[..., band[j]].sum(axis=-1)
        if Pj.any():
            num[..., j] = ball_sum(Pj, M, mode)
    avg = (np.maximum(num, 0.0) / den) ** (1.0 / q)
    # clipping: spatial ball leaves the grid or the band leaves the level range
    lt = np.log(t)
    band_cut = (lt - math.log(c1) < lt[0] - grid.levels.w + TOL) | (lt + math.log(c1) > lt[-1] + grid.levels.w - TOL)
    counts = np.stack([grid.count_field(max_sq(c0 * tj / h, False)) for tj in t], axis=-1)
    clipped = int(np.sum((counts < full_count) | band_cut))
    return GridFunction(avg, grid), clipped


def _unclipped_count(n: int, M: int) -> int:
    from ._kernels import offsets

    return len(offsets(n, M))


def z_norm(
    f: GridFunction,
    p: float,
    q: float,
    s: float,
    c0: float = 1.0,
    c1: float = 2.0,
    mode: str = "fast",
    weight: str = "volume",
) -> float:
    """``L^p(X^+)`` norm of the Whitney average of ``V^{-s} f``."""
    if not (0 < p < INF):
        raise DomainError("Z-norms need 0 < p < inf")
    g = weighted(f, s, weight)
    W, _ = whitney_average(g, q, c0, c1, mode)
    return float((np.sum(W.values**p) * f.grid.cell_measure) ** (1.0 / p))


def z_norm_dyadic(f: GridFunction, p: float, q: float, s: float) -> float:
    """Dyadic Z-norm ``(sum_Q l(Q)^{n(1-ps)} [|f|^q]_Q^{p/q})^{1/p}`` over Whitney cubes.

    ``[|f|^q]_Q`` is the plain ``dy dt`` average over the grid part of the cube.
    """
    if not (0 < p < INF) or not (0 < q < INF):
        raise DomainError("dyadic Z-norms need finite positive p and q")
    grid = f.grid
    cover = dyadic_whitney_cover(grid.space, grid.levels)
    lab = cover.labels.ravel()
    tt = np.broadcast_to(grid.t, grid.shape).ravel()
    num = np.bincount(lab, weights=(np.abs(f.values) ** q).ravel() * tt, minlength=len(cover))
    den = np.bincount(lab, weights=tt, minlength=len(cover))
    ell = np.array([c.side for c in cover.cubes])
    terms = ell ** (grid.n * (1 - p * s)) * (num / den) ** (p / q)
    return float(np.sum(terms) ** (1.0 / p))
