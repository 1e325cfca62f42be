"""Ball sums and ball maxima on uniform grids.

Every ball is described in integer grid units by the largest admissible
squared offset ``M``: the ball is the set of offsets ``d`` in Z^n with
``|d|^2 <= M``.  ``M = -1`` is the empty ball.  Values outside the grid
count as zero for sums and are ignored for maxima.
"""
from __future__ import annotations

from functools import lru_cache
from math import ceil, floor, isqrt

import numpy as np
from scipy.ndimage import maximum_filter1d

TOL = 1e-9


def max_sq(rho: float, closed: bool) -> int:
    """Largest integer squared offset inside a ball of radius ``rho`` (grid units).

    The open ball keeps ``|d| < rho`` and the closed ball ``|d| <= rho``.
    Near-ties are resolved with a relative tolerance so that radii built from
    sums and differences of grid quantities behave as their exact values.
    """
    if rho < 0 or (rho == 0 and not closed):
        return -1
    r2 = rho * rho
    eps = TOL * max(1.0, r2)
    if closed:
        return int(floor(r2 + eps))
    return int(ceil(r2 - eps)) - 1


@lru_cache(maxsize=None)
def offsets(n: int, M: int) -> np.ndarray:
    """All integer vectors of length ``n`` with squared norm at most ``M``."""
    if M < 0:
        return np.zeros((0, n), dtype=np.int64)
    R = isqrt(M)
    axes = np.arange(-R, R + 1)
    grid = np.stack(np.meshgrid(*([axes] * n), indexing="ij"), axis=-1).reshape(-1, n)
    keep = (grid**2).sum(axis=1) <= M
    out = grid[keep]
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def row_offsets(n: int, M: int) -> tuple:
    """Rows of the ball: pairs ``(d', w)`` with ``d'`` in Z^(n-1) and half-width ``w``."""
    if M < 0:
        return ()
    if n == 1:
        return (((), isqrt(M)),)
    rows = []
    for d in offsets(n - 1, M):
        rows.append((tuple(int(v) for v in d), isqrt(M - int((d**2).sum()))))
    return tuple(rows)


def _shift_slices(shape, d):
    """Slices so that ``out[dst] op= src_array[src]`` realizes ``out[i] op= a[i + d]``."""
    dst, src = [], []
    for size, k in zip(shape, d):
        if k >= 0:
            dst.append(slice(0, max(size - k, 0)))
            src.append(slice(min(k, size), size))
        else:
            dst.append(slice(min(-k, size), size))
            src.append(slice(0, max(size + k, 0)))
    return tuple(dst), tuple(src)


def _segment_sums(F: np.ndarray, w: int) -> np.ndarray:
    """Sums of ``F`` over windows ``[i-w, i+w]`` along the last axis (zero padded)."""
    N = F.shape[-1]
    P = np.zeros(F.shape[:-1] + (N + 1,), dtype=F.dtype)
    np.cumsum(F, axis=-1, out=P[..., 1:])
    hi = np.minimum(np.arange(N) + w + 1, N)
    lo = np.maximum(np.arange(N) - w, 0)
    return P[..., hi] - P[..., lo]


def ball_sum(F: np.ndarray, M: int, mode: str = "exact") -> np.ndarray:
    """Sum of ``F`` over the ball ``{|d|^2 <= M}`` around every grid point.

    Parameters
    ----------
    F : ndarray
        Values on an n-dimensional spatial grid.
    M : int
        Largest squared offset, as returned by :func:`max_sq`.
    mode : {"exact", "fast"}
        ``"exact"`` adds shifted copies for every offset of the ball.
        ``"fast"`` uses prefix sums along the last axis and adds one row
        segment per (n-1)-dimensional offset.
    """
    n = F.ndim
    out = np.zeros_like(F)
    if M < 0:
        return out
    if mode == "exact":
        for d in offsets(n, M):
            dst, src = _shift_slices(F.shape, d)
            out[dst] += F[src]
        return out
    if mode != "fast":
        raise ValueError(f"unknown mode {mode!r}")
    seg = {}
    for dp, w in row_offsets(n, M):
        if w not in seg:
            seg[w] = _segment_sums(F, w)
        dst, src = _shift_slices(F.shape, dp + (0,))
        out[dst] += seg[w][src]
    return out


def ball_max(F: np.ndarray, M: int, mode: str = "exact") -> np.ndarray:
    """Maximum of ``F`` over the ball ``{|d|^2 <= M}`` around every grid point.

    Points of the ball outside the grid are ignored; an empty ball gives ``-inf``.
    """
    n = F.ndim
    out = np.full(F.shape, -np.inf)
    if M < 0:
        return out
    if mode == "exact":
        for d in offsets(n, M):
            dst, src = _shift_slices(F.shape, d)
            np.maximum(out[dst], F[src], out=out[dst])
        return out
    if mode != "fast":
        raise ValueError(f"unknown mode {mode!r}")
    filt = {}
    for dp, w in row_offsets(n, M):
        if w not in filt:
            filt[w] = maximum_filter1d(F, size=2 * w + 1, axis=-1, mode="constant", cval=-np.inf)
        dst, src = _shift_slices(F.shape, dp + (0,))
        np.maximum(out[dst], filt[w][src], out=out[dst])
    return out
