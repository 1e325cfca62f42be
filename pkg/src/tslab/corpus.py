"""Deterministic random test functions.

Functions are drawn as resolution-independent recipes inside a physical
window and then sampled on a grid, so a corpus generated for a grid and
for its refinement describes the same continuum functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .geometry import tent_ball_mask
from .gridfn import GridFunction, HalfSpaceGrid

PROFILES = ("cylindrical-smooth", "cylindrical-rough", "single-tent", "multi-bump", "atom-like")


@dataclass(frozen=True)
class Window:
    """Physical box ``lo <= y <= hi`` and level range ``t_lo <= t <= t_hi`` for supports."""

    lo: tuple
    hi: tuple
    t_lo: float
    t_hi: float
    h: float  # spacing of the grid the window was taken from

    @classmethod
    def of(cls, grid: HalfSpaceGrid, aperture_max: float = 2.0) -> "Window":
        """Window avoiding the two extreme levels at each end and a cone-wide margin."""
        t = grid.t
        if len(t) < 6:
            raise ConfigurationError("need at least 6 levels to leave a two-level margin")
        t_lo, t_hi = float(t[2]), float(t[-3])
        sp = grid.space
        margin = aperture_max * t_hi
        lo = tuple(o + margin for o in sp.origin)
        hi = tuple(o + (e - 1) * sp.h - margin for o, e in zip(sp.origin, sp.extents))
        if any(b - a < 4 * sp.h for a, b in zip(lo, hi)):
            raise ConfigurationError("grid too small for the support margin; enlarge the extents")
        return cls(lo, hi, t_lo, t_hi, sp.h)

    def snap(self, c) -> np.ndarray:
        """Round a physical point to the window grid."""
        return np.round(np.asarray(c) / self.h) * self.h


def _bump(u):
    """Smooth bump ``exp(1 - 1/(1 - u^2))`` on ``|u| < 1``, peak 1."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


def _smooth_spec(rng, win: Window, n: int, scale: float = 1.0) -> dict:
    lo, hi = np.array(win.lo), np.array(win.hi)
    half = (hi - lo) / 2
    R = scale * rng.uniform(0.25, 0.6) * half.min()
    c = rng.uniform(lo + R, hi - R)
    la, lb = math.log(win.t_lo), math.log(win.t_hi)
    sig = scale * rng.uniform(0.2, 0.45) * (lb - la)
    tau = rng.uniform(la + sig, lb - sig)
    amp = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    return dict(c=c, R=R, tau=tau, sig=sig, amp=amp)


def _eval_smooth(spec, y, t):
    r = np.linalg.norm(y - spec["c"], axis=-1)
    return spec["amp"] * _bump(r / spec["R"]) * _bump((np.log(t) - spec["tau"]) / spec["sig"])


def _tent_spec(rng, win: Window, n: int) -> dict:
    lo, hi = np.array(win.lo), np.array(win.hi)
    r_hi = min(win.t_hi, (hi - lo).min() / 2)
    r = rng.uniform(min(2 * win.t_lo, 0.8 * r_hi), r_hi)
    c = win.snap(rng.uniform(lo + r, hi - r))
    return dict(c=c, r=r)


def _in_tent(spec, y, t, win: Window):
    d = np.linalg.norm(y - spec["c"], axis=-1)
    return (d + t <= spec["r"] * (1 - 1e-9)) & (t >= win.t_lo * (1 - 1e-12))


def _make(profile: str, rng, win: Window, n: int):
    """Return a callable ``(y, t) -> values`` and an optional tent ball ``(c, r)``."""
    if profile == "cylindrical-smooth":
        spec = _smooth_spec(rng, win, n)
        return (lambda y, t: _eval_smooth(spec, y, t)), None
    if profile == "multi-bump":
        specs = [_smooth_spec(rng, win, n, scale=0.6) for _ in range(int(rng.integers(2, 5)))]
        return (lambda y, t: sum(_eval_smooth(s, y, t) for s in specs)), None
    if profile == "cylindrical-rough":
        lo, hi = np.array(win.lo), np.array(win.hi)
        cells = int(rng.integers(3, 7))
        box_lo = lo + rng.uniform(0, 0.2, n) * (hi - lo)
        box_hi = hi - rng.uniform(0, 0.2, n) * (hi - lo)
        la, lb = math.log(win.t_lo), math.log(win.t_hi)
        ta = la + rng.uniform(0, 0.25) * (lb - la)
        tb = lb - rng.uniform(0, 0.25) * (lb - la)
        tcells = int(rng.integers(2, 5))
        vals = rng.uniform(-1, 1, size=(cells,) * n + (tcells,))

        def rough(y, t):
            u = (y - box_lo) / (box_hi - box_lo)
            v = (np.log(t) - ta) / (tb - ta)
            inside = np.all((u >= 0) & (u < 1), axis=-1) & (v >= 0) & (v < 1)
            iu = np.clip(np.floor(u * cells).astype(int), 0, cells - 1)
            iv = np.clip(np.floor(v * tcells).astype(int), 0, tcells - 1)
            iu, iv = np.broadcast_arrays(iu, iv[..., None])
            idx = tuple(iu[..., k] for k in range(n)) + (iv[..., 0],)
            return np.where(inside, vals[idx], 0.0)

        return rough, None
    if profile == "single-tent":
        spec = _tent_spec(rng, win, n)
        inner = _smooth_spec(rng, win, n)
        inner["c"] = spec["c"]
        inner["R"] = 2 * spec["r"]
        inner["tau"] = math.log(spec["r"] / 2)
        inner["sig"] = 4.0

        def tent_fn(y, t):
            return np.where(_in_tent(spec, y, t, win), _eval_smooth(inner, y, t), 0.0)

        return tent_fn, (spec["c"], spec["r"])
    if profile == "atom-like":
        spec = _tent_spec(rng, win, n)
        amp = rng.uniform(0.5, 2.0)
        return (lambda y, t: amp * _in_tent(spec, y, t, win).astype(float)), (spec["c"], spec["r"])
    raise ConfigurationError(f"unknown corpus profile {profile!r}; choose from {', '.join(PROFILES)}")


def random_corpus(
    grid: HalfSpaceGrid,
    seed: int,
    profile: str,
    count: int = 8,
    window: Window | None = None,
) -> list:
    """Generate ``count`` grid functions of one profile.

    Parameters
    ----------
    grid : HalfSpaceGrid
        Grid to sample on.
    seed : int
        Seed of the generator; equal seeds give bit-identical corpora.
    profile : str
        One of :data:`PROFILES`.
    count : int
        Number of functions.
    window : Window, optional
        Support window.  Pass the window of a coarse grid to sample the same
        functions on a refinement.
    """
    if profile not in PROFILES:
        raise ConfigurationError(f"unknown corpus profile {profile!r}; choose from {', '.join(PROFILES)}")
    win = Window.of(grid) if window is None else window
    rng = np.random.default_rng([int(seed), PROFILES.index(profile)])
    out = []
    for _ in range(count):
        fn, ball = _make(profile, rng, win, grid.n)
        f = grid.from_callable(fn)
        if ball is not None:
            c = grid.space.check_index(np.rint((ball[0] - np.array(grid.space.origin)) / grid.space.h))
            tent = tent_ball_mask(grid.space, grid.levels, c, ball[1])
            if np.any(f.values[~tent]):
                raise AssertionError("tent-profile function escaped its tent")
        out.append(f)
    return out


def mixed_corpus(grid: HalfSpaceGrid, seed: int, count: int, window: Window | None = None) -> list:
    """Round-robin mixture of all profiles, ``count`` functions in total."""
    per = -(-count // len(PROFILES))
    pools = [random_corpus(grid, seed, p, per, window) for p in PROFILES]
    out = []
    for i in range(per):
        for pool in pools:
            if len(out) < count:
                out.append(pool[i])
    return out


def random_atoms(grid: HalfSpaceGrid, seed: int, count: int, p: float, q: float, s: float = 0.0,
                 window: Window | None = None) -> list:
    """Random atoms on balls with grid centres and radii in ``h/2`` steps.

    Profiles are smooth signed bumps; each is restricted to the tent and
    scaled to meet the size bound with equality.
    """
    from .atoms import Ball, normalized_atom

    win = Window.of(grid) if window is None else window
    rng = np.random.default_rng([int(seed), 101])
    sp = grid.space
    half = sp.h / 2
    out = []
    while len(out) < count:
        width = min(b - a for a, b in zip(win.lo, win.hi))
        r_hi = min(2 * win.t_hi, width / 2)
        r = max(2, int(rng.uniform(2 * win.t_lo, r_hi) / half)) * half
        c = np.array([rng.uniform(a + r, b - r) if b - a > 2 * r else (a + b) / 2 for a, b in zip(win.lo, win.hi)])
        idx = sp.check_index(np.rint((c - np.array(sp.origin)) / sp.h))
        x = np.asarray(sp.point(idx))
        k = rng.uniform(0.5, 3.0)
        prof = grid.from_callable(lambda y, t: _bump(np.linalg.norm(y - x, axis=-1) / r) * np.cos(k * np.log(t))).values
        prof = prof * rng.choice([-1.0, 1.0], size=prof.shape[-1])
        a = normalized_atom(grid, prof, Ball(idx, r), p, q, s)
        if np.any(a.local):
            out.append(a)
    return out


def random_couples(seed: int, count: int, size: int = 64, q: float = 2.0, decades: float = 3.0) -> list:
    """Random ``(m, w, f)`` triples for weighted-couple experiments.

    Measures are uniform on ``[1/2, 2]``, weights log-uniform over
    ``10^{+-decades}``, values standard normal.
    """
    rng = np.random.default_rng([int(seed), 202])
    out = []
    for _ in range(count):
        m = rng.uniform(0.5, 2.0, size)
        w = 10.0 ** rng.uniform(-decades, decades, size)
        f = rng.standard_normal(size)
        out.append((m, w, f))
    return out
