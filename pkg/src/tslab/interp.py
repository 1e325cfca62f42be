"""K-functionals of weighted L^q couples and real-interpolation norm characterizations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ConvergenceError, DomainError
from .functionals import lusin_levels, weighted, z_norm
from .geometry import cone_mask
from .gridfn import GridFunction, HalfSpaceGrid

INF = math.inf
METHODS = ("convex-solve", "brute-force", "split-formula")


@dataclass(frozen=True)
class WeightedCouple:
    """The couple ``(L^q(m), L^q(m, w^q))`` on a finite index set.

    Parameters
    ----------
    m : ndarray
        Positive measure of each point.
    q : float
        Common exponent.
    w : ndarray
        Positive weight of each point.
    """

    m: np.ndarray
    q: float
    w: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float).ravel()
        w = np.asarray(self.w, dtype=float).ravel()
        if m.shape != w.shape:
            raise DomainError("measure and weight must have the same length")
        if not (np.all(m > 0) and np.all(np.isfinite(m)) and np.all(w > 0) and np.all(np.isfinite(w))):
            raise DomainError("measure and weight must be positive and finite")
        if not (0 < self.q < INF):
            raise DomainError(f"q must be finite and positive, got {self.q}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "w", w)

    def __len__(self):
        return len(self.m)

    def norm0(self, f) -> float:
        return float(np.sum(np.abs(f) ** self.q * self.m) ** (1 / self.q))

    def norm1(self, f) -> float:
        return float(np.sum(np.abs(f * self.w) ** self.q * self.m) ** (1 / self.q))

    @classmethod
    def from_cone(cls, grid: HalfSpaceGrid, x, q: float, s0: float, s1: float, aperture: float = 1.0):
        """Couple ``(L^q_{s0}, L^q_{s1})`` restricted to the cone at ``x``.

        Returns the couple and the boolean cell mask of the cone; ``f.values[mask]``
        are the matching point values.
        """
        mask = cone_mask(grid.space, grid.levels, x, aperture)
        V = grid.V[mask]
        m = grid.cell_measure * V ** (-q * s0 - 1)
        return cls(m, q, V ** (-(s1 - s0))), mask


# ---------------------------------------------------------------- K-functional


def _ab(f, couple: WeightedCouple):
    f = np.abs(np.asarray(f)).ravel()
    if f.shape != couple.m.shape:
        raise DomainError("function and couple sizes differ")
    keep = f > 0
    q = couple.q
    a = f[keep] ** q * couple.m[keep]
    b = f[keep] ** q * couple.w[keep] ** q * couple.m[keep]
    return a, b, couple.w[keep]


def _objective(U, W, t, e0, e1):
    return U**e0 + t * W**e1


def _split_theta(lam, w, q):
    if q == 1:
        raise DomainError("the split family needs q > 1")
    z = lam * w ** (q / (q - 1))
    return z / (1 + z)


def _split_solve(a, b, w, q, t, e0, e1):
    """Best member of the family ``theta_i = lam w_i^{q'} / (1 + lam w_i^{q'})``.

    For ``q > 1`` every interior minimizer lies in this family; for ``q = 1``
    the family is the set of thresholds ``theta_i = 1{w_i >= c}``.
    """
    U0, W0 = a.sum(), b.sum()
    best =(U0**e0, np.ones_like(a)) if U0**e0 <= t * W0**e1 else (t * W0**e1, np.zeros_like(a))
    if q == 1:
        order = np.argsort(-w)
        cu = np.concatenate([[0.0], np.cumsum(a[order])])
        cw = W0 - np.concatenate([[0.0], np.cumsum(b[order])])
        vals = _objective(cu, np.maximum(cw, 0.0), t, e0, e1)
        i = int(np.argmin(vals))
        th = np.zeros_like(a)
        th[order[:i]] = 1.0
        return (float(vals[i]), th) if vals[i] < best[0] else best
    qp = q / (q - 1)
    lw = np.log(w) * qp
    lo, hi = -lw.max() - 30.0, -lw.min() + 30.0

    def phi(u):
        th = _split_theta(math.exp(u), w, q)
        return _objective(np.sum(th**q * a), np.sum((1 - th) ** q * b), t, e0, e1)

    us = np.linspace(lo, hi, 401)
    vals = np.array([phi(u) for u in us])
    i = int(np.argmin(vals))
    res = minimize_scalar(phi, bounds=(us[max(i - 1, 0)], us[min(i + 1, len(us) - 1)]), method="bounded",
                          options={"xatol": 1e-12})
    u = res.x if res.fun < vals[i] else us[i]
    val = min(res.fun, vals[i])
    if val < best[0]:
        return float(val), _split_theta(math.exp(u), w, q)
    return best


def _cd_solve(a, b, q, t, e0, e1, theta0, tol=1e-10, max_sweeps=10_000):
    """Projected coordinate descent with exact scalar line searches.

    Each coordinate problem is convex, so its minimizer is the root of the
    derivative when one exists in ``(0, 1)`` and an endpoint otherwise.
    Returns ``(value, theta, gap, converged)`` where ``gap`` is the
    Frank-Wolfe gap, an upper bound on the suboptimality, when both sums
    are positive (``inf`` at a corner, where the objective is not smooth).
    """
    th = np.clip(np.array(theta0, dtype=float), 0.0, 1.0)
    gap = INF
    for _ in range(max_sweeps):
        U = float(np.sum(th**q * a))
        W = float(np.sum((1 - th) ** q * b))
        for i in range(len(a)):
            Uo = max(U - th[i] ** q * a[i], 0.0)
            Wo = max(W - (1 - th[i]) ** q * b[i], 0.0)

            def g(x):
                return _objective(Uo + x**q * a[i], Wo + (1 - x) ** q * b[i], t, e0, e1)

            def dg(x):
                Uc, Wc = Uo + x**q * a[i], Wo + (1 - x) ** q * b[i]
                du = e0 * Uc ** (e0 - 1) * q * x ** (q - 1) * a[i] if Uc > 0 else 0.0
                dw = e1 * Wc ** (e1 - 1) * q * (1 - x) ** (q - 1) * b[i] if Wc > 0 else 0.0
                return du - t * dw

            lo, hi = 1e-300, 1 - 1e-16
            if dg(lo) < 0 < dg(hi):
                th[i] = brentq(dg, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
            else:
                th[i] = 0.0 if g(0.0) <= g(1.0) else 1.0
            U = Uo + th[i] ** q * a[i]
            W = Wo + (1 - th[i]) ** q * b[i]
        U = float(np.sum(th**q * a))
        W = float(np.sum((1 - th) ** q * b))
        val = _objective(U, W, t, e0, e1)
        if U > 0 and W > 0:
            gu, gw = _grad_terms(th, U, W, a, b, q, t, e0, e1)
            grad = gu - gw
            gap = float(np.sum(grad * th - np.minimum(grad, 0.0)))
            # roundoff floor: gradient rounding plus its change over one ulp of theta
            spread = np.zeros_like(th)
            for d in (-1.0, 2.0):
                tn = np.clip(np.nextafter(th, d), 0.0, 1.0)
                hu, hw = _grad_terms(tn, U, W, a, b, q, t, e0, e1)
                spread = np.maximum(spread, np.abs(hu - hw - grad))
            floor = float(np.sum(spread) + 4 * np.finfo(float).eps * np.sum(gu + gw))
            if gap <= tol * val + floor:
                return val, th, gap, True
        else:
            return val, th, INF, False
    return val, th, gap, False


def _grad_terms(th, U, W, a, b, q, t, e0, e1):
    gu = e0 * U ** (e0 - 1) * q * th ** (q - 1) * a
    gw = t * e1 * W ** (e1 - 1) * q * (1 - th) ** (q - 1) * b
    return gu, gw


def _dual_norm(g, c, q):
    """``sup_{d >= 0} <g, d> / ||d c^{1/q}||_q`` for ``g >= 0``."""
    x = g / c ** (1 / q)
    if q == 1:
        return float(np.max(x))
    qp = q / (q - 1)
    return float(np.sum(x**qp) ** (1 / qp))


def _corner(a, b, q, t, e0, e1, tol=1e-10):
    """Value of the best corner (all ``theta = 0`` or all ``1``) if it is optimal, else ``None``.

    At a corner one sum vanishes and its term is ``||d c^{1/q}||_q^{q e}``
    along a move ``d``: linear growth when ``e = 1/q``, so optimality is a
    dual-norm test on the other term's gradient; slower growth when
    ``e > 1/q``, so the corner is optimal only if that gradient vanishes.
    """
    U, W = a.sum(), b.sum()
    one, zero = U**e0, t * W**e1
    if one <= zero:
        g = e0 * U ** (e0 - 1) * q * a  # decrease of the first term per unit decrease of theta
        if abs(e1 - 1 / q) < 1e-15:
            ok = _dual_norm(g, b, q) <= t * (1 + tol)
        else:
            ok = not np.any(g > 0)
        return one if ok else None
    h = t * e1 * W ** (e1 - 1) * q * b
    if abs(e0 - 1 / q) < 1e-15:
        ok = _dual_norm(h, a, q) <= 1 + tol
    else:
        ok = not np.any(h > 0)
    return zero if ok else None


def _pareto(U, W):
    order = np.lexsort((W, U))
    U, W = U[order], W[order]
    prev = np.concatenate([[INF], np.minimum.accumulate(W)[:-1]])
    keep = W < prev
    return U[keep], W[keep]


def _lower_hull(U, W):
    """Vertices of the lower-left convex chain of a Pareto front sorted by ``U``."""
    hu, hw = [], []
    for u, w in zip(U, W):
        while len(hu) >= 2 and (hu[-1] - hu[-2]) * (w - hw[-2]) - (hw[-1] - hw[-2]) * (u - hu[-2]) <= 0:
            hu.pop()
            hw.pop()
        hu.append(u)
        hw.append(w)
    return np.array(hu), np.array(hw)


def pareto_front(a, b, q, grid_points: int = 101, hull: bool = True, max_size: int = 2_000_000):
    """Candidate sums ``(sum theta^q a, sum (1-theta)^q b)`` over ``theta`` on a uniform grid.

    Every objective increasing in both sums attains its grid minimum on the
    Pareto front.  When it is also concave, the minimum sits at a vertex of
    the front's lower convex chain, and the chain of a sum of sets is built
    from the chains of the summands, so ``hull=True`` keeps only those
    vertices and the search stays exact and small.
    """
    th = np.linspace(0.0, 1.0, grid_points)
    FU, FW = np.zeros(1), np.zeros(1)
    for ai, bi in zip(a, b):
        du, dw = th**q * ai, (1 - th) ** q * bi
        FU, FW = _pareto((FU[:, None] + du[None, :]).ravel(), (FW[:, None] + dw[None, :]).ravel())
        if hull:
            FU, FW = _lower_hull(FU, FW)
        elif FU.size > max_size:
            raise DomainError("Pareto front too large for an exhaustive search")
    return FU, FW


def _solve(t, f, couple, e0, e1, method, convex_ok, front=None):
    if not (t > 0):
        raise DomainError(f"t must be positive, got {t}")
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}")
    a, b, w = _ab(f, couple)
    if len(a) == 0:
        return 0.0
    q = couple.q
    if method == "brute-force":
        if front is None:
            if len(a) > 8:
                raise DomainError("brute force is limited to 8 points")
            front = pareto_front(a, b, q, hull=e0 <= 1 and e1 <= 1)
        return float(np.min(_objective(front[0], front[1], t, e0, e1)))
    if method == "split-formula":
        if q < 1:
            raise DomainError("the split family needs q >= 1")
        return _split_solve(a, b, w, q, t, e0, e1)[0]
    if not convex_ok:
        raise DomainError("convex-solve needs q >= 1 (and p0, p1 >= 1 for powered functionals)")
    corner = _corner(a, b, q, t, e0, e1)
    if corner is not None:
        return float(corner)
    starts = [np.full(len(a), 0.5)]
    if q > 1:
        starts.append(_split_solve(a, b, w, q, t, e0, e1)[1])
    # solve in the variable that stays small (theta or 1 - theta) so that
    # near-corner optima keep full relative precision
    scale = 1.0
    if a.sum() ** e0 <= t * b.sum() ** e1:
        a, b, e0, e1, t, scale = b, a, e1, e0, 1.0 / t, t
        starts = [1.0 - th for th in starts]
    best, gap, ok = INF, INF, False
    for th0 in starts:
        v, _, g, conv = _cd_solve(a, b, q, t, e0, e1, th0)
        v, g = v * scale, g * scale
        if conv and (not ok or v < best):
            best, gap, ok = v, g, True
        elif not ok and v < best:
            best, gap = v, g
    if not ok:
        raise ConvergenceError("coordinate descent did not reach the gradient tolerance", best, gap)
    return float(best)


def k_functional(t: float, f, couple: WeightedCouple, method: str = "convex-solve") -> float:
    """``K(t, f) = inf_{f = f0 + f1} ||f0||_0 + t ||f1||_1`` over pointwise splits.

    Optimal splits can be taken pointwise and of the same sign as ``f``, so
    ``f0 = theta f`` with ``theta`` in ``[0, 1]`` per point.

    ``method`` is ``"convex-solve"`` (coordinate descent, ``q >= 1``),
    ``"brute-force"`` (every ``theta`` on a 101-point grid, at most 8 points)
    or ``"split-formula"`` (the one-parameter family of stationary splits).
    """
    e = 1.0 / couple.q
    return _solve(t, f, couple, e, e, method, couple.q >= 1)


def k_functional_powered(t: float, f, couple: WeightedCouple, p0: float, p1: float, method: str = "convex-solve") -> float:
    """``inf ||f0||_0^{p0} + t ||f1||_1^{p1}`` over pointwise splits."""
    if not (p0 > 0 and p1 > 0):
        raise DomainError("p0 and p1 must be positive")
    q = couple.q
    return _solve(t, f, couple, p0 / q, p1 / q, method, q >= 1 and p0 >= 1 and p1 >= 1)


@dataclass(frozen=True)
class KCurve:
    t: np.ndarray
    K: np.ndarray
    method: str

    def check_shape(self, rtol: float = 1e-8) -> tuple:
        """``(monotone, concave)`` on the samples, as functions of ``t``."""
        K, t = self.K, self.t
        scale = max(float(np.max(K)), 1e-300)
        mono = bool(np.all(np.diff(K) >= -rtol * scale))
        slopes = np.diff(K) / np.diff(t)
        conc = bool(np.all(np.diff(slopes) <= rtol * scale / np.min(np.diff(t))))
        # chord test, robust to uneven spacing
        for i in range(1, len(t) - 1):
            lam = (t[i] - t[i - 1]) / (t[i + 1] - t[i - 1])
            if K[i] < (1 - lam) * K[i - 1] + lam * K[i + 1] - rtol * scale:
                conc = False
        return mono, conc


def k_curve(ts, f, couple: WeightedCouple, method: str = "convex-solve") -> KCurve:
    ts = np.asarray(ts, dtype=float)
    front = None
    if method == "brute-force":
        a, b, _ = _ab(f, couple)
        front = pareto_front(a, b, couple.q, hull=couple.q >= 1)
    e = 1.0 / couple.q
    K = np.array([_solve(t, f, couple, e, e, method, couple.q >= 1, front) for t in ts])
    return KCurve(ts, K, method)


def power_theorem_check(f, couple: WeightedCouple, p0: float, p1: float, theta: float, method: str = "convex-solve"):
    """Both sides of the power theorem on a finite couple.

    Returns ``(lhs, rhs)`` with ``lhs = sum_k 2^{-k eta} K_pow(2^k)`` for the
    couple of powers ``(L_0^{p0}, L_1^{p1})`` and ``eta = theta p_theta / p1``,
    and ``rhs = sum_k 2^{-k theta p_theta} K(2^k)^{p_theta}``, the
    ``(theta, p_theta)`` quasi-norm raised to ``p_theta``.
    """
    ptheta = 1.0 / ((1 - theta) / p0 + theta / p1)
    eta = theta * ptheta / p1
    a, b, w = _ab(f, couple)
    if len(a) == 0:
        return 0.0, 0.0
    lw = np.log2(w)
    ks = np.arange(int(math.floor(-lw.max())) - 60, int(math.ceil(-lw.min())) + 61)
    lhs = sum(2.0 ** (-k * eta) * k_functional_powered(2.0**k, f, couple, p0, p1, method) for k in ks)
    rhs = sum(2.0 ** (-k * theta * ptheta) * k_functional(2.0**k, f, couple, method) ** ptheta for k in ks)
    return float(lhs), float(rhs)


# ---------------------------------------------------------------- Gilbert norms


@dataclass(frozen=True)
class GilbertNorms:
    disc: float
    g2: float
    g3: float

    def ratios(self) -> dict:
        out = {}
        for (na, va), (nb, vb) in [(("disc", self.disc), ("g2", self.g2)), (("disc", self.disc), ("g3", self.g3)),
                                   (("g2", self.g2), ("g3", self.g3))]:
            out[f"{na}/{nb}"] = va / vb if vb > 0 else math.nan
        return out

    @property
    def spread(self) -> float:
        v = [self.disc, self.g2, self.g3]
        return max(v) / min(v) if min(v) > 0 else math.nan


def _band_index(w, r):
    """``k`` with ``r^{-k} < w <= r^{-k+1}``."""
    return np.floor(1 - np.log(w) / math.log(r) + 1e-12).astype(np.int64)


def _power_integral(lo, hi, e):
    """``int_lo^hi s^e ds/s`` with ``lo`` or ``hi`` possibly ``0`` or ``inf``."""
    if e == 0:
        return math.log(hi / lo)
    return (hi**e - lo**e) / e


def gilbert_norms(f, couple: WeightedCouple, theta: float, p: float, r: float, per_octave: int = 16,
                  exact: bool = False) -> GilbertNorms:
    """The three equivalent norms of ``(L^q(m), L^q(m, w^q))_{theta, p}``.

    ``disc`` is the band sum over ``w in (r^{-k}, r^{-k+1}]``.  The integral
    forms ``g2`` and ``g3`` use a geometric s-grid with ``per_octave`` cells
    per octave spanning the weight range padded by ``r^4``, integrating the
    power of ``s`` exactly on each cell with the set evaluated at the cell's
    geometric midpoint; the tails outside the grid are integrated in closed
    form.  ``exact=True`` integrates the step functions exactly instead.
    """
    if not (0 < theta < 1) or not (p > 0) or not (r > 1):
        raise DomainError("need theta in (0,1), p > 0 and r > 1")
    fa = np.abs(np.asarray(f, dtype=complex if np.iscomplexobj(f) else float)).ravel()
    if not np.any(fa):
        return GilbertNorms(0.0, 0.0, 0.0)
    q, m, w = couple.q, couple.m, couple.w
    u0 = fa**q * m  # L^q(m) mass
    u1 = u0 * w**q  # L^q(m w^q) mass
    k = _band_index(w, r)
    ks, inv = np.unique(k, return_inverse=True)
    band = np.bincount(inv, weights=u0)
    disc = float(np.sum((r ** (-ks * theta) * band ** (1 / q)) ** p) ** (1 / p))

    e2, e3 = (1 - theta) * p, -theta * p
    inv_w = 1.0 / w
    if exact:
        edges = np.concatenate([[0.0], np.unique(inv_w), [INF]])
    else:
        lo = inv_w.min() / r**4
        hi = inv_w.max() * r**4
        cells = int(math.ceil(per_octave * math.log2(hi / lo)))
        edges = np.concatenate([[0.0], lo * 2.0 ** (np.arange(cells + 1) / per_octave), [INF]])
    g2 = g3 = 0.0
    for i in range(len(edges) - 1):
        a, b = edges[i], edges[i + 1]
        if exact:
            # s strictly inside (a, b): w <= 1/s iff 1/w >= b
            F2 = np.sum(u1[inv_w >= b])
            F3 = np.sum(u0[inv_w <= a])
        elif a == 0:
            F2, F3 = u1.sum(), 0.0
        elif b == INF:
            F2, F3 = 0.0, u0.sum()
        else:
            s = math.sqrt(a * b)
            F2 = np.sum(u1[w <= 1 / s])
            F3 = np.sum(u0[w > 1 / s])
        if F2 > 0:
            g2 += F2 ** (p / q) * _power_integral(a, b, e2)
        if F3 > 0:
            g3 += F3 ** (p / q) * _power_integral(a, b, e3)
    return GilbertNorms(disc, float(g2 ** (1 / p)), float(g3 ** (1 / p)))


# ---------------------------------------------------------------- tent-space characterizations


@dataclass(frozen=True)
class TentInterpReport:
    """The three characterizations of the real interpolation quasi-norm.

    ``params`` holds ``(p0, p1, q, s0, s1, theta, r)`` after ordering so that
    ``s0 < s1``.
    """

    inftynorm: float
    zeronorm: float
    seqnorm: float
    params: tuple
    weight: str
    swapped: bool

    def ratios(self) -> dict:
        v = {"inf": self.inftynorm, "0": self.zeronorm, "seq": self.seqnorm}
        out = {}
        for x, y in (("inf", "0"), ("inf", "seq"), ("0", "seq")):
            out[f"{x}/{y}"] = v[x] / v[y] if v[y] > 0 else math.nan
        return out


def p_theta(p0: float, p1: float, theta: float) -> float:
    return 1.0 / ((1 - theta) / p0 + theta / p1)


def _cumulative_norms(f: GridFunction, q: float, s: float, p: float, weight: str, aperture: float):
    """Per-level Lusin contributions and the ``L^p`` norm of any union of levels."""
    c = lusin_levels(weighted(f, s, weight), q, aperture, "fast")
    mu = f.grid.space.cell_measure

    def norm_of(levels_mask) -> float:
        A = c[..., levels_mask].sum(axis=-1)
        return float((np.sum(A ** (p / q)) * mu) ** (1 / p))

    return norm_of


def tent_interp_norms(
    f: GridFunction,
    p0: float,
    p1: float,
    q: float,
    s0: float,
    s1: float,
    theta: float,
    r: float = 2.0,
    weight: str = "volume",
    aperture: float = 1.0,
) -> TentInterpReport:
    """Truncation characterizations of ``(T^{p0,q}_{s0}, T^{p1,q}_{s1})_{theta, p_theta}``.

    With ``d = n (s1 - s0) > 0``:

    * ``inftynorm = || tau^{d(1-theta)} ||f_{tau,inf}||_{T^{p_theta,q}_{s1}} ||_{L^{p_theta}(dtau/tau)}``
    * ``zeronorm = || tau^{-d theta} ||f_{0,tau}||_{T^{p_theta,q}_{s0}} ||_{L^{p_theta}(dtau/tau)}``
    * ``seqnorm = || r^{-k theta d} ||f on [r^{k-1}, r^k)||_{T^{p_theta,q}_{s0}} ||_{l^{p_theta}}``

    When ``s1 < s0`` the couple is reversed and ``theta`` replaced by ``1 - theta``.
    The truncated norms are step functions of ``tau`` on the grid, so the
    ``dtau/tau`` integrals are evaluated exactly between consecutive levels.
    """
    if s0 == s1:
        raise DomainError("the characterizations need s0 != s1")
    if not (0 < theta < 1):
        raise DomainError("theta must lie in (0, 1)")
    if not (r > 1):
        raise DomainError("r must exceed 1")
    swapped = s1 < s0
    if swapped:
        p0, p1, s0, s1, theta = p1, p0, s1, s0, 1 - theta
    pt = p_theta(p0, p1, theta)
    grid = f.grid
    t = grid.t
    J = len(t)
    d = grid.n * (s1 - s0)
    params = (p0, p1, q, s0, s1, theta, r)
    if f.is_zero():
        return TentInterpReport(0.0, 0.0, 0.0, params, weight, swapped)
    norm1 = _cumulative_norms(f, q, s1, pt, weight, aperture)
    norm0 = _cumulative_norms(f, q, s0, pt, weight, aperture)
    idx = np.arange(J)

    # tau in [t_{j-1}, t_j): f_{tau,inf} keeps levels >= j; f_{0,tau} keeps levels < j
    edges = np.concatenate([[0.0], t, [INF]])
    inf_acc = zero_acc = 0.0
    for j in range(J + 1):
        a, b = edges[j], edges[j + 1]
        if j < J:
            v = norm1(idx >= j)
            if v > 0:
                inf_acc += v**pt * _power_integral(a, b, d * (1 - theta) * pt)
        if j > 0:
            v = norm0(idx < j)
            if v > 0:
                zero_acc += v**pt * _power_integral(a, b, -d * theta * pt)

    k = np.floor(np.log(t) / math.log(r) + 1e-9).astype(np.int64) + 1  # t in [r^{k-1}, r^k)
    seq_acc = 0.0
    for kk in np.unique(k):
        v = norm0(k == kk)
        seq_acc += (r ** (-kk * theta * d) * v) ** pt
    return TentInterpReport(inf_acc ** (1 / pt), zero_acc ** (1 / pt), seq_acc ** (1 / pt), params, weight, swapped)


def t_z_equivalence(
    f: GridFunction,
    p0: float,
    p1: float,
    q: float,
    s0: float,
    s1: float,
    theta: float,
    c0: float = 1.0,
    c1: float = 2.0,
    weight: str = "volume",
):
    """Sequence characterization with ``r = c1`` and aperture ``c0/c1`` against the Z-norm.

    Returns ``(seqnorm, znorm)`` where the Z-norm uses ``p_theta`` and ``s_theta``.
    """
    pt = p_theta(p0, p1, theta)
    st = (1 - theta) * s0 + theta * s1
    rep = tent_interp_norms(f, p0, p1, q, s0, s1, theta, r=c1, weight=weight, aperture=c0 / c1)
    z = z_norm(f, pt, q, st, c0, c1, weight=weight)
    return rep.seqnorm, z
