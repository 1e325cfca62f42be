"""Ratio suites for the norm inequalities and checks of the exact identities."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .atoms import Atom, atom_validate
from .errors import ConfigurationError, DomainError
from .functionals import NormParams, carleson_ball_value, tent_norm, weighted, z_norm, z_norm_dyadic
from .geometry import cylinder_mask, delta_exponent
from .gridfn import GridFunction, lq_norm, pairing, power, v_multiply
from .interp import t_z_equivalence, tent_interp_norms
from .io import fmt

INF = math.inf
IDENTITY_TOL = 1e-10
PROOF_TOL = 1e-9


def workers(default: int | None = None) -> int:
    """Worker count: ``TSLAB_THREADS`` if set, else ``default``, else the core count."""
    env = os.environ.get("TSLAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigurationError(f"TSLAB_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigurationError("TSLAB_THREADS must be at least 1")
        return n
    return default if default else (os.cpu_count() or 1)


def ordered_map(fn, items, n_workers: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; order is preserved."""
    items = list(items)
    if n_workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_workers) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class RatioReport:
    """Per-function numerator and denominator norms of one inequality.

    Rows with a zero denominator are kept but excluded from the ratio
    statistics; ``stable`` is set by :func:`refinement_stability`.
    """

    suite: str
    params: tuple
    numerators: np.ndarray
    denominators: np.ndarray
    stable: bool | None = None
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "numerators", np.asarray(self.numerators, dtype=float))
        object.__setattr__(self, "denominators", np.asarray(self.denominators, dtype=float))

    @property
    def ratios(self) -> np.ndarray:
        d = self.denominators
        out = np.full(d.shape, np.nan)
        ok = d > 0
        out[ok] = self.numerators[ok] / d[ok]
        return out

    @property
    def excluded(self) -> int:
        return int(np.sum(~(self.denominators > 0)))

    def _valid(self):
        r = self.ratios
        return r[~np.isnan(r)]

    @property
    def min(self) -> float:
        r = self._valid()
        return float(r.min()) if r.size else math.nan

    @property
    def median(self) -> float:
        r = self._valid()
        return float(np.median(r)) if r.size else math.nan

    @property
    def max(self) -> float:
        r = self._valid()
        return float(r.max()) if r.size else math.nan

    @property
    def spread(self) -> float:
        return self.max / self.min if self.min > 0 else math.nan

    def csv(self) -> str:
        head = "suite,params,index,numerator,denominator,ratio\n"
        ps = " ".join(fmt(p) if isinstance(p, (int, float)) else str(p) for p in self.params)
        rows = []
        for i, (n, d, r) in enumerate(zip(self.numerators, self.denominators, self.ratios)):
            label = self.labels[i] if self.labels else str(i)
            rows.append(f"{self.suite},{ps},{label},{fmt(n)},{fmt(d)},{'' if np.isnan(r) else fmt(r)}\n")
        return head + "".join(rows)

    def summary(self) -> str:
        ps = " ".join(fmt(p) if isinstance(p, (int, float)) else str(p) for p in self.params)
        lines = [
            f"[{self.suite}]",
            f"params = {ps}",
            f"count = {len(self.denominators)}",
            f"excluded = {self.excluded}",
            f"min = {fmt(self.min)}",
            f"median = {fmt(self.median)}",
            f"max = {fmt(self.max)}",
            f"stable = {'unchecked' if self.stable is None else str(self.stable).lower()}",
        ]
        return "\n".join(lines) + "\n"


def refinement_stability(coarse: RatioReport, fine: RatioReport, factor: float = 2.0) -> tuple:
    """Mark both reports with whether their max ratios agree within ``factor``."""
    a, b = coarse.max, fine.max
    ok = bool(a > 0 and b > 0 and max(a / b, b / a) <= factor)
    return replace(coarse, stable=ok), replace(fine, stable=ok)


def ratio_suite(suite: str, params: tuple, items, numerator, denominator, n_workers: int = 1) -> RatioReport:
    """Evaluate ``numerator(x)`` and ``denominator(x)`` for every item."""
    pairs = ordered_map(lambda x: (numerator(x), denominator(x)), items, n_workers)
    num = [p[0] for p in pairs]
    den = [p[1] for p in pairs]
    return RatioReport(suite, params, np.array(num), np.array(den))


# ---------------------------------------------------------------- suites


def hls_suite(
    corpus,
    p0: float,
    p1: float,
    q: float,
    s0: float,
    s1: float,
    alpha: float = 0.0,
    mode: str = "fast",
    max_radius: float | None = None,
    n_workers: int = 1,
) -> RatioReport:
    """``||f||_{T^{p1,q}_{s1}} / ||f||_{T^{p0,q}_{s0}}`` with ``s1 - s0 = delta_{p0,p1}``.

    With ``p1 = inf`` and ``alpha > 0`` the numerator is the Carleson-type
    norm and the relation reads ``(s1 + alpha) - s0 = delta_{p0,inf}``.
    """
    if not (0 < p0 < p1):
        raise ConfigurationError("embeddings need 0 < p0 < p1")
    d = delta_exponent(p0, p1)
    if alpha != 0:
        if p1 != INF or not (1 < q < INF) or alpha < 0:
            raise ConfigurationError("alpha > 0 needs p1 = inf and 1 < q < inf")
        if abs((s1 + alpha) - s0 - d) > 1e-12:
            raise ConfigurationError(f"need (s1 + alpha) - s0 = delta_(p0,inf) = {d!r}, got {(s1 + alpha) - s0!r}")
    elif abs((s1 - s0) - d) > 1e-12:
        raise ConfigurationError(f"need s1 - s0 = delta_(p0,p1) = 1/p1 - 1/p0 = {d!r}, got {s1 - s0!r}")
    hi = NormParams(p1, q, s1, alpha)
    lo = NormParams(p0, q, s0)
    return ratio_suite(
        "hls",
        (p0, p1, q, s0, s1, alpha),
        corpus,
        lambda f: tent_norm(f, hi, mode, max_radius=max_radius),
        lambda f: tent_norm(f, lo, mode),
        n_workers,
    )


def _conj_exp(p: float) -> float:
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1)


def duality_suite(pairs, p: float, q: float, s: float, mode: str = "fast", max_radius: float | None = None,
                  n_workers: int = 1) -> RatioReport:
    """``|<f, g>| / (||f||_{T^{p,q}_s} ||g||_{T^{p',q'}_{-s}})`` for ``p >= 1``, ``1 < q < inf``."""
    if not (1 <= p < INF) or not (1 < q < INF):
        raise ConfigurationError("duality pairs need 1 <= p < inf and 1 < q < inf (use duality_atom_check for p < 1)")
    P = NormParams(p, q, s)
    D = NormParams(_conj_exp(p), _conj_exp(q), -s)
    return ratio_suite(
        "duality",
        (p, q, s),
        pairs,
        lambda fg: abs(pairing(fg[0], fg[1])),
        lambda fg: tent_norm(fg[0], P, mode) * tent_norm(fg[1], D, mode, max_radius=max_radius),
        n_workers,
    )


@dataclass(frozen=True)
class AtomDualityRow:
    pairing: float
    ball_value: float
    norm: float

    @property
    def slack(self) -> float:
        return self.ball_value - self.pairing


def duality_atom_check(atoms, g: GridFunction, mode: str = "fast", max_radius: float | None = None) -> list:
    """``|<a, g>| <= ||g||_{T^{inf,q'}_{-s; delta_{1,p}}}`` for atoms ``a`` with ``p < 1``.

    Hoelder on the tent of the atom's ball gives the bound with constant
    exactly one, since the powers of ``mu(B)`` cancel.  Each row records the
    pairing, the Carleson value on the atom's own ball (the sharp bound) and
    the full norm.  The atom balls must belong to the Carleson family (grid
    centres, radii in ``h/2`` steps) for ``ball_value <= norm``.
    """
    rows = []
    norm_cache = {}
    for a in atoms:
        if not (0 < a.p < 1) or not (1 <= a.q < INF):
            raise ConfigurationError("the atom branch needs p in (0,1) and q in [1, inf)")
        alpha = delta_exponent(1.0, a.p)
        qp = _conj_exp(a.q)
        gw = weighted(g, -a.s)
        key = (qp, alpha, a.s)
        if key not in norm_cache:
            norm_cache[key] = tent_norm(g, NormParams(INF, qp, -a.s, alpha), mode, max_radius=max_radius)
        bv = carleson_ball_value(gw, qp, alpha, a.ball.center, a.ball.radius)
        rows.append(AtomDualityRow(abs(pairing(a.values, g)), bv, norm_cache[key]))
    return rows


@dataclass(frozen=True)
class CylinderReport:
    """Both inequalities of the cylinder lemma with their explicit constants."""

    upper: RatioReport
    lower: RatioReport
    upper_constant: float
    lower_constant: float
    upper_ok: bool
    lower_ok: bool

    @property
    def ok(self) -> bool:
        return self.upper_ok and self.lower_ok


def cylinder_suite(corpus, center, r: float, kappa0: float, kappa1: float, p: float, mode: str = "fast") -> CylinderReport:
    """Cylinder ``K = B(center, r) x (kappa0, kappa1)`` and ``p < inf``.

    Upper: ``||1_K f||_{T^{p,inf}} <= ||f||_{L^inf(K)} V(c_K, r_K + kappa1)^{1/p}``,
    since only cones with vertex in that ball meet ``K``.

    Lower: a maximizer ``(y, t)`` of ``|f|`` on ``K`` has ``t > kappa0`` and
    lies in the cone of every ``x`` in ``B(y, t)``, so
    ``||f||_{L^inf(K)} <= (inf_{y in B_K} V(y, kappa0))^{-1/p} ||f||_{T^{p,inf}}``.
    """
    if not corpus:
        raise ConfigurationError("empty corpus")
    grid = corpus[0].grid
    sp = grid.space
    if not (0 < p < INF):
        raise ConfigurationError("the cylinder suite needs 0 < p < inf")
    if not (0 < kappa0 < kappa1):
        raise DomainError("need 0 < kappa0 < kappa1")
    c = sp.check_index(center)
    R = r + kappa1
    x = sp.point(c)
    lo = np.asarray(sp.origin)
    hi = lo + np.asarray(sp.extents) * sp.h
    if np.any(x - R < lo - 1e-12) or np.any(x + R > hi - sp.h + 1e-12):
        raise DomainError("cylinder too close to the grid boundary: B(c_K, r_K + kappa_1) is clipped")
    K = cylinder_mask(sp, grid.levels, c, r, kappa0, kappa1)
    upper_c = sp.ball_volume(c, R) ** (1 / p)
    bk = sp.ball_mask(c, r)
    vk = sp.volume_field(kappa0)
    lower_c = float(vk[bk].min()) ** (-1 / p)
    P = NormParams(p, INF)

    def sup_k(f):
        return float(np.abs(f.values[K]).max(initial=0.0))

    up = ratio_suite("cylinder-upper", (p, r, kappa0, kappa1), corpus,
                     lambda f: tent_norm(f.restrict(K), P, mode), sup_k)
    low = ratio_suite("cylinder-lower", (p, r, kappa0, kappa1), corpus, sup_k, lambda f: tent_norm(f, P, mode))
    up_ok = bool(np.all(up.numerators <= up.denominators * upper_c + 1e-12))
    low_ok = bool(np.all(low.numerators <= low.denominators * lower_c * (1 + PROOF_TOL) + 1e-12))
    return CylinderReport(up, low, upper_c, lower_c, up_ok, low_ok)


# ---------------------------------------------------------------- exact identities


def _fmtc(x) -> str:
    x = complex(x)
    return fmt(x.real) if x.imag == 0 else f"{fmt(x.real)}{'+' if x.imag >= 0 else '-'}{fmt(abs(x.imag))}j"


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    index: int
    lhs: complex
    rhs: complex

    @property
    def error(self) -> float:
        # values may be complex (pairings)
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) / scale if scale > 0 else 0.0

    @property
    def ok(self) -> bool:
        return self.error <= IDENTITY_TOL


@dataclass(frozen=True)
class IdentityReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def by_name(self) -> dict:
        out = {}
        for c in self.checks:
            out.setdefault(c.name, []).append(c)
        return out

    def csv(self) -> str:
        rows = [f"{c.name},{c.index},{_fmtc(c.lhs)},{_fmtc(c.rhs)},{fmt(c.error)},{int(c.ok)}\n" for c in self.checks]
        return "identity,index,lhs,rhs,relative_error,pass\n" + "".join(rows)

    def summary(self) -> str:
        lines = ["[identity]"]
        for name, cs in self.by_name().items():
            worst = max(c.error for c in cs)
            lines.append(f"{name} = {'pass' if all(c.ok for c in cs) else 'FAIL'} max_error={fmt(worst)}")
        lines.append(f"result = {'pass' if self.ok else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _identity_checks(i: int, f: GridFunction, g: GridFunction, mode: str, max_radius) -> list:
    out = []
    for q, s in ((1.0, 0.0), (2.0, 0.0), (2.0, 0.5), (3.0, -0.25)):
        out.append(IdentityCheck(f"fubini q={q:g} s={s:g}", i, tent_norm(f, NormParams(q, q, s), mode),
                                 lq_norm(v_multiply(f, -s), q)))
    for p, q, s, r in ((1.0, 2.0, 0.0, 0.5), (2.0, 1.0, 0.25, -1.0), (INF, 2.0, 0.0, 0.5)):
        lhs = tent_norm(v_multiply(f, r), NormParams(p, q, s + r), mode, max_radius=max_radius)
        out.append(IdentityCheck(f"isometry p={p:g} q={q:g} r={r:g}", i, lhs,
                                 tent_norm(f, NormParams(p, q, s), mode, max_radius=max_radius)))
    for M in (0.5, 1.0, 2.0, 3.0):
        fm = power(f, M)
        for p, q, s in ((1.0, 2.0, 0.5), (2.0, 2.0, 0.0), (INF, 2.0, 0.0), (INF, INF, 0.5)):
            lhs = tent_norm(fm, NormParams(p, q, s), mode, max_radius=max_radius)
            rhs = tent_norm(f, NormParams(M * p, M * q, s / M), mode, max_radius=max_radius) ** M
            out.append(IdentityCheck(f"convex M={M:g} p={p:g} q={q:g}", i, lhs, rhs))
    for s in (0.5, -1.0):
        out.append(IdentityCheck(f"adjoint s={s:g}", i, pairing(f, g), pairing(v_multiply(f, -s), v_multiply(g, s))))
    return out


def identity_suite(corpus, mode: str = "fast", max_radius: float | None = None, n_workers: int = 1) -> IdentityReport:
    """Fubini, the ``V^r`` isometry, convex reduction and the adjoint pairing on every function.

    These hold exactly on the grid, so the tolerance is ``1e-10`` relative.
    The pairing partner of ``corpus[i]`` is ``corpus[i+1]`` (cyclically).
    """
    corpus = list(corpus)
    if not corpus:
        return IdentityReport([])
    n = len(corpus)
    items = [(i, corpus[i], corpus[(i + 1) % n]) for i in range(n)]
    chunks = ordered_map(lambda it: _identity_checks(it[0], it[1], it[2], mode, max_radius), items, n_workers)
    return IdentityReport([c for ch in chunks for c in ch])


# ---------------------------------------------------------------- interpolation suites


def tent_interp_suite(corpus, p0, p1, q, s0, s1, theta, r=2.0, weight="volume", n_workers: int = 1) -> dict:
    """The three pairwise ratios of the truncation characterizations, one report each."""
    reps = ordered_map(lambda f: tent_interp_norms(f, p0, p1, q, s0, s1, theta, r, weight), corpus, n_workers)
    params = (p0, p1, q, s0, s1, theta, r, weight)
    vals = {
        "inf": [x.inftynorm for x in reps],
        "0": [x.zeronorm for x in reps],
        "seq": [x.seqnorm for x in reps],
    }
    return {
        f"{a}/{b}": RatioReport(f"tent-interp {a}/{b}", params, np.array(vals[a]), np.array(vals[b]))
        for a, b in (("inf", "0"), ("inf", "seq"), ("0", "seq"))
    }


def t_z_suite(corpus, p0, p1, q, s0, s1, theta, c0=1.0, c1=2.0, weight="volume", n_workers: int = 1) -> RatioReport:
    pairs = ordered_map(lambda f: t_z_equivalence(f, p0, p1, q, s0, s1, theta, c0, c1, weight), corpus, n_workers)
    return RatioReport("t-z", (p0, p1, q, s0, s1, theta, c0, c1, weight),
                       np.array([a for a, _ in pairs]), np.array([b for _, b in pairs]))


def z_dyadic_suite(corpus, p, q, s, c0=1.0, c1=2.0, n_workers: int = 1) -> RatioReport:
    return ratio_suite("z-dyadic", (p, q, s, c0, c1), corpus,
                       lambda f: z_norm(f, p, q, s, c0, c1), lambda f: z_norm_dyadic(f, p, q, s), n_workers)


def z_embedding_suite(corpus, p, q, s=0.0, c0=1.0, c1=2.0, n_workers: int = 1) -> RatioReport:
    """``||f||_{T^{p,q}_s} / ||f||_{Z^{p,q}_s}``, bounded for ``p <= q``."""
    if not (0 < p <= q < INF):
        raise ConfigurationError("the Z-to-T embedding needs 0 < p <= q < inf")
    P = NormParams(p, q, s)
    return ratio_suite("z-embedding", (p, q, s, c0, c1), corpus,
                       lambda f: tent_norm(f, P), lambda f: z_norm(f, p, q, s, c0, c1), n_workers)


def coincidence_norm(a: Atom, p: float, mode: str = "fast", max_radius: float | None = None) -> float:
    """``||a||_{T^{p,q}_{s1}}`` of a ``T^{1,q}_{s}``-atom with ``s1 = s + delta_{1,p}``; at most one."""
    if a.p != 1:
        raise ConfigurationError("coincidences start from T^{1,q}-atoms")
    if not (1 <= p <= a.q):
        raise ConfigurationError("coincidences need 1 <= p <= q")
    s1 = a.s + delta_exponent(1.0, p)
    return tent_norm(a.values, NormParams(p, a.q, s1), mode, max_radius=max_radius)
