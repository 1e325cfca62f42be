import itertools
import math

import numpy as np
import pytest

from tslab.corpus import mixed_corpus
from tslab.errors import DomainError
from tslab.functionals import (
    NormParams,
    carleson,
    carleson_ball_value,
    carleson_radii,
    lusin,
    tent_norm,
    whitney_average,
    z_norm,
    z_norm_dyadic,
)
from tslab.geometry import cone_mask, dyadic_whitney_cover
from tslab.gridfn import GridFunction, integrate, lq_norm, power, v_multiply


@pytest.fixture(scope="module")
def fns1(grid1):
    return mixed_corpus(grid1, seed=3, count=5)


@pytest.fixture(scope="module")
def fns2(grid2):
    return mixed_corpus(grid2, seed=4, count=3)


def lusin_brute(g, q, a=1.0):
    grid = g.grid
    out = np.zeros(grid.space.shape)
    for x in itertools.product(*[range(e) for e in grid.space.extents]):
        cone = cone_mask(grid.space, grid.levels, x, a)
        A = np.abs(g.values)[cone]
        if q == math.inf:
            out[x] = A.max(initial=0)
        else:
            out[x] = np.sum(A**q * grid.cell_measure / grid.V[cone]) ** (1 / q)
    return out


@pytest.mark.parametrize("q", [1.0, 2.0, 0.5, math.inf])
def test_lusin_matches_cone_enumeration(fns2, q):
    g = fns2[0]
    for mode in ("exact", "fast"):
        np.testing.assert_allclose(lusin(g, q, 1.0, mode), lusin_brute(g, q), rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(lusin(g, q, 1.5), lusin_brute(g, q, 1.5), rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("q,s", [(1.0, 0.0), (2.0, 0.0), (2.0, 0.5), (3.0, -0.25)])
def test_fubini_identity(fns1, q, s):
    for f in fns1:
        lhs = tent_norm(f, NormParams(q, q, s)) ** q
        rhs = integrate(power(v_multiply(f, -s), q))
        assert math.isclose(lhs, rhs, rel_tol=1e-10)


def test_carleson_field_is_max_over_family(fns2):
    g = fns2[1]
    q, alpha = 2.0, 0.3
    res = carleson(g, q, alpha, mode="exact", max_radius=1.0, full=True)
    sp = g.grid.space
    best = np.zeros(sp.shape)
    for r in carleson_radii(g.grid, 1.0):
        for c in itertools.product(*[range(e) for e in sp.extents]):
            v = carleson_ball_value(g, q, alpha, c, r)
            ball = sp.ball_mask(c, r)
            best[ball] = np.maximum(best[ball], v)
    np.testing.assert_allclose(res.field, best, rtol=1e-10)
    assert math.isclose(res.value, best.max(), rel_tol=1e-12)
    assert math.isclose(carleson_ball_value(g, q, alpha, res.center, res.radius), res.value, rel_tol=1e-12)
    fast = carleson(g, q, alpha, mode="fast", max_radius=1.0)
    np.testing.assert_allclose(fast, res.field, rtol=1e-9)


def test_carleson_infinity_alpha_zero_is_sup(fns2):
    f = fns2[2]
    assert tent_norm(f, NormParams(math.inf, math.inf)) == np.abs(f.values).max()
    direct = carleson(f, math.inf, 0.0).max()
    assert direct <= np.abs(f.values).max() + 1e-15


def test_tent_norm_modes_agree(fns1, fns2):
    params = [NormParams(1, 2), NormParams(0.5, 1, 0.25), NormParams(math.inf, 2, alpha=0.2), NormParams(2, math.inf)]
    for f in fns1[:2] + fns2[:1]:
        for P in params:
            a = tent_norm(f, P, "exact", max_radius=1.0)
            b = tent_norm(f, P, "fast", max_radius=1.0)
            assert math.isclose(a, b, rel_tol=1e-9)


def test_norm_params_validation():
    for bad in [dict(p=0, q=1), dict(p=1, q=-1), dict(p=1, q=2, alpha=0.5), dict(p=1, q=2, aperture=0)]:
        with pytest.raises(DomainError):
            NormParams(**bad)
    with pytest.raises(DomainError):
        NormParams(1, 2, s=math.nan)


def test_power_weight(grid1, fns1):
    f = fns1[0]
    a = tent_norm(f, NormParams(2, 2, 0.5), weight="power")
    expect = lq_norm(GridFunction(f.values * grid1.t ** (-0.5), grid1), 2)
    assert math.isclose(a, expect, rel_tol=1e-10)


def test_whitney_average_brute(grid2, fns2):
    g = fns2[0]
    q, c0, c1 = 2.0, 1.0, 2.0
    W, clipped = whitney_average(g, q, c0, c1, "exact")
    sp, t = grid2.space, grid2.t
    for x in [(8, 8), (3, 12)]:
        for j in [2, 5]:
            ball = sp.ball_mask(x, c0 * t[j])
            band = np.abs(np.log(t) - np.log(t[j])) < math.log(c1) - 1e-12
            num = np.sum(np.abs(g.values[ball][:, band]) ** q * t[band])
            den = ball.sum() * t[band].sum()
            assert math.isclose(W.values[x + (j,)], (num / den) ** (1 / q), rel_tol=1e-12)
    assert clipped > 0
    assert math.isclose(z_norm(g, 2, q, 0, c0, c1, "fast"), z_norm(g, 2, q, 0, c0, c1, "exact"), rel_tol=1e-10)
    with pytest.raises(DomainError):
        whitney_average(g, q, 1.0, 1.0)


def test_z_norm_dyadic_single_cube(grid2):
    cover = dyadic_whitney_cover(grid2.space, grid2.levels)
    cube = cover.cubes[len(cover) // 2]
    m = cube.mask(grid2.space, grid2.levels)
    f = GridFunction(np.where(m, 3.0, 0.0), grid2)
    p, q, s = 1.5, 2.0, 0.2
    expect = (cube.side ** (grid2.n * (1 - p * s)) * 3.0**p) ** (1 / p)
    assert math.isclose(z_norm_dyadic(f, p, q, s), expect, rel_tol=1e-12)
