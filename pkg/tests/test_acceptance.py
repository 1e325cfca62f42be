"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or ``python tests/test_acceptance.py``.
"""
import math
import sys
import time

import numpy as np
import pytest

from tslab.atoms import atom_validate, decompose
from tslab.corpus import Window, mixed_corpus, random_atoms, random_couples
from tslab.functionals import NormParams, carleson, lusin, tent_norm
from tslab.geometry import delta_exponent
from tslab.interp import WeightedCouple, gilbert_norms, k_curve, k_functional
from tslab.verify import (
    coincidence_norm,
    cylinder_suite,
    hls_suite,
    identity_suite,
    refinement_stability,
    t_z_suite,
    tent_interp_suite,
    z_dyadic_suite,
    z_embedding_suite,
)

from conftest import make_grid

RESULTS = {}
STABILITY = 2.0


def record(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


# ---------------------------------------------------------------- shared grids and corpora


@pytest.fixture(scope="module")
def g1():
    return make_grid(1, 256, 1 / 32, 1 / 16, 8, 32)


@pytest.fixture(scope="module")
def g2():
    return make_grid(2, 64, 1 / 16, 1 / 8, 5, 16)


@pytest.fixture(scope="module")
def c1(g1):
    return mixed_corpus(g1, seed=2024, count=16)


@pytest.fixture(scope="module")
def c1_fine(g1):
    return mixed_corpus(g1.refine(), seed=2024, count=16, window=Window.of(g1))


@pytest.fixture(scope="module")
def c2(g2):
    return mixed_corpus(g2, seed=2025, count=8)


def _stable(coarse, fine):
    a, b = refinement_stability(coarse, fine, STABILITY)
    return a.stable, f"max {coarse.max:.4g} -> {fine.max:.4g}"


# ---------------------------------------------------------------- criteria


def test_01_exact_identities(g1, g2, c1, c2):
    reps = [identity_suite(c1[:8], max_radius=g1.space.L / 4), identity_suite(c2, max_radius=g2.space.L / 4)]
    worst = max(c.error for r in reps for c in r.checks)
    count = sum(len(r.checks) for r in reps)
    record(1, all(r.ok for r in reps), f"{count} identity checks, worst relative error {worst:.2e} (tol 1e-10)")


def test_02_atoms_constant_one(g1):
    lines, ok = [], True
    for p, q in ((1.0, 2.0), (1.0, math.inf), (2.0, 4.0), (math.inf, math.inf)):
        atoms = random_atoms(g1, seed=int(10 * q) if q < math.inf else 99, count=50, p=1.0, q=q)
        derived = [atom_validate(a) for a in atoms]
        ok &= all(r.valid and r.derived <= 1 + 1e-9 for r in derived)
        co = [coincidence_norm(a, p, max_radius=g1.space.L / 4) for a in atoms]
        ok &= max(co) <= 1 + 1e-9
        m = max(max(co), max(r.derived for r in derived))
        lines.append(f"({p:g},{q:g}) max {m:.6f}")
    record(2, ok, "50 atoms per pair; " + ", ".join(lines))


def test_03_atomic_decomposition(c1, c1_fine):
    ok, parts = True, []
    for p in (0.5, 1.0):
        Cs = []
        for corpus in (c1, c1_fine):
            worst_ratio, worst_res = 0.0, 0.0
            for f in corpus:
                dec = decompose(f, p, math.inf)
                norm = tent_norm(f, NormParams(p, math.inf))
                ratio = dec.lp_sum / norm**p
                worst_res = max(worst_res, dec.residual)
                worst_ratio = max(worst_ratio, ratio)
                ok &= dec.residual < 1e-9 and ratio >= 1 - 1e-12
                ok &= all(atom_validate(t.atom).valid for t in dec.terms)
            Cs.append(worst_ratio)
        stable = max(Cs) / min(Cs) <= STABILITY
        ok &= stable
        parts.append(f"p={p:g}: C {Cs[0]:.3g} -> {Cs[1]:.3g}")
    record(3, ok, "16 functions, residual < 1e-9, atoms valid; " + "; ".join(parts))


def test_04_k_functional_vs_brute_force():
    rng = np.random.default_rng(77)
    worst, shapes_ok = 0.0, True
    ts = np.logspace(-3, 3, 32)
    for i in range(20):
        q = 1.0 if i % 2 == 0 else 2.0
        size = int(rng.integers(2, 9))
        m, w, f = random_couples(100 + i, 1, size=size, q=q, decades=2)[0]
        c = WeightedCouple(m, q, w)
        solve = k_curve(ts, f, c, "convex-solve")
        brute = k_curve(ts, f, c, "brute-force")
        # the brute-force value is an upper bound; the gap is its theta-grid resolution
        shapes_ok &= bool(np.all(solve.K <= brute.K * (1 + 1e-12)))
        worst = max(worst, float(np.max((brute.K - solve.K) / brute.K)))
        shapes_ok &= solve.check_shape() == (True, True) and brute.check_shape() == (True, True)
    record(4, worst <= 1e-3 and shapes_ok, f"20 instances, worst relative gap {worst:.2e}, solver <= oracle and shapes ok={shapes_ok}")


def test_05_gilbert_equivalence():
    couples = random_couples(55, 32, size=64, q=2.0)
    CG = []
    for per in (16, 32):
        spreads = [gilbert_norms(f, WeightedCouple(m, 2.0, w), 0.4, 2.0, 2.0, per_octave=per).spread
                   for m, w, f in couples]
        CG.append(max(spreads))
    change = abs(CG[1] - CG[0]) / CG[0]
    record(5, np.isfinite(CG[0]) and change < 0.25, f"C_G {CG[0]:.4f} (16/oct) vs {CG[1]:.4f} (32/oct), change {change:.2%}")


def test_06_tent_interpolation(c1, c1_fine):
    ok, parts = True, []
    for tup in ((2, 4, 2, 0, 1, 0.5), (3, 1.5, 2, 0, -0.5, 1 / 3)):
        coarse = tent_interp_suite(c1, *tup)
        fine = tent_interp_suite(c1_fine, *tup)
        for key in coarse:
            st, msg = _stable(coarse[key], fine[key])
            finite = np.isfinite(coarse[key].max) and coarse[key].min > 0
            ok &= bool(st and finite)
            parts.append(f"{key} {msg}")
    record(6, ok, "; ".join(parts))


def test_07_t_z_equivalence(c1, c1_fine):
    ok, parts = True, []
    tup = (2, 4, 2, 0, 1, 0.5)
    for c0, cc1 in ((1.0, 2.0), (2.0, 4.0)):
        st, msg = _stable(t_z_suite(c1, *tup, c0, cc1), t_z_suite(c1_fine, *tup, c0, cc1))
        ok &= st
        parts.append(f"(c0,c1)=({c0:g},{cc1:g}) {msg}")
    zd = z_dyadic_suite(c1, 1.5, 2.0, 0.25)
    ok &= bool(np.isfinite(zd.max) and zd.min > 0)
    parts.append(f"z/dyadic in [{zd.min:.3g}, {zd.max:.3g}]")
    record(7, ok, "; ".join(parts))


def test_08_hls_embeddings(g1, c1, c1_fine):
    g1f = c1_fine[0].grid
    ok, parts = True, []
    for p0, p1, q, s0, alpha in ((1, 2, 2, 0, 0.0), (0.5, 1, 2, 0, 0.0), (2, math.inf, 2, 0, 0.25)):
        s1 = s0 + delta_exponent(p0, p1) - alpha
        a = hls_suite(c1, p0, p1, q, s0, s1, alpha, max_radius=g1.space.L / 4)
        b = hls_suite(c1_fine, p0, p1, q, s0, s1, alpha, max_radius=g1f.space.L / 4)
        st, msg = _stable(a, b)
        ok &= bool(st and np.isfinite(a.max))
        parts.append(f"({p0:g},{p1:g},{q:g}) {msg}")
    record(8, ok, "; ".join(parts))


def test_09_z_into_t(c1, c1_fine):
    ok, parts = True, []
    for p, q in ((1, 2), (2, 2)):
        st, msg = _stable(z_embedding_suite(c1, p, q), z_embedding_suite(c1_fine, p, q))
        ok &= st
        parts.append(f"({p},{q}) {msg}")
    record(9, ok, "; ".join(parts))


def test_10_cylinder_constants(g1, g2, c1, c2):
    r1 = cylinder_suite(c1, (128,), 1.0, 0.2, 0.6, 1.0)
    r2 = cylinder_suite(c2, (32, 32), 0.5, 0.25, 0.75, 2.0)
    ok = r1.ok and r2.ok
    detail = (f"upper ratio/constant {r1.upper.max / r1.upper_constant:.3f}, {r2.upper.max / r2.upper_constant:.3f}; "
              f"lower ratio/constant {r1.lower.max / r1.lower_constant:.3f}, {r2.lower.max / r2.lower_constant:.3f}")
    record(10, ok, detail)


REGRESSION_GRID = """n = 2
extents = 32 32
h = 0.125
origin = 0 0
t_min = 0.0625
m = 2
J = 8
"""

REGRESSION_CONFIG = """grid = grid.txt
seed = 9
count = 5
out = out
hls = 1 2 2 0 -0.5 ; 2 inf 2 0 -0.75 0.25
zembed = 1 2
cylinder = 16,16 0.5 0.2 0.6 1
duality = 2 2 0.25 ; 1/2 2 0
interp = 2 4 2 0 1 1/2
tz = 2 4 2 0 1 1/2 1 2
zdyadic = 1 2 0
gilbert = 2 0.4 2 2 8 32
"""


def test_11_determinism_and_modes(tmp_path_factory):
    from tslab.cli import main

    dirs = []
    for k in range(2):
        d = tmp_path_factory.mktemp(f"determinism{k}")
        (d / "grid.txt").write_text(REGRESSION_GRID)
        (d / "run.cfg").write_text(REGRESSION_CONFIG)
        for cmd in ("identity-suite", "embed-suite", "duality-suite", "interp-suite"):
            assert main(["--threads", "2", "--no-timestamp", cmd, "--config", str(d / "run.cfg")]) == 0
        assert main(["--no-timestamp", "report", "--dir", str(d / "out")]) == 0
        dirs.append(d / "out")
    names = sorted(p.name for p in dirs[0].iterdir())
    same = names == sorted(p.name for p in dirs[1].iterdir())
    same &= all((dirs[0] / n).read_bytes() == (dirs[1] / n).read_bytes() for n in names)

    worst = 0.0
    grids = (make_grid(2, 32, 1 / 8, 1 / 16, 2, 8), make_grid(1, 128, 1 / 16, 1 / 16, 4, 16))
    for grid in grids:
        for f in mixed_corpus(grid, seed=9, count=5):
            for q in (1.0, 2.0, math.inf):
                L = [lusin(f, q, 1.0, m) for m in ("exact", "fast")]
                C = [carleson(f, q, 0.1, m, max_radius=grid.space.L / 4) for m in ("exact", "fast")]
                for x, y in (L, C):
                    worst = max(worst, float(np.max(np.abs(x - y)) / max(np.max(np.abs(x)), 1e-300)))
    record(11, same and worst <= 1e-9,
           f"{len(names)} report files byte-identical={same}, worst exact/fast difference {worst:.2e}")


if __name__ == "__main__":
    t0 = time.time()
    code = pytest.main([__file__, "-q", "-s"])
    print(f"elapsed {time.time() - t0:.1f}s")
    sys.exit(code)
