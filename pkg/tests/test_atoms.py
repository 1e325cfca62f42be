import math

import numpy as np
import pytest

from tslab import io
from tslab.atoms import Atom, Ball, atom_validate, covering_partition, decompose, normalized_atom
from tslab.corpus import random_atoms, random_corpus
from tslab.errors import DomainError
from tslab.functionals import NormParams, tent_norm
from tslab.geometry import delta_exponent
from tslab.gridfn import GridFunction, lq_norm


def test_normalized_atom_is_valid(grid1):
    prof = np.ones(grid1.shape)
    a = normalized_atom(grid1, prof, Ball((32,), 1.0), 1, 2)
    rep = atom_validate(a, "exact")
    assert rep.valid and rep.support_ok
    assert math.isclose(rep.size, rep.bound, rel_tol=1e-12)
    assert rep.derived_ok


def test_invalid_atoms_are_flagged(grid1):
    ball = Ball((32,), 1.0)
    big = normalized_atom(grid1, np.ones(grid1.shape), ball, 1, 2)
    rep = atom_validate(Atom(grid1, big.box, big.local * 1.01, ball, 1, 2))
    assert rep.support_ok and not rep.size_ok and not rep.valid
    outside = np.zeros(grid1.shape)
    outside[5, 0] = 1e-6
    rep = atom_validate(Atom.from_function(GridFunction(outside, grid1), ball, 1, 2))
    assert not rep.support_ok and not rep.valid
    with pytest.raises(DomainError):
        atom_validate(Atom(grid1, big.box, big.local, ball, 2, 1))


def test_random_atoms_valid(grid1):
    for q in (2.0, math.inf):
        for a in random_atoms(grid1, 1, 6, 1.0, q):
            rep = atom_validate(a)
            assert rep.valid and math.isclose(rep.size, rep.bound, rel_tol=1e-12)


def test_covering_partition_properties(grid2):
    sp = grid2.space
    O = np.zeros(sp.shape, bool)
    O[3:12, 4:10] = True
    O[6:9, 12:15] = True
    cov = covering_partition(sp, O)
    np.testing.assert_allclose(cov.phi_sum()[O], 1.0, atol=1e-14)
    assert not cov.phi_sum()[~O].any()
    dist = sp.distance_to(~O)
    for x, r in zip(cov.centers, cov.radii):
        assert O[x] and math.isclose(r, dist[x] / 10)
    covered = np.zeros(sp.shape, bool)
    for x, r in zip(cov.centers, cov.radii):
        covered |= sp.ball_mask(x, r)
    assert covered[O].all()
    for i in range(len(cov)):
        for j in range(i):
            d = sp.h * math.dist(cov.centers[i], cov.centers[j])
            assert d >= max(cov.radii[i], cov.radii[j]) - 1e-12
    with pytest.raises(DomainError):
        covering_partition(sp, np.ones(sp.shape, bool))


@pytest.mark.parametrize("p,q,s", [(1.0, 2.0, 0.0), (0.5, math.inf, 0.0), (1.0, 2.0, 0.3)])
def test_decompose_reconstructs_with_valid_atoms(grid2, p, q, s):
    f = random_corpus(grid2, 11, "multi-bump", 1)[0]
    dec = decompose(f, p, q, s)
    assert dec.residual < 1e-12
    for t in dec.terms:
        assert atom_validate(t.atom).valid
    norm = tent_norm(f, NormParams(p, q, s))
    assert dec.lp_sum ** (1 / p) >= norm * (1 - 1e-9)
    lo, val, hi = dec.distribution_check()
    assert lo <= val * (1 + 1e-12) and val <= hi * (1 + 1e-12)
    left, right = dec.budget_chain()
    assert left <= right


def test_decompose_domain_errors(grid2):
    f = random_corpus(grid2, 11, "multi-bump", 1)[0]
    with pytest.raises(DomainError):
        decompose(f, 2.0)
    with pytest.raises(DomainError):
        decompose(f, 1.0, 0.5)
    edge = np.zeros(grid2.shape)
    edge[0, 5, 2] = 1.0
    with pytest.raises(DomainError, match="boundary"):
        decompose(GridFunction(edge, grid2), 1.0)
    assert len(decompose(grid2.zeros(), 1.0)) == 0


def test_decomposition_io(tmp_path, grid2):
    f = random_corpus(grid2, 11, "multi-bump", 1)[0]
    dec = decompose(f, 1.0, 2.0)
    io.write_decomposition(tmp_path / "dec", dec)
    rows = io.read_manifest(tmp_path / "dec")
    assert len(rows) == len(dec)
    acc = np.zeros(grid2.shape)
    for lam, c, r, k, i, name in rows:
        acc += lam * io.read_function(tmp_path / "dec" / name).values
    assert lq_norm(GridFunction(acc, grid2) - f, 2) <= 1e-12 * lq_norm(f, 2)
