import numpy as np
import pytest

from tslab.atoms import atom_validate
from tslab.corpus import PROFILES, Window, mixed_corpus, random_atoms, random_corpus, random_couples
from tslab.errors import ConfigurationError

from conftest import make_grid


@pytest.mark.parametrize("profile", PROFILES)
def test_corpus_is_deterministic_and_windowed(grid1, profile):
    a = random_corpus(grid1, 5, profile, 3)
    b = random_corpus(grid1, 5, profile, 3)
    c = random_corpus(grid1, 6, profile, 3)
    for x, y in zip(a, b):
        assert np.array_equal(x.values, y.values)
    assert any(not np.array_equal(x.values, z.values) for x, z in zip(a, c))
    win = Window.of(grid1)
    keep = grid1.levels.level_mask(win.t_lo * 0.999, win.t_hi * 1.001)
    for f in a:
        assert not f.is_zero()
        assert not f.values[..., ~keep].any()
        assert not f.values[:2].any() and not f.values[-2:].any()


def test_refined_corpus_samples_same_functions():
    coarse = make_grid(1, 64, 1 / 16, 1 / 16, 4, 16)
    fine = coarse.refine()
    win = Window.of(coarse)
    for profile in ("cylindrical-smooth", "multi-bump"):
        a = random_corpus(coarse, 2, profile, 2)
        b = random_corpus(fine, 2, profile, 2, window=win)
        for x, y in zip(a, b):
            np.testing.assert_allclose(y.values[::2, ::2], x.values, rtol=1e-12, atol=1e-14)


def test_mixed_corpus_round_robin(grid1):
    fs = mixed_corpus(grid1, 1, 7)
    assert len(fs) == 7
    first = random_corpus(grid1, 1, PROFILES[1], 2)
    assert np.array_equal(fs[1].values, first[0].values)
    assert np.array_equal(fs[6].values, first[1].values)
    with pytest.raises(ConfigurationError):
        random_corpus(grid1, 1, "noise")


def test_random_atoms_and_couples(grid1):
    atoms = random_atoms(grid1, 3, 4, 1.0, 2.0)
    assert all(atom_validate(a).valid for a in atoms)
    assert all(round(2 * a.ball.radius / grid1.space.h) * grid1.space.h / 2 == a.ball.radius for a in atoms)
    m, w, f = random_couples(1, 1, size=10)[0]
    assert m.shape == w.shape == f.shape == (10,)
    assert np.all((m >= 0.5) & (m <= 2)) and np.all((w >= 1e-3) & (w <= 1e3))


def test_small_grid_rejected():
    with pytest.raises(ConfigurationError):
        Window.of(make_grid(1, 8, 1 / 8, 1 / 16, 2, 12))
