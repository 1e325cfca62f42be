import math

import numpy as np
import pytest

from tslab import io
from tslab.errors import ConfigurationError, DomainError
from tslab.gridfn import GridFunction, integrate, lq_norm, pairing, power, truncate, v_multiply

from conftest import make_grid


def test_values_are_immutable_and_finite(grid1, rng):
    f = GridFunction(rng.normal(size=grid1.shape), grid1)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0
    bad = np.zeros(grid1.shape)
    bad[1, 1] = np.nan
    with pytest.raises(DomainError):
        GridFunction(bad, grid1)
    with pytest.raises(DomainError):
        GridFunction(np.zeros((3, 3)), grid1)


def test_arithmetic_and_grid_mismatch(grid1, grid2, rng):
    a = GridFunction(rng.normal(size=grid1.shape), grid1)
    b = GridFunction(rng.normal(size=grid1.shape), grid1)
    np.testing.assert_array_equal((2 * a - b).values, 2 * a.values - b.values)
    np.testing.assert_array_equal((a * b).values, a.values * b.values)
    np.testing.assert_array_equal((-a / 4).values, -a.values / 4)
    assert grid1.zeros().is_zero()
    with pytest.raises(DomainError):
        a + grid2.zeros()


def test_integrate_pairing_and_norms(grid1, rng):
    vals = rng.normal(size=grid1.shape) + 1j * rng.normal(size=grid1.shape)
    f = GridFunction(vals, grid1)
    g = GridFunction(rng.normal(size=grid1.shape), grid1)
    mu = grid1.space.h * math.log(2) / grid1.levels.m
    assert math.isclose(grid1.cell_measure, mu)
    assert np.isclose(integrate(f), vals.sum() * mu)
    assert np.isclose(pairing(f, g), np.sum(vals * g.values) * mu)
    assert np.isclose(pairing(f, f), lq_norm(f, 2) ** 2)
    assert lq_norm(f, math.inf) == np.abs(vals).max()
    assert np.isclose(lq_norm(f, 3), (np.sum(np.abs(vals) ** 3) * mu) ** (1 / 3))
    region = np.zeros(grid1.shape, bool)
    region[3:9, 2:5] = True
    assert np.isclose(integrate(f, region), vals[3:9, 2:5].sum() * mu)
    assert np.isclose(integrate(f.restrict(region)), integrate(f, region))


def test_pointwise_operations(grid1, rng):
    f = GridFunction(rng.normal(size=grid1.shape), grid1)
    np.testing.assert_allclose(v_multiply(f, 0.5).values, f.values * np.sqrt(grid1.V))
    assert v_multiply(f, 0) is f
    np.testing.assert_allclose(power(f, 2.5).values, np.abs(f.values) ** 2.5)
    with pytest.raises(DomainError):
        power(f, 0)
    tr = truncate(f, grid1.t[3], grid1.t[7])
    np.testing.assert_array_equal(tr.values[:, 4:7], f.values[:, 4:7])
    assert not tr.values[:, :4].any() and not tr.values[:, 7:].any()
    with pytest.raises(DomainError):
        truncate(f, 1.0, 0.5)


def test_volume_field(grid1):
    V = grid1.V
    j = 5
    t = grid1.t[j]
    x = 30
    direct = grid1.space.ball_volume((x,), t)
    assert V[x, j] == direct
    assert np.all(np.diff(V[x]) >= 0)


@pytest.mark.parametrize("binary", [False, True])
@pytest.mark.parametrize("cplx", [False, True])
def test_function_io_roundtrip(tmp_path, grid2, rng, binary, cplx):
    vals = rng.normal(size=grid2.shape) * 1e-7 + (1j * rng.normal(size=grid2.shape) if cplx else 0)
    f = GridFunction(vals, grid2)
    io.write_grid(tmp_path / "g.txt", grid2)
    name = "f.tsb" if binary else "f.txt"
    io.write_function(tmp_path / name, f, "g.txt")
    back = io.read_function(tmp_path / name)
    np.testing.assert_array_equal(back.values, f.values)
    assert back.grid.same_as(grid2)


def test_io_errors(tmp_path, grid2):
    with pytest.raises(FileNotFoundError):
        io.read_function(tmp_path / "missing.txt")
    (tmp_path / "bad.txt").write_text("n = 2\nextents = 4 4\n")
    with pytest.raises(ConfigurationError, match="missing grid keys"):
        io.read_grid(tmp_path / "bad.txt")
    io.write_grid(tmp_path / "g.txt", grid2)
    (tmp_path / "short.txt").write_text("grid = g.txt\n1.0\n2.0\n")
    with pytest.raises(ConfigurationError, match="values for a grid"):
        io.read_function(tmp_path / "short.txt")
    (tmp_path / "dup.txt").write_text("a = 1\na = 2\n")
    with pytest.raises(ConfigurationError, match="duplicate"):
        io.read_keyvalue(tmp_path / "dup.txt")


def test_grid_text_roundtrip(tmp_path):
    g = make_grid(2, 12, 0.125, 0.1, 3, 9)
    io.write_grid(tmp_path / "g.txt", g)
    assert io.read_grid(tmp_path / "g.txt").same_as(g)
