import math
from pathlib import Path

import numpy as np
import pytest

from tslab import io
from tslab.cli import main
from tslab.functionals import NormParams, tent_norm
from tslab.gridfn import GridFunction

GRID = """n = 1
extents = 64
h = 0.0625
origin = 0
t_min = 0.0625
m = 4
J = 16
"""

CONFIG = """grid = grid.txt
seed = 3
count = 4
out = out
max_radius = 0.25
hls = 1 2 2 0 -0.5
zembed = 1 2
cylinder = 32 0.5 0.2 0.6 1
duality = 2 2 0.25
interp = 2 4 2 0 1 1/2
tz = 2 4 2 0 1 1/2 1 2
zdyadic = 1 2 0
gilbert = 2 0.4 2 2 4 16
"""


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "grid.txt").write_text(GRID)
    (tmp_path / "run.cfg").write_text(CONFIG)
    return tmp_path


def run(*args):
    return main(["--threads", "1", "--no-timestamp", *map(str, args)])


def test_norm_command_matches_library(workdir, capsys):
    assert run("gen-corpus", "--grid", workdir / "grid.txt", "--seed", 1, "--count", 2, "--out", workdir / "c") == 0
    fn = workdir / "c" / "f_000.tsf"
    capsys.readouterr()
    assert run("norm", "--fn", fn, "--p", 1, "--q", 2, "--s", "1/4") == 0
    out = float(capsys.readouterr().out.split()[-1])
    f = io.read_function(fn)
    assert math.isclose(out, tent_norm(f, NormParams(1, 2, 0.25)), rel_tol=1e-12)
    # Fubini through the command line
    assert run("norm", "--fn", fn, "--p", 2, "--q", 2) == 0
    a = float(capsys.readouterr().out.split()[-1])
    assert run("norm", "--fn", fn, "--q", 2, "--lq") == 0
    b = float(capsys.readouterr().out.split()[-1])
    assert math.isclose(a, b, rel_tol=1e-10)


def test_exit_codes(workdir, capsys):
    assert run("norm", "--fn", workdir / "missing.tsf") == 1
    assert "missing.tsf" in capsys.readouterr().err
    bad = workdir / "bad.cfg"
    bad.write_text(CONFIG + "colour = blue\n")
    assert run("embed-suite", "--config", bad) == 1
    bad.write_text(CONFIG.replace("hls = 1 2 2 0 -0.5", "hls = 1 2 -2 0 -0.5"))
    assert run("embed-suite", "--config", bad) == 1
    bad.write_text(CONFIG.replace("hls = 1 2 2 0 -0.5", "hls = 1 2 2 0 0"))
    assert run("embed-suite", "--config", bad) == 1
    with pytest.raises(SystemExit) as exc:
        run("nonsense")
    assert exc.value.code == 1


def test_decompose_and_validate_atom(workdir, capsys):
    grid = io.read_grid(workdir / "grid.txt")
    vals = np.zeros(grid.shape)
    vals[28:36, 3:6] = 1.0
    io.write_function(workdir / "f.tsf", GridFunction(vals, grid), "grid.txt")
    assert run("decompose", "--fn", workdir / "f.tsf", "--p", 1, "--out", workdir / "dec") == 0
    rows = io.read_manifest(workdir / "dec")
    assert rows and (workdir / "dec" / "decompose.summary").is_file()
    lam, c, r, *_ = rows[0]
    atom = workdir / "dec" / rows[0][-1]
    assert run("validate-atom", "--fn", atom, "--center", ",".join(map(str, c)), "--radius", r, "--q", "inf") == 0
    assert run("validate-atom", "--fn", workdir / "f.tsf", "--center", "32", "--radius", 0.1) == 2


def test_suites_are_deterministic(workdir, tmp_path_factory):
    outs = []
    for k in range(2):
        d = tmp_path_factory.mktemp(f"run{k}")
        (d / "grid.txt").write_text(GRID)
        (d / "run.cfg").write_text(CONFIG)
        for cmd in ("identity-suite", "embed-suite", "duality-suite", "interp-suite"):
            assert run(cmd, "--config", d / "run.cfg") == 0
        assert run("report", "--dir", d / "out") == 0
        outs.append(d / "out")
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(p.name for p in outs[1].iterdir())
    assert "report.txt" in names and "identity.csv" in names
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_kfun_command(workdir, capsys):
    rng = np.random.default_rng(0)
    rows = [f"{m} {w} {f}" for m, w, f in zip(rng.uniform(0.5, 2, 6), 10 ** rng.uniform(-1, 1, 6), rng.normal(size=6))]
    (workdir / "couple.txt").write_text("\n".join(rows) + "\n")
    assert run("kfun", "--couple", workdir / "couple.txt", "--samples", 8, "--out", workdir / "k.csv") == 0
    lines = (workdir / "k.csv").read_text().splitlines()
    assert len([ln for ln in lines if ln and not ln.startswith("#")]) >= 8
