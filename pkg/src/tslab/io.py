"""File formats: grid descriptions, grid functions, decompositions and run configs.

Grid description (text, keys in this order)::

    n = 2
    extents = 64 64
    h = 0.0625
    origin = 0 0
    t_min = 0.125
    m = 5
    J = 16

Grid function, text form: a ``grid = <path>`` header line followed by one
value per line in spatial-major, level-minor order (complex values as
``re im``).  Binary form: the magic ``TSLABF01``, a ``u8`` complex flag, a
``u32`` path length, the UTF-8 grid path, a ``u64`` value count, then
little-endian ``f8`` values (real and imaginary parts interleaved when
complex).  Relative grid paths are resolved against the function file.
"""
from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .geometry import SpaceGrid, TimeLevels
from .gridfn import GridFunction, HalfSpaceGrid

MAGIC = b"TSLABF01"
GRID_KEYS = ("n", "extents", "h", "origin", "t_min", "m", "J")


def fmt(x) -> str:
    """Round-trip float formatting."""
    return format(float(x), ".17g")


def atomic_write(path, data) -> None:
    """Write ``data`` (str or bytes) to ``path`` through a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_keyvalue(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if k in out:
            raise ConfigurationError(f"{path}:{lineno}: duplicate key {k!r}")
        out[k] = v
    return out


# ---------------------------------------------------------------- grids


def grid_to_text(grid: HalfSpaceGrid) -> str:
    sp, lv = grid.space, grid.levels
    if not lv.aligned:
        raise ConfigurationError("only levels with an integer m can be written to a grid file")
    rows = [
        ("n", str(sp.n)),
        ("extents", " ".join(str(e) for e in sp.extents)),
        ("h", fmt(sp.h)),
        ("origin", " ".join(fmt(o) for o in sp.origin)),
        ("t_min", fmt(lv.t_min)),
        ("m", str(lv.m)),
        ("J", str(lv.J)),
    ]
    return "".join(f"{k} = {v}\n" for k, v in rows)


def write_grid(path, grid: HalfSpaceGrid) -> None:
    atomic_write(path, grid_to_text(grid))


def read_grid(path) -> HalfSpaceGrid:
    kv = read_keyvalue(path)
    missing = [k for k in GRID_KEYS if k not in kv]
    if missing:
        raise ConfigurationError(f"{path}: missing grid keys {', '.join(missing)}")
    try:
        n = int(kv["n"])
        space = SpaceGrid(
            n,
            tuple(int(v) for v in kv["extents"].split()),
            float(kv["h"]),
            tuple(float(v) for v in kv["origin"].split()),
        )
        levels = TimeLevels(float(kv["t_min"]), int(kv["m"]), int(kv["J"]))
    except ValueError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    return HalfSpaceGrid(space, levels)


# ---------------------------------------------------------------- grid functions


def function_to_text(f: GridFunction, grid_ref: str) -> str:
    vals = f.values.reshape(-1)
    lines = [f"grid = {grid_ref}"]
    if np.iscomplexobj(vals):
        lines += [f"{fmt(v.real)} {fmt(v.imag)}" for v in vals]
    else:
        lines += [fmt(v) for v in vals]
    return "\n".join(lines) + "\n"


def write_function(path, f: GridFunction, grid_ref: str, binary: bool | None = None) -> None:
    """Write ``f``; ``grid_ref`` is stored verbatim as the grid path.

    The binary form is chosen for ``.tsb`` files unless ``binary`` is given.
    """
    path = Path(path)
    if binary is None:
        binary = path.suffix == ".tsb"
    if not binary:
        atomic_write(path, function_to_text(f, grid_ref))
        return
    vals = f.values.reshape(-1)
    cplx = np.iscomplexobj(vals)
    ref = grid_ref.encode()
    head = MAGIC + struct.pack("<BI", int(cplx), len(ref)) + ref + struct.pack("<Q", vals.size)
    body = (np.stack([vals.real, vals.imag], -1) if cplx else vals).astype("<f8").tobytes()
    atomic_write(path, head + body)


def _resolve(base: Path, ref: str) -> Path:
    p = Path(ref)
    return p if p.is_absolute() else base.parent / p


def read_function(path, grid: HalfSpaceGrid | None = None) -> GridFunction:
    """Read a text or binary grid-function file (detected by the magic prefix)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    raw = path.read_bytes()
    if raw.startswith(MAGIC):
        off = len(MAGIC)
        cplx, plen = struct.unpack_from("<BI", raw, off)
        off += 5
        ref = raw[off : off + plen].decode()
        off += plen
        (count,) = struct.unpack_from("<Q", raw, off)
        off += 8
        data = np.frombuffer(raw, dtype="<f8", offset=off)
        if cplx:
            if data.size != 2 * count:
                raise ConfigurationError(f"{path}: expected {count} complex values")
            vals = data[0::2] + 1j * data[1::2]
        else:
            if data.size != count:
                raise ConfigurationError(f"{path}: expected {count} values, found {data.size}")
            vals = data.astype(float)
    else:
        lines = raw.decode().splitlines()
        if not lines or not lines[0].strip().startswith("grid"):
            raise ConfigurationError(f"{path}: first line must be 'grid = <path>'")
        ref = lines[0].split("=", 1)[1].strip()
        rows = [ln.split() for ln in lines[1:] if ln.strip()]
        try:
            if rows and len(rows[0]) == 2:
                vals = np.array([complex(float(a), float(b)) for a, b in rows])
            else:
                vals = np.array([float(r[0]) for r in rows])
        except (ValueError, IndexError) as exc:
            raise ConfigurationError(f"{path}: bad value line ({exc})") from None
    if grid is None:
        grid = read_grid(_resolve(path, ref))
    if vals.size != int(np.prod(grid.shape)):
        raise ConfigurationError(f"{path}: {vals.size} values for a grid of {int(np.prod(grid.shape))} cells")
    return GridFunction(vals.reshape(grid.shape), grid)


# ---------------------------------------------------------------- decompositions


def write_decomposition(directory, dec) -> None:
    """Write ``manifest`` plus one binary grid-function file per atom."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_grid(d / "grid.txt", dec.grid)
    rows = [f"# p = {fmt(dec.p)} q = {fmt(dec.q)} s = {fmt(dec.s)}", "lambda center radius k i file"]
    for n, t in enumerate(dec.terms):
        name = f"atom_{n:05d}.tsb"
        write_function(d / name, t.atom.values, "grid.txt")
        c = ",".join(str(v) for v in t.atom.ball.center)
        rows.append(f"{fmt(t.lam)} {c} {fmt(t.atom.ball.radius)} {t.k} {t.i} {name}")
    atomic_write(d / "manifest", "\n".join(rows) + "\n")


def read_manifest(directory) -> list:
    """Rows ``(lam, center, radius, k, i, file)`` of a decomposition manifest."""
    path = Path(directory) / "manifest"
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    out = []
    for line in path.read_text().splitlines():
        if not line or line.startswith("#") or line.startswith("lambda"):
            continue
        lam, c, r, k, i, name = line.split()
        out.append((float(lam), tuple(int(v) for v in c.split(",")), float(r), int(k), int(i), name))
    return out
