"""Command-line entry point.

Run configs are flat ``key = value`` files (``#`` comments).  Keys:

``grid``
    Grid description file, relative to the config.
``seed``, ``count``, ``profile``
    Corpus recipe; ``profile`` is ``mixed`` or one of the corpus profiles.
``out``
    Output directory, relative to the config.
``mode``
    ``fast`` or ``exact``.
``refine``
    ``true`` to rerun ratio suites on the refined grid and flag stability.
``stability_factor``
    Allowed change of max ratios under refinement (default 2).
``max_radius``
    Largest Carleson radius as a fraction of the grid length (default 0.25).
``hls``, ``duality``, ``zembed``, ``cylinder``, ``interp``, ``tz``, ``zdyadic``, ``gilbert``
    Parameter tuples separated by ``;``, each a space-separated list:

    * ``hls = p0 p1 q s0 s1 [alpha]``
    * ``duality = p q s``
    * ``zembed = p q [s]``
    * ``cylinder = x1,..,xn r kappa0 kappa1 p``
    * ``interp = p0 p1 q s0 s1 theta [r]``
    * ``tz = p0 p1 q s0 s1 theta c0 c1``
    * ``zdyadic = p q s``
    * ``gilbert = q theta p r [instances] [points]``
"""
from __future__ import annotations

import argparse
import datetime
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import io
from . import verify
from .atoms import Atom, Ball, atom_validate, decompose
from .errors import ConfigurationError, ConvergenceError, DomainError
from .functionals import NormParams, tent_norm, z_norm, z_norm_dyadic
from .gridfn import lq_norm
from .interp import WeightedCouple, gilbert_norms, k_curve

INF = math.inf
SUITE_KEYS = ("hls", "duality", "zembed", "cylinder", "interp", "tz", "zdyadic", "gilbert")
SUITE_ARITY = {
    "hls": (5, 6),
    "duality": (3, 3),
    "zembed": (2, 3),
    "cylinder": (5, 5),
    "interp": (6, 7),
    "tz": (8, 8),
    "zdyadic": (3, 3),
    "gilbert": (4, 6),
}


class HardFailure(Exception):
    """An exact identity or proof-constant check failed."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _num(tok: str) -> float:
    t = tok.strip().lower()
    if t in ("inf", "infinity", "+inf"):
        return INF
    if "/" in t:
        a, b = t.split("/", 1)
        return float(a) / float(b)
    return float(t)


# ---------------------------------------------------------------- config


@dataclass
class RunConfig:
    grid_path: Path
    seed: int = 0
    count: int = 8
    profile: str = "mixed"
    out: Path = Path("out")
    mode: str = "fast"
    refine: bool = False
    stability_factor: float = 2.0
    max_radius: float = 0.25
    suites: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        kv = io.read_keyvalue(path)
        base = path.parent
        if "grid" not in kv:
            raise ConfigurationError(f"{path}: missing key 'grid'")
        known = {"grid", "seed", "count", "profile", "out", "mode", "refine", "stability_factor", "max_radius"}
        unknown = set(kv) - known - set(SUITE_KEYS)
        if unknown:
            raise ConfigurationError(f"{path}: unknown keys {', '.join(sorted(unknown))}")
        try:
            cfg = cls(
                grid_path=base / kv["grid"],
                seed=int(kv.get("seed", 0)),
                count=int(kv.get("count", 8)),
                profile=kv.get("profile", "mixed"),
                out=base / kv.get("out", "out"),
                mode=kv.get("mode", "fast"),
                refine=kv.get("refine", "false").lower() in ("1", "true", "yes"),
                stability_factor=float(kv.get("stability_factor", 2.0)),
                max_radius=float(kv.get("max_radius", 0.25)),
            )
            for key in SUITE_KEYS:
                if key in kv:
                    tuples = []
                    for chunk in kv[key].split(";"):
                        if chunk.strip():
                            tuples.append(chunk.split())
                    cfg.suites[key] = tuples
        except ValueError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
        cfg.validate()
        return cfg

    def validate(self) -> None:
        """Check every parameter tuple before any computation."""
        if self.mode not in ("fast", "exact"):
            raise ConfigurationError(f"mode must be fast or exact, got {self.mode!r}")
        if self.profile != "mixed" and self.profile not in corpus_mod.PROFILES:
            raise ConfigurationError(f"unknown profile {self.profile!r}")
        if self.count < 1:
            raise ConfigurationError("count must be positive")
        for key, tuples in self.suites.items():
            lo, hi = SUITE_ARITY[key]
            for tup in tuples:
                if not (lo <= len(tup) <= hi):
                    raise ConfigurationError(f"{key}: expected {lo}..{hi} values, got {' '.join(tup)!r}")
                nums = [_num(v) for v in tup] if key != "cylinder" else [_num(v) for v in tup[1:]]
                if key == "hls":
                    NormParams(nums[0], nums[2], nums[3])
                    NormParams(nums[1], nums[2], nums[4], nums[5] if len(nums) > 5 else 0.0)
                elif key in ("duality", "zdyadic"):
                    NormParams(nums[0], nums[1], nums[2])
                elif key == "zembed":
                    NormParams(*nums)
                elif key == "cylinder":
                    NormParams(nums[3], INF)
                elif key in ("interp", "tz"):
                    NormParams(nums[0], nums[2], nums[3])
                    NormParams(nums[1], nums[2], nums[4])
                    if not (0 < nums[5] < 1):
                        raise ConfigurationError(f"{key}: theta must lie in (0, 1)")


# ---------------------------------------------------------------- helpers


def _corpus(cfg: RunConfig, grid, window=None):
    if cfg.profile == "mixed":
        return corpus_mod.mixed_corpus(grid, cfg.seed, cfg.count, window)
    return corpus_mod.random_corpus(grid, cfg.seed, cfg.profile, cfg.count, window)


def _header(timestamp: bool) -> str:
    if not timestamp:
        return ""
    return f"# generated {datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')}\n"


def _emit(out: Path, name: str, csv: str, summary: str, timestamp: bool) -> None:
    io.atomic_write(out / f"{name}.csv", csv)
    io.atomic_write(out / f"{name}.summary", _header(timestamp) + summary)
    sys.stdout.write(summary)


def _safe(tag: str) -> str:
    return "".join(c if c.isalnum() or c in "-._" else "_" for c in tag)


def _report_name(key: str, n: int, sub: str) -> str:
    return f"{key}-{n}" + (f"-{_safe(sub)}" if sub else "")


def _ratio_runs(cfg: RunConfig, key: str, make_report, n_workers: int) -> list:
    """Run ``make_report(corpus, grid)`` per tuple, plus the refined rerun when requested."""
    grid = io.read_grid(cfg.grid_path)
    win = corpus_mod.Window.of(grid)
    corpus = _corpus(cfg, grid, win)
    fine_grid = fine_corpus = None
    if cfg.refine:
        fine_grid = grid.refine()
        fine_corpus = _corpus(cfg, fine_grid, win)
    out = []
    for n, tup in enumerate(cfg.suites.get(key, [])):
        reps = make_report(tup, corpus, grid)
        reps = reps if isinstance(reps, dict) else {"": reps}
        for sub, rep in reps.items():
            if fine_grid is not None:
                fine = make_report(tup, fine_corpus, fine_grid)
                fine = fine if isinstance(fine, dict) else {"": fine}
                rep, frep = verify.refinement_stability(rep, fine[sub], cfg.stability_factor)
                out.append((_report_name(key, n, sub) + "-refined", frep))
            out.append((_report_name(key, n, sub), rep))
    return sorted(out, key=lambda x: x[0])


def _max_r(cfg: RunConfig, grid) -> float:
    return cfg.max_radius * grid.space.L


# ---------------------------------------------------------------- subcommands


def cmd_norm(args) -> int:
    f = io.read_function(args.fn)
    if args.lq:
        val = lq_norm(f, _num(args.q))
    else:
        params = NormParams(_num(args.p), _num(args.q), _num(args.s), _num(args.alpha), _num(args.aperture))
        mr = args.max_radius * f.grid.space.L if args.max_radius else None
        val = tent_norm(f, params, args.mode, args.weight, max_radius=mr)
    print(io.fmt(val))
    return 0


def cmd_znorm(args) -> int:
    f = io.read_function(args.fn)
    if args.dyadic:
        val = z_norm_dyadic(f, _num(args.p), _num(args.q), _num(args.s))
    else:
        val = z_norm(f, _num(args.p), _num(args.q), _num(args.s), _num(args.c0), _num(args.c1), args.mode, args.weight)
    print(io.fmt(val))
    return 0


def cmd_decompose(args) -> int:
    f = io.read_function(args.fn)
    p, q, s = _num(args.p), _num(args.q), _num(args.s)
    dec = decompose(f, p, q, s, args.mode)
    io.write_decomposition(args.out, dec)
    fnorm = tent_norm(f, NormParams(p, q, s), args.mode)
    bad = 0
    for t in dec.terms:
        rep = atom_validate(t.atom, args.mode)
        bad += not (rep.valid and rep.derived_ok)
    ratio = dec.lp_sum / fnorm**p if fnorm > 0 else math.nan
    lines = [
        "[decompose]",
        f"atoms = {len(dec.terms)}",
        f"residual = {io.fmt(dec.residual)}",
        f"lambda_p_sum = {io.fmt(dec.lp_sum)}",
        f"norm_p = {io.fmt(fnorm**p)}",
        f"ratio = {io.fmt(ratio)}",
        f"invalid_atoms = {bad}",
    ]
    text = "\n".join(lines) + "\n"
    io.atomic_write(Path(args.out) / "decompose.summary", _header(not args.no_timestamp) + text)
    sys.stdout.write(text)
    if bad or not (dec.residual < 1e-9):
        raise HardFailure("decomposition produced invalid atoms or a large residual")
    return 0


def cmd_validate_atom(args) -> int:
    f = io.read_function(args.fn)
    center = tuple(int(v) for v in args.center.split(","))
    atom = Atom.from_function(f, Ball(center, _num(args.radius)), _num(args.p), _num(args.q), _num(args.s))
    rep = atom_validate(atom, args.mode)
    print("[validate-atom]")
    for k in ("support_ok", "size", "bound", "slack", "size_ok", "derived", "derived_ok"):
        v = getattr(rep, k)
        print(f"{k} = {str(v).lower() if isinstance(v, bool) else io.fmt(v)}")
    print(f"valid = {str(rep.valid).lower()}")
    if not (rep.valid and rep.derived_ok):
        raise HardFailure("not a valid atom")
    return 0


def _read_couple(path, q: float):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    try:
        data = np.loadtxt(path, ndmin=2, comments="#")
    except ValueError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    if data.shape[1] != 3:
        raise ConfigurationError(f"{path}: expected three columns 'm w f'")
    return WeightedCouple(data[:, 0], q, data[:, 1]), data[:, 2]


def cmd_kfun(args) -> int:
    couple, f = _read_couple(args.couple, _num(args.q))
    ts = np.geomspace(_num(args.t_min), _num(args.t_max), args.samples)
    curve = k_curve(ts, f, couple, args.method)
    body = "t,K\n" + "".join(f"{io.fmt(t)},{io.fmt(k)}\n" for t, k in zip(curve.t, curve.K))
    if args.out:
        io.atomic_write(args.out, body)
    sys.stdout.write(body)
    mono, conc = curve.check_shape()
    if not (mono and conc):
        raise HardFailure("K-curve is not monotone and concave on the samples")
    return 0


def cmd_gen_corpus(args) -> int:
    grid = io.read_grid(args.grid)
    cfg = RunConfig(Path(args.grid), seed=args.seed, count=args.count, profile=args.profile)
    cfg.validate()
    fs = _corpus(cfg, grid)
    out = Path(args.out)
    io.write_grid(out / "grid.txt", grid)
    ext = ".tsb" if args.binary else ".tsf"
    for i, f in enumerate(fs):
        io.write_function(out / f"f_{i:03d}{ext}", f, "grid.txt")
    print(f"wrote {len(fs)} functions to {out}")
    return 0


def cmd_identity_suite(args) -> int:
    cfg = RunConfig.load(args.config)
    grid = io.read_grid(cfg.grid_path)
    fs = _corpus(cfg, grid)
    rep = verify.identity_suite(fs, cfg.mode, _max_r(cfg, grid), args.threads)
    _emit(cfg.out, "identity", rep.csv(), rep.summary(), not args.no_timestamp)
    if not rep.ok:
        raise HardFailure("exact identity failed")
    return 0


def _write_reports(cfg, runs, timestamp):
    for name, rep in runs:
        _emit(cfg.out, name, rep.csv(), rep.summary(), timestamp)
    unstable = [name for name, rep in runs if rep.stable is False]
    if unstable:
        sys.stdout.write(f"# unstable under refinement: {', '.join(unstable)}\n")


def cmd_embed_suite(args) -> int:
    cfg = RunConfig.load(args.config)
    nw = args.threads

    def hls(tup, corpus, grid):
        v = [_num(x) for x in tup]
        return verify.hls_suite(corpus, *v[:5], alpha=v[5] if len(v) > 5 else 0.0, mode=cfg.mode,
                                max_radius=_max_r(cfg, grid), n_workers=nw)

    def zembed(tup, corpus, grid):
        v = [_num(x) for x in tup]
        return verify.z_embedding_suite(corpus, *v, n_workers=nw)

    runs = _ratio_runs(cfg, "hls", hls, nw) + _ratio_runs(cfg, "zembed", zembed, nw)
    _write_reports(cfg, runs, not args.no_timestamp)
    failures = []
    grid = io.read_grid(cfg.grid_path)
    corpus = _corpus(cfg, grid)
    for n, tup in enumerate(cfg.suites.get("cylinder", [])):
        center = tuple(int(v) for v in tup[0].split(","))
        r, k0, k1, p = (_num(x) for x in tup[1:])
        rep = verify.cylinder_suite(corpus, center, r, k0, k1, p, cfg.mode)
        extra = (
            f"upper_constant = {io.fmt(rep.upper_constant)}\nlower_constant = {io.fmt(rep.lower_constant)}\n"
            f"upper_ok = {str(rep.upper_ok).lower()}\nlower_ok = {str(rep.lower_ok).lower()}\n"
        )
        _emit(cfg.out, f"cylinder-{n}", rep.upper.csv() + rep.lower.csv()[rep.lower.csv().index("\n") + 1 :],
              rep.upper.summary() + rep.lower.summary() + extra, not args.no_timestamp)
        if not rep.ok:
            failures.append(f"cylinder-{n}")
    if failures:
        raise HardFailure(f"proof-constant checks failed: {', '.join(failures)}")
    return 0


def cmd_duality_suite(args) -> int:
    cfg = RunConfig.load(args.config)
    nw = args.threads

    def dual(tup, corpus, grid):
        p, q, s = (_num(x) for x in tup)
        if p < 1:
            return None
        pairs = [(corpus[i], corpus[(i + 1) % len(corpus)]) for i in range(len(corpus))]
        return verify.duality_suite(pairs, p, q, s, cfg.mode, _max_r(cfg, grid), nw)

    grid = io.read_grid(cfg.grid_path)
    corpus = _corpus(cfg, grid)
    std = [t for t in cfg.suites.get("duality", []) if _num(t[0]) >= 1]
    atom_tuples = [t for t in cfg.suites.get("duality", []) if _num(t[0]) < 1]
    sub = RunConfig(**{**cfg.__dict__, "suites": {"duality": std}})
    runs = _ratio_runs(sub, "duality", dual, nw)
    _write_reports(cfg, runs, not args.no_timestamp)
    failures = []
    for n, tup in enumerate(atom_tuples):
        p, q, s = (_num(x) for x in tup)
        atoms = corpus_mod.random_atoms(grid, cfg.seed, cfg.count, p, q, s)
        rows = []
        for g in corpus:
            rows += verify.duality_atom_check(atoms, g, cfg.mode, _max_r(cfg, grid))
        ok = all(r.pairing <= r.ball_value * (1 + verify.PROOF_TOL) + 1e-300 for r in rows)
        ok = ok and all(r.ball_value <= r.norm * (1 + verify.PROOF_TOL) for r in rows)
        csv = "pairing,ball_value,norm\n" + "".join(
            f"{io.fmt(r.pairing)},{io.fmt(r.ball_value)},{io.fmt(r.norm)}\n" for r in rows)
        worst = min((r.slack for r in rows), default=0.0)
        summary = (f"[duality-atoms]\nparams = {' '.join(tup)}\nrows = {len(rows)}\n"
                   f"min_slack = {io.fmt(worst)}\nresult = {'pass' if ok else 'FAIL'}\n")
        _emit(cfg.out, f"duality-atoms-{n}", csv, summary, not args.no_timestamp)
        if not ok:
            failures.append(f"duality-atoms-{n}")
    if failures:
        raise HardFailure(f"proof-constant checks failed: {', '.join(failures)}")
    return 0


def cmd_interp_suite(args) -> int:
    cfg = RunConfig.load(args.config)
    nw = args.threads

    def interp(tup, corpus, grid):
        v = [_num(x) for x in tup]
        return verify.tent_interp_suite(corpus, *v, n_workers=nw)

    def tz(tup, corpus, grid):
        v = [_num(x) for x in tup]
        return verify.t_z_suite(corpus, *v, n_workers=nw)

    def zd(tup, corpus, grid):
        v = [_num(x) for x in tup]
        return verify.z_dyadic_suite(corpus, *v, n_workers=nw)

    runs = _ratio_runs(cfg, "interp", interp, nw) + _ratio_runs(cfg, "tz", tz, nw) + _ratio_runs(cfg, "zdyadic", zd, nw)
    _write_reports(cfg, runs, not args.no_timestamp)
    for n, tup in enumerate(cfg.suites.get("gilbert", [])):
        v = [_num(x) for x in tup]
        q, theta, p, r = v[:4]
        count = int(v[4]) if len(v) > 4 else 32
        size = int(v[5]) if len(v) > 5 else 64
        rows = []
        for m, w, f in corpus_mod.random_couples(cfg.seed, count, size, q):
            c = WeightedCouple(m, q, w)
            rows.append((gilbert_norms(f, c, theta, p, r), gilbert_norms(f, c, theta, p, r, per_octave=32)))
        cg16 = max(x.spread for x, _ in rows)
        cg32 = max(y.spread for _, y in rows)
        csv = "index,disc,g2,g3,g2_fine,g3_fine\n" + "".join(
            f"{i},{io.fmt(x.disc)},{io.fmt(x.g2)},{io.fmt(x.g3)},{io.fmt(y.g2)},{io.fmt(y.g3)}\n"
            for i, (x, y) in enumerate(rows))
        summary = (f"[gilbert]\nparams = {' '.join(tup)}\ncount = {len(rows)}\nC_G = {io.fmt(cg16)}\n"
                   f"C_G_fine = {io.fmt(cg32)}\nchange = {io.fmt(abs(cg32 / cg16 - 1))}\n")
        _emit(cfg.out, f"gilbert-{n}", csv, summary, not args.no_timestamp)
    return 0


def cmd_report(args) -> int:
    d = Path(args.dir)
    if not d.is_dir():
        raise FileNotFoundError(f"no such directory: {d}")
    parts = []
    for path in sorted(d.glob("*.summary")):
        text = "".join(ln + "\n" for ln in path.read_text().splitlines() if not ln.startswith("# generated"))
        parts.append(text)
    if not parts:
        raise ConfigurationError(f"{d}: no .summary files")
    body = _header(not args.no_timestamp) + "\n".join(parts)
    io.atomic_write(d / "report.txt", body)
    sys.stdout.write(body)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tslab", description="Weighted tent spaces on grids: norms, atoms, interpolation suites.")
    ap.add_argument("--threads", type=int, default=None, help="worker count (default: TSLAB_THREADS or all cores)")
    ap.add_argument("--no-timestamp", action="store_true", help="omit the timestamp line from reports")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def common(p, fn=True):
        if fn:
            p.add_argument("--fn", required=True, help="grid-function file")
        p.add_argument("--mode", choices=("fast", "exact"), default="fast")

    p = sub.add_parser("norm", help="weighted tent-space quasi-norm of a grid function")
    common(p)
    p.add_argument("--p", default="2")
    p.add_argument("--q", default="2")
    p.add_argument("--s", default="0")
    p.add_argument("--alpha", default="0")
    p.add_argument("--aperture", default="1")
    p.add_argument("--weight", choices=("volume", "power"), default="volume")
    p.add_argument("--max-radius", type=float, default=None, help="Carleson radius cap as a fraction of the grid length")
    p.add_argument("--lq", action="store_true", help="print the L^q(X^+) norm instead")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("znorm", help="Z-space quasi-norm")
    common(p)
    p.add_argument("--p", default="2")
    p.add_argument("--q", default="2")
    p.add_argument("--s", default="0")
    p.add_argument("--c0", default="1")
    p.add_argument("--c1", default="2")
    p.add_argument("--weight", choices=("volume", "power"), default="volume")
    p.add_argument("--dyadic", action="store_true", help="use the dyadic Whitney-cube form")
    p.set_defaults(func=cmd_znorm)

    p = sub.add_parser("decompose", help="atomic decomposition")
    common(p)
    p.add_argument("--p", default="1")
    p.add_argument("--q", default="inf")
    p.add_argument("--s", default="0")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("validate-atom", help="check the atom conditions for a function and ball")
    common(p)
    p.add_argument("--center", required=True, help="grid index, comma separated")
    p.add_argument("--radius", required=True)
    p.add_argument("--p", default="1")
    p.add_argument("--q", default="2")
    p.add_argument("--s", default="0")
    p.set_defaults(func=cmd_validate_atom)

    p = sub.add_parser("kfun", help="K-functional curve of a weighted couple")
    p.add_argument("--couple", required=True, help="text file with columns m w f")
    p.add_argument("--q", default="2")
    p.add_argument("--t-min", default="1e-3")
    p.add_argument("--t-max", default="1e3")
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--method", choices=("convex-solve", "brute-force", "split-formula"), default="convex-solve")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_kfun)

    for name, fn, text in (
        ("interp-suite", cmd_interp_suite, "Gilbert norms, truncation characterizations, T-Z equivalence"),
        ("embed-suite", cmd_embed_suite, "embedding ratios and cylinder constants"),
        ("duality-suite", cmd_duality_suite, "duality ratios and the atom pairing bound"),
        ("identity-suite", cmd_identity_suite, "exact identities"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True)
        p.set_defaults(func=fn)

    p = sub.add_parser("gen-corpus", help="write a deterministic corpus")
    p.add_argument("--grid", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=8)
    p.add_argument("--profile", default="mixed")
    p.add_argument("--binary", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("report", help="collect suite summaries of an output directory")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.threads = verify.workers(args.threads)
        return args.func(args)
    except HardFailure as exc:
        print(f"tslab: check failed: {exc}", file=sys.stderr)
        return 2
    except (ConfigurationError, DomainError, FileNotFoundError, ConvergenceError, OSError) as exc:
        print(f"tslab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
