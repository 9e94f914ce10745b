"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 input error, 3 resource guard.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .analysis import MAX_GRAM_DIM, analyze_level
from .classical import EPS_MERGE_DEFAULT
from .discretize import EPS_TAIL_DEFAULT, sweep
from .errors import QhsmmError, SizeError
from .io import model_hash, resolve_source
from .quantum import EPS_DUP_DEFAULT
from .sampler import sample_trajectory, write_trajectory
from .spectrum import default_fit_range, tail_fit
from .validation import run_checks

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3
MAX_LEVELS = 16

ANALYSIS_COLUMNS = ["level", "dt", "gram_dim", "m_q_bits", "c_mu_bits", "tail_exponent", "residual"]
PARTITION_COLUMNS = ["level", "dt", "n_states", "c_mu_bits"]
SPECTRUM_COLUMNS = ["rank", "lambda"]


@dataclass
class RunConfig:
    source: str
    levels: int = 4
    dt: float = 0.25
    aligned: bool = False
    eps_tail: float = EPS_TAIL_DEFAULT
    eps_merge: float = EPS_MERGE_DEFAULT
    eps_dup: float = EPS_DUP_DEFAULT
    seed: int = 0
    out: str = "out"
    deterministic: bool = False
    max_gram_dim: int = MAX_GRAM_DIM

    def check(self) -> None:
        if self.levels < 1:
            raise ValueError("--levels must be at least 1")
        if self.levels > MAX_LEVELS:
            raise SizeError(f"--levels {self.levels} exceeds the guard of {MAX_LEVELS}")
        if not self.dt > 0:
            raise ValueError("--dt must be positive")
        for name in ("eps_tail", "eps_merge", "eps_dup"):
            v = getattr(self, name)
            if not 0 < v <= 1e-3:
                raise ValueError(f"--{name.replace('_', '-')} must lie in (0, 1e-3]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("--seed must be a 64-bit unsigned integer")


def _example_params(source: str) -> tuple[float, float] | None:
    if source.startswith("example:"):
        a, b = source[len("example:"):].split(",")
        return float(a), float(b)
    return None


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def _csv_text(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


@contextlib.contextmanager
def _threads(cfg: RunConfig):
    if not cfg.deterministic:
        yield
        return
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=1):
        yield


def cmd_analyze(cfg: RunConfig) -> int:
    model = resolve_source(cfg.source)
    out = Path(cfg.out)
    rows, part_rows, levels = [], [], []
    with _threads(cfg):
        for i, d in enumerate(sweep(model, cfg.dt, cfg.levels, cfg.eps_tail, cfg.aligned)):
            r = analyze_level(d, i, cfg.eps_merge, cfg.eps_dup, cfg.max_gram_dim)
            row = r.row()
            rows.append(row)
            part_rows.append({k: row[k] for k in PARTITION_COLUMNS})
            rec = dict(row)
            if not cfg.deterministic:
                rec["wall_time_s"] = r.wall_time
            levels.append(rec)
            print(
                f"level {i}: dt={r.dt:.6g} states={r.partition.n_states} gram_dim={r.gram_dim} "
                f"C_mu={r.c_mu:.6f} M_q={r.m_q:.6f}"
            )
    _write_atomic(out / "analysis.csv", _csv_text(ANALYSIS_COLUMNS, rows))
    _write_atomic(out / "partition.csv", _csv_text(PARTITION_COLUMNS, part_rows))
    summary = {"config": asdict(cfg), "model_hash": model_hash(model), "version": __version__, "levels": levels}
    _write_atomic(out / "summary.json", _json_text(summary))
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, level: int, n_lo: int | None, n_hi: int | None, beta_from: int | None) -> int:
    model = resolve_source(cfg.source)
    if level + 1 > MAX_LEVELS:
        raise SizeError(f"--level {level} exceeds the guard of {MAX_LEVELS - 1}")
    with _threads(cfg):
        for i, d in enumerate(sweep(model, cfg.dt, level + 1, cfg.eps_tail, cfg.aligned)):
            if i == level:
                r = analyze_level(d, i, cfg.eps_merge, cfg.eps_dup, cfg.max_gram_dim)
    lam = r.spectrum.eigenvalues
    out = Path(cfg.out)
    rows = [{"rank": k + 1, "lambda": float(v)} for k, v in enumerate(lam)]
    _write_atomic(out / f"spectrum_level{level}.csv", _csv_text(SPECTRUM_COLUMNS, rows))
    if n_lo is None or n_hi is None:
        rng = default_fit_range(len(lam))
    else:
        rng = (n_lo, n_hi)
    fit = tail_fit(r.spectrum, *rng, beta_from=beta_from).as_dict() if rng else None
    doc = {
        "config": asdict(cfg),
        "level": level,
        "dt": r.dt,
        "n_eigenvalues": len(lam),
        "residual": r.spectrum.residual,
        "m_q_bits": r.m_q,
        "tail_fit": fit,
    }
    _write_atomic(out / f"tail_fit_level{level}.json", _json_text(doc))
    expo = "n/a" if fit is None else f"{fit['exponent']:.4f}"
    print(f"level {level}: dt={r.dt:.6g} eigenvalues={len(lam)} M_q={r.m_q:.6f} tail exponent={expo}")
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    model = resolve_source(cfg.source)
    with _threads(cfg):
        checks = run_checks(
            model,
            cfg.dt,
            cfg.eps_tail,
            cfg.eps_merge,
            cfg.eps_dup,
            cfg.seed,
            aligned=cfg.aligned,
            example=_example_params(cfg.source),
        )
    ok = all(c.passed for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    doc = {"config": asdict(cfg), "model_hash": model_hash(model), "passed": ok, "checks": [c.as_dict() for c in checks]}
    _write_atomic(Path(cfg.out) / "validation.json", _json_text(doc))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sample(cfg: RunConfig, n_events: int, output: str | None) -> int:
    if n_events < 0:
        raise ValueError("--events must be nonnegative")
    model = resolve_source(cfg.source)
    traj = sample_trajectory(model, cfg.seed, n_events)
    path = Path(output) if output else Path(cfg.out) / "trajectory.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    write_trajectory(path, traj, model)
    print(f"model={model_hash(model)} seed={cfg.seed} events={n_events} -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("source", help="process file, example:TFix,TBrk or poisson:scale")
    common.add_argument("--dt", type=float, default=0.25, help="coarsest grid step (default 0.25)")
    common.add_argument("--levels", type=int, default=4, help="number of halvings of dt in the sweep")
    common.add_argument("--paper-grid", dest="aligned", action="store_true", help="require every dwell breakpoint on the grid")
    common.add_argument("--eps-tail", type=float, default=EPS_TAIL_DEFAULT)
    common.add_argument("--eps-merge", type=float, default=EPS_MERGE_DEFAULT)
    common.add_argument("--eps-dup", type=float, default=EPS_DUP_DEFAULT)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--deterministic", action="store_true", help="single-threaded BLAS, no timings in outputs")
    common.add_argument("--max-gram-dim", type=int, default=MAX_GRAM_DIM)

    p = argparse.ArgumentParser(prog="qhsmm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="C_mu and M_q over a refinement sweep")
    sp = sub.add_parser("spectrum", parents=[common], help="ranked eigenvalues and tail fit at one level")
    sp.add_argument("--level", type=int, default=0, help="0-based level: dt / 2**level")
    sp.add_argument("--fit-lo", type=int, default=None)
    sp.add_argument("--fit-hi", type=int, default=None)
    sp.add_argument("--beta-from", type=int, default=None)
    sub.add_parser("validate", parents=[common], help="run the invariant suite")
    sm = sub.add_parser("sample", parents=[common], help="write a sampled trajectory")
    sm.add_argument("--events", type=int, default=1000)
    sm.add_argument("--output", default=None, help="trajectory path (default OUT/trajectory.txt)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        source=args.source,
        levels=args.levels,
        dt=args.dt,
        aligned=args.aligned,
        eps_tail=args.eps_tail,
        eps_merge=args.eps_merge,
        eps_dup=args.eps_dup,
        seed=args.seed,
        out=args.out,
        deterministic=args.deterministic,
        max_gram_dim=args.max_gram_dim,
    )
    try:
        cfg.check()
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "spectrum":
            if args.level < 0:
                raise ValueError("--level must be nonnegative")
            return cmd_spectrum(cfg, args.level, args.fit_lo, args.fit_hi, args.beta_from)
        if args.command == "validate":
            return cmd_validate(cfg)
        return cmd_sample(cfg, args.events, args.output)
    except SizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (QhsmmError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
