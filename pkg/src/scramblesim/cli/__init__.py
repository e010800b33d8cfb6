"""Command-line runner: ``scramblesim <kind> --config FILE`` and ``scramblesim reproduce``.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np

from .. import __version__
from .config import KINDS, ConfigError, ExperimentConfig, load_config
from .experiments import TOLERANCES, evaluate, points
from .records import to_csv, to_ndjson

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2


def run_experiment(cfg: ExperimentConfig, config_hash: str, workers: int = 1,
                   tolerance: str = "strict") -> list[dict]:
    """Evaluate every grid point of ``cfg``; records come back in grid order."""
    tol = TOLERANCES[tolerance]
    grid = points(cfg)
    task = partial(evaluate, cfg, tol)
    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, grid))
    else:
        results = [task(p) for p in grid]
    meta = {"kind": cfg.kind, "config_sha256": config_hash, "seed": cfg.seed,
            "versions": {"scramblesim": __version__, "numpy": np.__version__}}
    return [{"index": i, **meta, **r} for i, r in enumerate(results)]


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scramblesim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML experiment file")
    common.add_argument("--out", help="output path (default: config output.path, else stdout)")
    common.add_argument("--format", choices=("ndjson", "csv"))
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--tolerance-profile", choices=tuple(TOLERANCES), default="strict")
    run = sub.add_parser("run", parents=[common], help="kind taken from the config file")
    run.set_defaults(kind=None)
    for kind in KINDS:
        p = sub.add_parser(kind, parents=[common], help=f"{kind} experiment (config kind must match)")
        p.set_defaults(kind=kind)
    rep = sub.add_parser("reproduce", help="check every reference fixture")
    rep.add_argument("--workers", type=int, default=1)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "reproduce":
        from .reproduce import print_table, run_fixtures

        results = run_fixtures()
        print_table(results)
        return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL

    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg, digest = load_config(args.config, args.kind)
        if args.seed is not None:
            cfg = cfg.model_copy(update={"seed": args.seed})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    records = run_experiment(cfg, digest, args.workers, args.tolerance_profile)
    fmt = args.format or cfg.output.format
    text = to_csv(records) if fmt == "csv" else to_ndjson(records)
    out = args.out or cfg.output.path
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)

    failed = [r for r in records if r["status"] == "numerical-failure"]
    for r in failed:
        print(f"numerical failure at point {r['index']}: {r['message']}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else EXIT_OK
