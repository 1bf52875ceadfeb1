"""Command-line entry point: ``amtsim <subcommand> --config FILE``.

Each run writes ``results.csv`` (one row per grid point) and
``manifest.json`` (resolved config, its hash, per-row provenance, checks
and wall-clock time) into the output directory.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfgmod
from . import experiments
from .errors import AmtError, ConfigError

EXIT_USAGE = 2
EXIT_RUN = 1
EXIT_BREACH = 3

# subcommand -> (allowed experiment kinds, default kind)
COMMANDS: dict[str, tuple[tuple[str, ...], str]] = {
    "moments": (cfgmod.KINDS, "theory-only"),
    "simulate": (("welfare-convergence", "budget-growth", "revenue-ceiling", "impossibility"),
                 "welfare-convergence"),
    "rates": (("theory-only",), "theory-only"),
    "incentives": (("incentives",), "incentives"),
    "expost": (("ex-post",), "ex-post"),
    "profit": (("profit",), "profit"),
    "report": (cfgmod.KINDS, "welfare-convergence"),
}
HELP = {
    "moments": "per-law moments of psi and the transform (no simulation)",
    "simulate": "welfare, budget, revenue-ceiling or impossibility experiments",
    "rates": "closed-form bounds and rate diagnostics along the n-grid",
    "incentives": "misreporting gains and interim utilities of a transfer scheme",
    "expost": "ex post welfare tail frequencies against Hoeffding bounds",
    "profit": "profit ratio of a transform rule against the virtual-surplus optimum",
    "report": "run whatever experiment kind the config names",
}


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return "" if x is None else str(x)


def write_csv(path: Path, result: experiments.ExperimentResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(result.columns)
        for row in result.rows:
            w.writerow([format_value(row[c]) for c in result.columns])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def build_manifest(cmd: str, cfg: cfgmod.ExperimentConfig, result, workers: int,
                   seconds: float) -> dict:
    rows = [dict(p, **{k: r[k] for k in result.columns}) for p, r in
            zip(result.provenance, result.rows)]
    return _jsonable({
        "command": cmd,
        "kind": result.kind,
        "version": __version__,
        "config_hash": cfg.digest,
        "config": cfg.raw,
        "seed": cfg.seed,
        "workers": workers,
        "replications": result.replications,
        "wall_clock_seconds": seconds,
        "rows": rows,
        "summary": result.summary,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                   for c in result.checks],
        "passed": result.passed,
    })


def execute(cmd: str, cfg: cfgmod.ExperimentConfig, out: Path, workers: int = 1):
    """Run one subcommand and write its files; returns the result."""
    t0 = time.perf_counter()
    if cmd == "moments":
        result = experiments.run_moments(cfg, workers)
    else:
        result = experiments.run(cfg, workers)
    seconds = time.perf_counter() - t0
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "results.csv", result)
    manifest = build_manifest(cmd, cfg, result, workers, seconds)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, allow_nan=False) + "\n",
                                       encoding="utf-8")
    return result


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="amtsim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name, help=HELP[name])
        s.add_argument("--config", type=Path, help="JSON experiment config")
        s.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
        s.add_argument("--workers", type=int, default=1, help="simulation threads")
        s.add_argument("--strict", action="store_true",
                       help="exit nonzero when any acceptance check fails")
        s.add_argument("--out", type=Path, help="output directory")
    return p


def _load(args) -> cfgmod.ExperimentConfig:
    allowed, default = COMMANDS[args.command]
    if args.config is not None:
        user = json.loads(args.config.read_text(encoding="utf-8"))
        root = args.config.parent
    else:
        user, root = {}, None
    if not isinstance(user, dict):
        raise ConfigError("config must be a JSON object")
    kind = user.get("kind", default)
    if kind not in allowed:
        raise ConfigError(f"'{args.command}' does not run experiments of kind {kind!r}")
    return cfgmod.resolve(user, kind=kind, seed=args.seed,
                          output=str(args.out) if args.out is not None else None, root=root)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.workers < 1:
        print("amtsim: --workers must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = _load(args)
    except (ConfigError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"amtsim: invalid config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = execute(args.command, cfg, cfg.output, args.workers)
    except ConfigError as exc:
        print(f"amtsim: invalid config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AmtError as exc:
        print(f"amtsim: run failed: {exc}", file=sys.stderr)
        return EXIT_RUN
    print(f"{result.kind}: {len(result.rows)} rows -> {cfg.output / 'results.csv'}")
    for c in result.checks:
        print(f"  [{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    if args.strict and not result.passed:
        return EXIT_BREACH
    return 0


if __name__ == "__main__":
    sys.exit(main())
