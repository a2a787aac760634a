"""Command-line entry point: ``condcodes <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import acceptance, harness
from .harness import ConfigError, ExperimentConfig

DEFAULTS = {
    "verify": ExperimentConfig(
        harness.VERIFY,
        {
            "condenser": {"construction": "linear-hash", "n": 8, "r": 6, "kind": "lossless"},
            "sources": [{"type": "prefix", "size": 16}, {"type": "random", "size": 16}, {"type": "random", "size": 8}],
        },
    ),
    "census": ExperimentConfig(
        harness.ERASURE,
        {"condenser": {"construction": "linear-hash", "n": 8, "r": 4, "kind": "lossless"}, "ensemble": "F", "max_weight": 3},
    ),
    "simulate": ExperimentConfig(
        harness.BSC_CENSUS,
        {"condenser": {"construction": "linear-hash", "n": 10, "r": 8, "kind": "lossless"}, "p": 0.1, "eta": 0.1},
        trials=2000,
    ),
    "concat": ExperimentConfig(
        harness.CONCAT,
        {"n": 10, "k": 6, "s": 32, "k_prime": 24, "channel": {"kind": "bec", "p": 0.2}},
        trials=1000,
    ),
    "duality": ExperimentConfig(harness.DUALITY, {"n_max": 12}, trials=10_000),
}

ALLOWED = {
    "verify": {harness.VERIFY},
    "census": {harness.ERASURE, harness.BSC_CENSUS},
    "simulate": set(harness.KINDS),
    "concat": {harness.CONCAT},
    "duality": {harness.DUALITY},
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="condcodes", description="Code ensembles from linear condensers: experiments and checks.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("verify", "census", "simulate", "concat", "duality", "suite"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="experiment config (JSON)")
        sp.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        sp.add_argument("--trials", type=int, help="Monte-Carlo trials")
        sp.add_argument("--out", type=Path, help="CSV output path")
        sp.add_argument("--filter", dest="filter_name", help="only run checks whose name contains this")
    return p


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else DEFAULTS[args.command]
    if cfg.experiment not in ALLOWED[args.command]:
        raise ConfigError(f"'{args.command}' cannot run a {cfg.experiment} config")
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    return dataclasses.replace(cfg, **changes)


def _suite(args) -> int:
    checks = acceptance.select(args.filter_name)
    if not checks:
        print(f"no check matches {args.filter_name!r}", file=sys.stderr)
        return 2
    results = acceptance.run_suite(args.filter_name, args.seed or 0)
    if args.out:
        rows = [
            harness.MetricRow(r.key, name, float(v), float(v), float(v), 0, args.seed or 0)
            for r in results
            for name, v in [("passed", float(r.passed)), *sorted(r.metrics.items())]
        ]
        args.out.write_text(harness.ResultRecord("suite", rows).to_csv())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "suite":
            return _suite(args)
        cfg = _config(args)
        rec = harness.run(cfg, args.out)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(rec.to_csv(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
