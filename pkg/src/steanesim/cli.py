"""Command-line entry points.

Subcommands: gen-ensemble, simulate, metrics, histogram, trace, export-ml.
Worker-pool size is controlled only by the STEANESIM_WORKERS environment
variable; everything else is a flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .campaign import (CampaignConfig, convergence_trace, export_ml,
                       export_scatter, gen_ensemble, reference_curves,
                       run_physical_metrics, run_simulate, write_jsonl)
from .channels import load_channels
from .metrics import MetricKind
from .pauli import steane_code
from .sampling import outlier_histogram


def _add_campaign_flags(p: argparse.ArgumentParser):
    p.add_argument("--channels", required=True, help="channels JSONL file")
    p.add_argument("--out-dir", default="campaign")
    p.add_argument("--levels", type=int, nargs="+", default=[1, 2])
    p.add_argument("--metrics", nargs="+", default=["infidelity"],
                   choices=[m.value for m in MetricKind])
    p.add_argument("--physical-metrics", nargs="+",
                   default=[m.value for m in MetricKind],
                   choices=[m.value for m in MetricKind])
    p.add_argument("--mode", default="direct",
                   choices=["direct", "power_law", "uniform"])
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--master-seed", type=int, default=2026)
    p.add_argument("--averaging", default="eq2", choices=["eq1", "eq2"])
    p.add_argument("--no-level1-exhaustive", action="store_true",
                   help="sample level 1 instead of enumerating it")


def _config_from_args(args, count: int) -> CampaignConfig:
    return CampaignConfig(
        count=count,
        deltas=[0.0],
        master_seed=args.master_seed,
        levels=args.levels,
        metrics=args.metrics,
        physical_metrics=args.physical_metrics,
        sampler_mode=args.mode,
        n_samples=args.samples,
        level1_exhaustive=not args.no_level1_exhaustive,
        averaging=args.averaging,
        out_dir=args.out_dir,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="steanesim")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-ensemble", help="generate a random channel ensemble")
    p.add_argument("--count", type=int, required=True, help="channels per delta")
    p.add_argument("--delta", type=float, nargs="+", required=True)
    p.add_argument("--master-seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="run a simulation campaign")
    _add_campaign_flags(p)
    p.add_argument("--scatter", action="store_true",
                   help="also export scatter files per (metric, level)")
    p.add_argument("--reference-curves", action="store_true",
                   help="also export depolarizing/rotation reference curves")

    p = sub.add_parser("metrics", help="physical metric table for an ensemble")
    p.add_argument("--channels", required=True)
    p.add_argument("--metrics", nargs="+", default=[m.value for m in MetricKind],
                   choices=[m.value for m in MetricKind])
    p.add_argument("--out", required=True)

    p = sub.add_parser("histogram", help="(probability, damage) syndrome histogram")
    p.add_argument("--channels", required=True)
    p.add_argument("--index", type=int, default=0, help="channel index in the file")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--budget", type=int, default=None,
                   help="sampled histories (required for level >= 2)")
    p.add_argument("--metric", default="infidelity",
                   choices=[m.value for m in MetricKind])
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("trace", help="convergence trace for one channel")
    p.add_argument("--channels", required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--level", type=int, default=2)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--modes", nargs="+", default=["direct", "power_law"],
                   choices=["direct", "power_law", "uniform"])
    p.add_argument("--metric", default="infidelity")
    p.add_argument("--master-seed", type=int, default=2026)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("export-ml", help="regression dataset from campaign results")
    _add_campaign_flags(p)
    p.add_argument("--out", required=True)

    args = parser.parse_args(argv)

    if args.command == "gen-ensemble":
        gen_ensemble(args.count, args.delta, args.master_seed, args.out)
        print(f"wrote {args.count * len(args.delta)} channels to {args.out}")
        return 0

    if args.command == "simulate":
        channels = load_channels(args.channels)
        cfg = _config_from_args(args, count=len(channels))
        run_simulate(cfg, args.channels)
        if args.scatter:
            export_scatter(cfg, args.channels)
        if args.reference_curves:
            for family in ("depolarizing", "rotation"):
                reference_curves(cfg, family=family)
        print(f"campaign complete in {cfg.out_dir}")
        return 0

    if args.command == "metrics":
        channels = load_channels(args.channels)
        run_physical_metrics(channels, args.metrics, args.out)
        print(f"wrote {len(channels) * len(args.metrics)} metric rows to {args.out}")
        return 0

    if args.command == "histogram":
        channels = load_channels(args.channels)
        ch = channels[args.index]
        hist = outlier_histogram(steane_code(), ch.gamma, args.level,
                                 metric=args.metric, budget=args.budget,
                                 rng=np.random.default_rng(args.seed),
                                 bins=args.bins)
        os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
        with open(args.out, "w") as fh:
            fh.write(hist.to_json())
        print(f"histogram with {hist.total} entries -> {args.out}")
        return 0

    if args.command == "trace":
        channels = load_channels(args.channels)
        ch = channels[args.index]
        convergence_trace(ch.gamma, args.level, args.samples, args.modes,
                          args.master_seed, out_path=args.out,
                          metric=args.metric, stride=args.stride)
        print(f"traces -> {args.out}")
        return 0

    if args.command == "export-ml":
        channels = load_channels(args.channels)
        cfg = _config_from_args(args, count=len(channels))
        export_ml(cfg, args.channels, args.out)
        print(f"dataset with {len(channels)} rows -> {args.out}")
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
