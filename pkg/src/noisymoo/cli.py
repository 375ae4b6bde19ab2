"""Benchmark command line.

Subcommands: ``run`` one slice, ``sweep`` the whole grid, ``select`` one of
the two unbiased comparison protocols, ``report`` the CSV outputs. The
output root defaults to --out, then $NOISYMOO_OUT, then the config's
output_dir.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .harness import (ExperimentConfig, derive_seed, record_path, report,
                      run_single, select_params_prestudy, select_params_split, sweep)


def _out_dir(args, config: ExperimentConfig) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get("NOISYMOO_OUT")
    if env:
        return Path(env)
    return Path(config.output_dir)


def _load(args) -> ExperimentConfig:
    return ExperimentConfig.load(args.config)


def _cmd_run(args) -> int:
    config = _load(args)
    slices = config.slices()
    if not 0 <= args.slice < len(slices):
        print(f"slice index out of range (0..{len(slices) - 1})", file=sys.stderr)
        return 2
    slice_ = slices[args.slice]
    base_seed = args.seed if args.seed is not None else config.base_seed
    seed = derive_seed(base_seed, slice_.fingerprint, args.rep)
    record = run_single(slice_, args.rep, seed, config.metric_params(),
                        config.variation_config())
    out = _out_dir(args, config)
    path = record_path(out, slice_, args.rep)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(record.canonical_json() + "\n", encoding="utf-8")
    print(f"{slice_.strategy_label} on {slice_.problem} {slice_.noise}: "
          f"hv={record.hv:.4f} spent={record.spent} -> {path}")
    return 0


def _cmd_sweep(args) -> int:
    config = _load(args)
    out = _out_dir(args, config)
    budget = config.selection.get("prestudy_budget") if args.prestudy else None
    records = sweep(config, out, jobs=args.jobs, budget=budget,
                    base_seed=args.seed)
    label = "prestudy" if args.prestudy else "full"
    print(f"{label} sweep complete: {len(records)} records in {out / 'records'}")
    return 0


def _cmd_select(args) -> int:
    config = _load(args)
    out = _out_dir(args, config)
    full = sweep(config, out, jobs=args.jobs, include_log=False)
    if args.protocol == "split":
        sel = config.selection
        rng = np.random.default_rng(config.base_seed)
        fractions = select_params_split(full, sel["n_select"], sel["n_compare"],
                                        sel["n_repeats"], rng)
        payload = {"protocol": "split",
                   "fractions": {str(k): v for k, v in fractions.items()}}
    else:
        prestudy = sweep(config, out, jobs=args.jobs, include_log=False,
                         budget=config.selection["prestudy_budget"])
        table = select_params_prestudy(prestudy, full)
        payload = {"protocol": "prestudy", **table}
    path = Path(out) / f"selection_{args.protocol}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    print(json.dumps(payload, indent=2, sort_keys=True))
    print(f"written to {path}")
    return 0


def _cmd_report(args) -> int:
    config = _load(args)
    out = _out_dir(args, config)
    records = sweep(config, out, jobs=args.jobs, include_log=False)
    paths = report(records, out, fmt=args.format)
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisymoo",
                                     description="Noisy multi-objective resampling benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", default=None, help="output root directory")
        p.add_argument("--jobs", type=int, default=1, help="parallel runs")
        p.add_argument("--seed", type=int, default=None, help="override base seed")

    p_run = sub.add_parser("run", help="run one grid slice")
    common(p_run)
    p_run.add_argument("--slice", type=int, required=True, help="slice ordinal")
    p_run.add_argument("--rep", type=int, default=0, help="replication index")
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the full grid x replications")
    common(p_sweep)
    p_sweep.add_argument("--prestudy", action="store_true",
                         help="use the prestudy budget instead of the full one")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_select = sub.add_parser("select", help="unbiased strategy comparison")
    common(p_select)
    p_select.add_argument("--protocol", choices=("split", "prestudy"), required=True)
    p_select.set_defaults(fn=_cmd_select)

    p_report = sub.add_parser("report", help="write CSV reports")
    common(p_report)
    p_report.add_argument("--format", default="csv", choices=("csv",))
    p_report.set_defaults(fn=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
