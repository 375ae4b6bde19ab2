#!/usr/bin/env python3
"""Run the full desk-scale comparison study end to end.

Sweeps the grid in configs/desk.json (full budget and prestudy budget),
applies both selection protocols, and writes the CSV reports. With the
shipped config this is roughly 4,000 runs of 10,000 evaluations; expect
hours, not minutes. Use --jobs to parallelize across cores, re-running
picks up where it left off (records are keyed by fingerprint and seed).

For a coffee-break version: --budget 2000 --replications 3.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from noisymoo.harness import (ExperimentConfig, report, select_params_prestudy,
                              select_params_split, sweep)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", default="configs/desk.json")
    parser.add_argument("--out", default=None)
    parser.add_argument("--jobs", type=int, default=2)
    parser.add_argument("--budget", type=int, default=None,
                        help="override the full-run budget")
    parser.add_argument("--replications", type=int, default=None)
    args = parser.parse_args()

    raw = json.loads(Path(args.config).read_text())
    if args.budget:
        raw["budget"] = args.budget
    if args.replications:
        raw["replications"] = args.replications
    config = ExperimentConfig.from_dict(raw)
    out = Path(args.out or config.output_dir)

    print(f"{len(config.slices())} slices x {config.replications} replications")
    full = sweep(config, out, jobs=args.jobs, include_log=False)
    print(f"full sweep done: {len(full)} records")
    prestudy = sweep(config, out, jobs=args.jobs, include_log=False,
                     budget=config.selection["prestudy_budget"])
    print(f"prestudy sweep done: {len(prestudy)} records")

    rng = np.random.default_rng(config.base_seed)
    sel = config.selection
    fractions = select_params_split(full, sel["n_select"], sel["n_compare"],
                                    sel["n_repeats"], rng)
    (out / "selection_split.json").write_text(
        json.dumps({str(k): v for k, v in fractions.items()}, indent=2, sort_keys=True))

    table = select_params_prestudy(prestudy, full)
    (out / "selection_prestudy.json").write_text(
        json.dumps(table, indent=2, sort_keys=True))
    print("\nwin counts (rows: family, columns: noise kind):")
    kinds = table["noise_kinds"]
    print(f"{'':<10}" + "".join(f"{k:>10}" for k in kinds))
    for family in table["families"]:
        row = table["counts"][family]
        print(f"{family:<10}" + "".join(f"{row[k]:>10.1f}" for k in kinds))

    for path in report(full, out):
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
