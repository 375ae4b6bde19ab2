"""Reproducible experiment driver.

A JSON config describes a grid of (problem x noise x strategy) settings.
The grid expands to slices; each slice x replication becomes one run with
a seed derived stably from the base seed, the slice fingerprint, and the
replication index, so adding grid values never reseeds existing runs and
execution order has no effect on any record. Records are written one JSON
file per run, keyed by fingerprint and replication, which also makes
re-running a completed sweep a no-op.

Determinism contract: the canonical serialized record excludes wall time
(the only non-reproducible field), so identical seeds give byte-identical
record files and reports across executions on one platform.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .metrics import MetricParams, score_final_set
from .optimizers import RteaConfig, RunResult, nsga2_run, rtea_run
from .pareto import EvaluationError
from .problems import NoiseLaw, make_problem
from .resampling import strategy_from_dict
from .variation import VariationConfig

SCHEMA_VERSION = 1
FAMILIES = ("arb", "dynamic", "static", "rtea")
NOISE_KIND_ORDER = ("chisq", "gaussian", "none")

_FAMILY_BY_KIND = {
    "static": "static",
    "time": "dynamic",
    "rank": "dynamic",
    "strength": "dynamic",
    "sederror": "dynamic",
    "arb": "arb",
    "rtea": "rtea",
}


def family_of(kind: str) -> str:
    try:
        return _FAMILY_BY_KIND[kind]
    except KeyError:
        raise EvaluationError(f"unknown strategy kind {kind!r}") from None


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class RunSlice:
    """One point of the experiment grid: problem x noise x strategy."""

    problem: str
    dim: int
    noise: dict
    strategy: dict  # includes "kind"; rtea configs carry k, p, z
    mode: str       # "sequential" | "one_shot" | "rtea"
    popsize: int
    budget: int

    def as_dict(self) -> dict:
        return {
            "problem": self.problem,
            "dim": self.dim,
            "noise": self.noise,
            "strategy": self.strategy,
            "mode": self.mode,
            "popsize": self.popsize,
            "budget": self.budget,
        }

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(_canonical(self.as_dict()).encode()).hexdigest()[:16]

    def selection_key(self) -> str:
        """Slice identity with the budget removed; ties a prestudy slice to
        its full-budget counterpart."""
        d = self.as_dict()
        del d["budget"]
        return _canonical(d)

    def setting_key(self) -> tuple:
        """Problem plus noise: the unit over which strategies are compared."""
        return (self.problem, self.noise.get("kind", "none"),
                self.noise.get("df", 0), self.noise.get("sigma", 0.0))

    @property
    def family(self) -> str:
        return family_of(self.strategy["kind"])

    @property
    def strategy_label(self) -> str:
        params = {k: v for k, v in sorted(self.strategy.items()) if k != "kind"}
        inner = ",".join(f"{k}={v}" for k, v in params.items())
        return f"{self.strategy['kind']}({inner})"


def derive_seed(base_seed: int, fingerprint: str, replication: int) -> int:
    """Stable per-run seed: first 8 bytes of sha256(base:fingerprint:rep)."""
    digest = hashlib.sha256(f"{base_seed}:{fingerprint}:{replication}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class ExperimentConfig:
    problems: list[str]
    noise: list[dict]
    strategies: list[dict]
    budget: int = 10_000
    popsize: int = 40
    replications: int = 10
    base_seed: int = 2024
    dim: int = 10
    selection: dict = field(default_factory=lambda: {
        "n_select": 6, "n_compare": 4, "n_repeats": 100, "prestudy_budget": 2000})
    metrics: dict = field(default_factory=dict)
    variation: dict = field(default_factory=dict)
    output_dir: str = "results"

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise EvaluationError("replications must be at least 1")
        if not self.problems or not self.noise or not self.strategies:
            raise EvaluationError("problems, noise, and strategies must be nonempty")
        if self.budget < self.selection.get("prestudy_budget", 0):
            raise EvaluationError("budget must not be smaller than the prestudy budget")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        version = raw.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise EvaluationError(f"unsupported config schema version {version}")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise EvaluationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def metric_params(self) -> MetricParams:
        return MetricParams(**self.metrics)

    def variation_config(self) -> VariationConfig:
        return VariationConfig(**self.variation)

    def slices(self, budget: int | None = None) -> list[RunSlice]:
        """Expand the grids into the full deterministic slice list."""
        budget = self.budget if budget is None else budget
        out: list[RunSlice] = []
        for problem in self.problems:
            for noise in self.noise:
                for entry in self.strategies:
                    kind = entry["kind"]
                    grid = entry.get("grid", {})
                    mode = entry.get("mode", _default_mode(kind))
                    keys = sorted(grid)
                    for combo in itertools.product(*(grid[k] for k in keys)):
                        strategy = {"kind": kind, **dict(zip(keys, combo))}
                        out.append(RunSlice(problem=problem, dim=self.dim,
                                            noise=_normalize_noise(noise),
                                            strategy=strategy, mode=mode,
                                            popsize=self.popsize, budget=budget))
        return out


def _default_mode(kind: str) -> str:
    if kind == "rtea":
        return "rtea"
    return "one_shot" if kind == "static" else "sequential"


def _normalize_noise(noise: dict) -> dict:
    kind = noise.get("kind", "none")
    out = {"kind": kind}
    if kind != "none":
        out["sigma"] = float(noise.get("sigma", 0.0))
    if kind == "chisq":
        out["df"] = int(noise.get("df", 1))
    return out


def _noise_law(noise: dict) -> NoiseLaw:
    return NoiseLaw(kind=noise["kind"], sigma=noise.get("sigma", 0.0),
                    df=noise.get("df", 1))


@dataclass
class RunRecord:
    """Provenance of one optimizer run plus its metric report."""

    fingerprint: str
    slice: dict
    replication: int
    seed: int
    spent: int
    eval_log: list
    final_population: list
    returned_set: list
    metrics: dict
    wall_time: float = 0.0

    def canonical_dict(self) -> dict:
        # Everything except wall time, which is the one non-reproducible field.
        return {
            "fingerprint": self.fingerprint,
            "slice": self.slice,
            "replication": self.replication,
            "seed": self.seed,
            "spent": self.spent,
            "eval_log": self.eval_log,
            "final_population": self.final_population,
            "returned_set": self.returned_set,
            "metrics": self.metrics,
        }

    def canonical_json(self) -> str:
        return _canonical(self.canonical_dict())

    @classmethod
    def from_dict(cls, raw: dict) -> "RunRecord":
        return cls(**raw)

    @property
    def hv(self) -> float:
        return self.metrics["hv_normalized"]


def _point_payload(point) -> dict:
    return {
        "uid": point.uid,
        "decision": [float(v) for v in point.decision],
        "mean": [float(v) for v in point.mean],
        "count": point.count,
    }


def run_single(slice_: RunSlice, replication: int, seed: int,
               metric_params: MetricParams = MetricParams(),
               variation: VariationConfig = VariationConfig()) -> RunRecord:
    """Execute one slice deterministically and score its returned set."""
    rng = np.random.default_rng(seed)
    problem = make_problem(slice_.problem, dim=slice_.dim,
                           noise=_noise_law(slice_.noise))
    started = time.perf_counter()
    if slice_.strategy["kind"] == "rtea":
        params = {k: v for k, v in slice_.strategy.items() if k != "kind"}
        cfg = RteaConfig(m=slice_.budget, **params)
        result: RunResult = rtea_run(problem, cfg, variation, rng)
    else:
        strategy = strategy_from_dict(slice_.strategy)
        result = nsga2_run(problem, strategy, slice_.mode, slice_.popsize,
                           slice_.budget, variation, rng)
    wall = time.perf_counter() - started
    report = score_final_set(result.front, problem, metric_params)
    log = [[entry.uid, entry.generation, [float(v) for v in entry.sample]]
           for entry in result.log]
    return RunRecord(
        fingerprint=slice_.fingerprint,
        slice=slice_.as_dict(),
        replication=replication,
        seed=seed,
        spent=result.spent,
        eval_log=log,
        final_population=[_point_payload(p) for p in result.population],
        returned_set=[_point_payload(p) for p in result.front],
        metrics=report.as_dict(),
        wall_time=wall,
    )


def record_path(out_dir: str | Path, slice_: RunSlice, replication: int) -> Path:
    return Path(out_dir) / "records" / f"{slice_.fingerprint}_r{replication:03d}.json"


def _run_job(args) -> str:
    slice_, rep, seed, metric_params, variation, path_str = args
    record = run_single(slice_, rep, seed, metric_params, variation)
    path = Path(path_str)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(record.canonical_json() + "\n", encoding="utf-8")
    return path_str


def sweep(config: ExperimentConfig, out_dir: str | Path, *, jobs: int = 1,
          budget: int | None = None, base_seed: int | None = None,
          include_log: bool = True) -> list[RunRecord]:
    """Run the full grid x replications, skipping runs whose record exists.

    Runs are independent and may execute in parallel; records land in
    ``out_dir/records`` and are re-read sorted, so the returned list and
    all downstream reports are independent of execution order.
    ``include_log=False`` drops the (large) evaluation logs from the
    returned records; the files on disk always keep them.
    """
    base_seed = config.base_seed if base_seed is None else base_seed
    slices = config.slices(budget=budget)
    metric_params = config.metric_params()
    variation = config.variation_config()
    jobs_args = []
    for slice_ in slices:
        for rep in range(config.replications):
            path = record_path(out_dir, slice_, rep)
            if path.exists():
                continue
            seed = derive_seed(base_seed, slice_.fingerprint, rep)
            jobs_args.append((slice_, rep, seed, metric_params, variation, str(path)))
    if jobs_args:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                list(pool.map(_run_job, jobs_args))
        else:
            for args in jobs_args:
                _run_job(args)
    records = []
    for slice_ in slices:
        for rep in range(config.replications):
            records.append(load_record(record_path(out_dir, slice_, rep),
                                       include_log=include_log))
    return records


def load_record(path: str | Path, include_log: bool = True) -> RunRecord:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not include_log:
        raw["eval_log"] = []
    return RunRecord.from_dict(raw)


# ---------------------------------------------------------------------------
# Comparison protocols


def _group_runs(records: list[RunRecord]):
    """-> {setting: {family: {fingerprint: {rep: hv}}}} plus slice lookup."""
    table: dict = {}
    slices: dict = {}
    for rec in records:
        slice_ = RunSlice(**{k: rec.slice[k] for k in
                             ("problem", "dim", "noise", "strategy", "mode",
                              "popsize", "budget")})
        slices[rec.fingerprint] = slice_
        table.setdefault(slice_.setting_key(), {}) \
             .setdefault(slice_.family, {}) \
             .setdefault(rec.fingerprint, {})[rec.replication] = rec.hv
    return table, slices


def _best_config(configs: dict[str, dict[int, float]], reps: list[int]) -> str:
    """Fingerprint with the highest mean HV over the given replications;
    ties go to the lexicographically smallest fingerprint."""
    def mean_hv(fp: str) -> float:
        return float(np.mean([configs[fp][r] for r in reps]))
    return min(configs, key=lambda fp: (-mean_hv(fp), fp))


def select_params_split(records: list[RunRecord], n_select: int, n_compare: int,
                        n_repeats: int, rng: np.random.Generator) -> dict:
    """Repeated random split into selection and comparison replications.

    Per split and family, the best parameterization on the selection half
    is scored on the held-out half; the family with the best held-out mean
    wins the split (ties share the win equally). Returns, per setting, each
    family's win fraction; fractions sum to 1 per setting.
    """
    table, _ = _group_runs(records)
    fractions: dict = {}
    for setting in sorted(table):
        families = table[setting]
        reps = sorted({r for cfgs in families.values()
                       for by_rep in cfgs.values() for r in by_rep})
        if n_select + n_compare > len(reps):
            raise EvaluationError(
                f"split needs {n_select + n_compare} replications, have {len(reps)}")
        wins = {fam: 0.0 for fam in families}
        for _ in range(n_repeats):
            perm = [reps[i] for i in rng.permutation(len(reps))]
            sel, cmp_ = perm[:n_select], perm[n_select:n_select + n_compare]
            scores = {}
            for fam, configs in families.items():
                best = _best_config(configs, sel)
                scores[fam] = float(np.mean([configs[best][r] for r in cmp_]))
            top = max(scores.values())
            tied = [fam for fam, s in scores.items() if s == top]
            for fam in tied:
                wins[fam] += 1.0 / len(tied)
        fractions[setting] = {fam: wins[fam] / n_repeats for fam in sorted(wins)}
    return fractions


def select_params_prestudy(prestudy_records: list[RunRecord],
                           full_records: list[RunRecord]) -> dict:
    """Carry each family's best prestudy parameterization to the full runs
    and count, per setting and replication, which family performs best.

    Returns a table shaped rows = families, columns = noise kinds, plus
    accounting totals. Ties split the count equally.
    """
    pre_table, pre_slices = _group_runs(prestudy_records)
    full_table, full_slices = _group_runs(full_records)
    if set(pre_table) != set(full_table):
        missing = sorted(set(full_table) ^ set(pre_table))
        raise EvaluationError(f"prestudy and full sweeps disagree on settings: {missing}")
    by_selection_key = {s.selection_key(): fp for fp, s in full_slices.items()}

    counts = {fam: {kind: 0.0 for kind in NOISE_KIND_ORDER} for fam in FAMILIES}
    cells_counted = 0
    for setting in sorted(full_table):
        noise_kind = setting[1]
        chosen: dict[str, str] = {}
        for fam, configs in pre_table[setting].items():
            reps = sorted(next(iter(configs.values())))
            best_pre = _best_config(configs, reps)
            full_fp = by_selection_key.get(pre_slices[best_pre].selection_key())
            if full_fp is None:
                raise EvaluationError(
                    f"no full-budget slice matches prestudy winner {best_pre}")
            chosen[fam] = full_fp
        family_runs = {fam: full_table[setting][fam][fp] for fam, fp in chosen.items()}
        reps = sorted(next(iter(family_runs.values())))
        for rep in reps:
            scores = {fam: runs[rep] for fam, runs in family_runs.items()}
            top = max(scores.values())
            tied = [fam for fam, s in scores.items() if s == top]
            for fam in tied:
                counts[fam][noise_kind] += 1.0 / len(tied)
            cells_counted += 1
    return {
        "families": list(FAMILIES),
        "noise_kinds": list(NOISE_KIND_ORDER),
        "counts": counts,
        "cells_counted": cells_counted,
    }


# ---------------------------------------------------------------------------
# Reporting

PER_RUN_HEADER = ["fingerprint", "problem", "noise_kind", "df", "sigma", "optimizer",
                  "mode", "family", "strategy", "replication", "seed", "budget",
                  "popsize", "spent", "n_returned", "n_filtered", "hv_raw",
                  "hv_normalized", "igd"]
AGGREGATE_HEADER = ["problem", "noise_kind", "df", "sigma", "family", "strategy",
                    "n_reps", "hv_normalized_mean", "hv_normalized_sd", "igd_mean",
                    "igd_sd"]
HV_VS_SIGMA_HEADER = ["problem", "noise_kind", "df", "sigma", "family", "strategy",
                      "hv_normalized_mean"]


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def report(records: list[RunRecord], out_dir: str | Path, fmt: str = "csv") -> list[Path]:
    """Emit the per-run table, the per-setting aggregates, and HV-vs-sigma
    plot data. Deterministic: same records, byte-identical files."""
    if fmt != "csv":
        raise EvaluationError(f"unsupported report format {fmt!r}")
    if not records:
        raise EvaluationError("nothing to report")
    out = Path(out_dir) / "report"
    out.mkdir(parents=True, exist_ok=True)

    def slice_of(rec: RunRecord) -> RunSlice:
        return RunSlice(**{k: rec.slice[k] for k in
                           ("problem", "dim", "noise", "strategy", "mode",
                            "popsize", "budget")})

    decorated = sorted(((slice_of(r), r) for r in records),
                       key=lambda pair: (pair[0].setting_key(), pair[0].family,
                                         pair[0].strategy_label, pair[1].replication))
    per_run_rows = []
    for s, r in decorated:
        optimizer = "rtea" if s.strategy["kind"] == "rtea" else "nsga2"
        per_run_rows.append([
            r.fingerprint, s.problem, s.noise["kind"], s.noise.get("df", 0),
            float(s.noise.get("sigma", 0.0)), optimizer, s.mode, s.family,
            s.strategy_label, r.replication, r.seed, s.budget, s.popsize, r.spent,
            r.metrics["n_returned"], r.metrics["n_filtered"],
            float(r.metrics["hv_raw"]), float(r.metrics["hv_normalized"]),
            float(r.metrics["igd"]),
        ])

    groups: dict = {}
    group_slice: dict = {}
    for s, r in decorated:
        key = (s.setting_key(), s.family, s.strategy_label)
        groups.setdefault(key, []).append(r)
        group_slice[key] = s
    agg_rows = []
    sigma_rows = []
    for (setting, fam, label), recs in sorted(groups.items()):
        s = group_slice[(setting, fam, label)]
        hvs = [rec.metrics["hv_normalized"] for rec in recs]
        igds = [rec.metrics["igd"] for rec in recs]
        sd = float(np.std(hvs, ddof=1)) if len(hvs) > 1 else 0.0
        igd_sd = float(np.std(igds, ddof=1)) if len(igds) > 1 else 0.0
        base = [s.problem, s.noise["kind"], s.noise.get("df", 0),
                float(s.noise.get("sigma", 0.0)), fam, label]
        agg_rows.append(base + [len(recs), float(np.mean(hvs)), sd,
                                float(np.mean(igds)), igd_sd])
        sigma_rows.append(base + [float(np.mean(hvs))])

    paths = [out / "per_run.csv", out / "aggregate.csv", out / "hv_vs_sigma.csv"]
    _write_csv(paths[0], PER_RUN_HEADER, per_run_rows)
    _write_csv(paths[1], AGGREGATE_HEADER, agg_rows)
    _write_csv(paths[2], HV_VS_SIGMA_HEADER, sigma_rows)
    return paths
