"""Resampling decision functions behind one shared interface.

A decision function answers one question for a single point: is another
evaluation worth its cost right now? The budget-fraction strategies
(static, time, rank, strength) grant a point a share ``nu`` of a maximal
per-point budget and answer True while the point's evaluation count stays
strictly below ``nu * n_max``. The standard-error strategy instead keeps
evaluating until the mean estimate is precise enough. The "arb" kind
delegates to the bootstrap dominance-probability rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import bootstrap
from .pareto import EvaluatedPoint, EvaluationError, RankedPopulation

_STRENGTH_TOL = 1e-12


@dataclass(frozen=True)
class StaticStrategy:
    """Every point gets exactly ``n`` evaluations (n = 1 is plain NSGA-II)."""

    n: int = 1
    kind: str = field(default="static", init=False)


@dataclass(frozen=True)
class TimeStrategy:
    """Budget share grows linearly with the generation counter."""

    n_max: int = 10
    kind: str = field(default="time", init=False)


@dataclass(frozen=True)
class RankStrategy:
    """Budget share decreases linearly with Pareto rank."""

    n_max: int = 10
    kind: str = field(default="rank", init=False)


@dataclass(frozen=True)
class StrengthStrategy:
    """Budget share proportional to how many rivals a point weakly dominates."""

    n_max: int = 10
    kind: str = field(default="strength", init=False)


@dataclass(frozen=True)
class SeErrorStrategy:
    """Resample while the aggregated standard error exceeds a threshold.

    ``true_se`` divides the per-objective sample standard deviation by
    sqrt(N); switching it off uses the plain standard deviation instead.
    """

    threshold: float = 0.05
    aggregation: str = "max"
    true_se: bool = True
    kind: str = field(default="sederror", init=False)

    def __post_init__(self) -> None:
        if self.aggregation not in ("max", "mean"):
            raise EvaluationError("aggregation must be 'max' or 'mean'")


@dataclass(frozen=True)
class ArbStrategy:
    """Adaptive resampling via bootstrap dominance probability."""

    alpha_l: float = 0.2
    alpha_u: float = 0.9
    n_boot: int = 100
    capacity: int = 100
    init_popsize: int = 120
    seed_size: int = 100
    weak_indicator: bool = False
    kind: str = field(default="arb", init=False)

    def thresholds(self) -> bootstrap.ArbThresholds:
        return bootstrap.ArbThresholds(self.alpha_l, self.alpha_u)


ResamplingStrategy = Union[StaticStrategy, TimeStrategy, RankStrategy,
                           StrengthStrategy, SeErrorStrategy, ArbStrategy]


@dataclass
class DecisionContext:
    """Everything a decision function may read about the current state."""

    point_index: int
    population: RankedPopulation
    n_gen: int = 0
    max_gen: int = 1
    front: list[EvaluatedPoint] | None = None
    dispersion: bootstrap.DispersionSet | None = None
    rng: np.random.Generator | None = None

    @property
    def point(self) -> EvaluatedPoint:
        return self.population.members[self.point_index]


def all_strengths(pop: RankedPopulation) -> np.ndarray:
    """Per-point fraction of the population it weakly dominates, self excluded.

    Self-exclusion keeps the all-strengths-zero case reachable (a point
    always weakly dominates itself).
    """
    means = pop.means
    weak = np.all(means[:, None, :] <= means[None, :, :], axis=2)
    np.fill_diagonal(weak, False)
    return weak.sum(axis=1) / len(pop)


def domination_strength(i: int, pop: RankedPopulation) -> float:
    return float(all_strengths(pop)[i])


def budget_fraction_strength(i: int, pop: RankedPopulation) -> float:
    """Piecewise share: ratio to the maximal strength, with two edge cases.

    The middle case (max strength exactly 1/|P|) evaluates to the same
    ratio as the first and is kept verbatim; equality is tested with an
    absolute tolerance of 1e-12. When every strength is zero, all points
    get the full share.
    """
    strengths = all_strengths(pop)
    s_max = float(strengths.max())
    if s_max <= _STRENGTH_TOL:
        return 1.0
    if abs(s_max - 1.0 / len(pop)) <= _STRENGTH_TOL:
        return max(0.0, float(strengths[i]) / s_max)
    return float(strengths[i]) / s_max


def budget_fraction_rank(i: int, pop: RankedPopulation) -> float:
    """1 at rank 1 falling linearly to 0 at the worst rank; 1 if all share rank 1."""
    max_rank = int(pop.rank.max())
    if max_rank == 1:
        return 1.0
    return 1.0 - (int(pop.rank[i]) - 1) / (max_rank - 1)


def budget_fraction_time(ctx: DecisionContext) -> float:
    """Share of the per-point budget unlocked so far, n_gen / max_gen, capped at 1."""
    if ctx.max_gen < 1:
        raise EvaluationError("max_gen must be at least 1")
    return min(1.0, ctx.n_gen / ctx.max_gen)


def standard_error(point: EvaluatedPoint, aggregation: str = "max", *,
                   true_se: bool = True) -> float:
    """Aggregated per-objective standard error of the mean estimate.

    Per objective: the unbiased sample standard deviation, divided by
    sqrt(N) when ``true_se`` is set. Aggregation is max or mean across
    objectives. Undefined for N = 1.
    """
    n = point.count
    if n < 2:
        raise EvaluationError("standard error needs at least two samples")
    sd = np.std(np.asarray(point.samples), axis=0, ddof=1)
    if true_se:
        sd = sd / np.sqrt(n)
    return float(sd.max()) if aggregation == "max" else float(sd.mean())


def sederror_decide(point: EvaluatedPoint, threshold: float, aggregation: str = "max",
                    *, true_se: bool = True) -> bool:
    """True while the standard error stays above the threshold.

    A point seen once has no standard error yet and always gets a second
    look.
    """
    if point.count < 2:
        return True
    return standard_error(point, aggregation, true_se=true_se) > threshold


def _fraction_for(strategy: ResamplingStrategy, ctx: DecisionContext) -> float:
    if isinstance(strategy, TimeStrategy):
        return budget_fraction_time(ctx)
    if isinstance(strategy, RankStrategy):
        return budget_fraction_rank(ctx.point_index, ctx.population)
    if isinstance(strategy, StrengthStrategy):
        return budget_fraction_strength(ctx.point_index, ctx.population)
    raise EvaluationError(f"no budget fraction for kind {strategy.kind!r}")


def should_resample(strategy: ResamplingStrategy, ctx: DecisionContext) -> bool:
    """Dispatch one resampling decision for the point named by the context.

    Budget-fraction kinds answer True while count < nu * n_max (strict);
    the standard-error kind compares against its threshold; the arb kind
    needs the context to carry the current front, the dispersion pool, and
    a random stream.
    """
    point = ctx.point
    if isinstance(strategy, StaticStrategy):
        return point.count < strategy.n
    if isinstance(strategy, (TimeStrategy, RankStrategy, StrengthStrategy)):
        return point.count < _fraction_for(strategy, ctx) * strategy.n_max
    if isinstance(strategy, SeErrorStrategy):
        return sederror_decide(point, strategy.threshold, strategy.aggregation,
                               true_se=strategy.true_se)
    if isinstance(strategy, ArbStrategy):
        if ctx.front is None or ctx.dispersion is None or ctx.rng is None:
            raise EvaluationError("arb decisions need front, dispersion and rng in the context")
        return bootstrap.arb_decide(point, ctx.front, ctx.dispersion,
                                    strategy.thresholds(), strategy.n_boot, ctx.rng,
                                    weak=strategy.weak_indicator)
    raise EvaluationError(f"unknown strategy kind {strategy!r}")


def strategy_from_dict(spec: dict) -> ResamplingStrategy:
    """Build a strategy from a config mapping with a 'kind' key."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    makers = {
        "static": StaticStrategy,
        "time": TimeStrategy,
        "rank": RankStrategy,
        "strength": StrengthStrategy,
        "sederror": SeErrorStrategy,
        "arb": ArbStrategy,
    }
    if kind not in makers:
        raise EvaluationError(f"unknown resampling kind {kind!r}")
    return makers[kind](**spec)
