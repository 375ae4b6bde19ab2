"""NSGA-II with pluggable resampling (one-shot or sequential) and the
Rolling Tide baseline, all under a strict shared evaluation budget.

Every objective-function call goes through one :class:`Evaluator`, which
owns the budget ledger and the evaluation log; an optimizer can therefore
never overspend, and two runs with the same seed replay the same log. When
the budget runs out mid-generation the remaining evaluations are simply
skipped and the generation finishes with whatever samples exist.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bootstrap import DispersionSet, push_newest_residual
from .pareto import (EvaluatedPoint, EvaluationError, RankedPopulation,
                     dominates, nondominated_sort)
from .problems import NoisyProblem, evaluate_noisy
from .resampling import (ArbStrategy, DecisionContext, ResamplingStrategy,
                         StaticStrategy, should_resample)
from .variation import VariationConfig, make_children

MODES = ("one_shot", "sequential")


@dataclass
class BudgetLedger:
    """Counts evaluations against a hard cap; spent never exceeds cap."""

    cap: int
    spent: int = 0

    @property
    def remaining(self) -> int:
        return self.cap - self.spent

    def charge(self) -> None:
        if self.remaining <= 0:
            raise EvaluationError("evaluation budget exhausted")
        self.spent += 1


@dataclass
class LogEntry:
    """One raw evaluation: which point, in which generation, what came back."""

    uid: int
    generation: int
    sample: np.ndarray


class Evaluator:
    """The single gate to the noisy objective function.

    Spawning registers a new point and evaluates it once; re-evaluating
    appends one more sample. Both return nothing useful once the ledger is
    exhausted, so callers can keep asking and stop when refused.
    """

    def __init__(self, problem: NoisyProblem, rng: np.random.Generator, budget: int):
        self.problem = problem
        self.rng = rng
        self.ledger = BudgetLedger(cap=budget)
        self.log: list[LogEntry] = []
        self._next_uid = 0

    @property
    def remaining(self) -> int:
        return self.ledger.remaining

    @property
    def spent(self) -> int:
        return self.ledger.spent

    def spawn(self, x: np.ndarray, generation: int) -> EvaluatedPoint | None:
        if self.remaining <= 0:
            return None
        point = EvaluatedPoint(decision=x, uid=self._next_uid)
        self._next_uid += 1
        self._observe(point, generation)
        return point

    def reevaluate(self, point: EvaluatedPoint, generation: int) -> bool:
        if self.remaining <= 0:
            return False
        self._observe(point, generation)
        return True

    def _observe(self, point: EvaluatedPoint, generation: int) -> None:
        self.ledger.charge()
        y = evaluate_noisy(self.problem, point.decision, self.rng)
        point.add_sample(y)
        self.log.append(LogEntry(uid=point.uid, generation=generation, sample=y))


@dataclass
class RunResult:
    """What an optimizer hands back: final population, its first front
    under sample means, the full evaluation log, and the spend."""

    population: list[EvaluatedPoint]
    front: list[EvaluatedPoint]
    log: list[LogEntry]
    spent: int


def tournament_winner(pop: RankedPopulation, i: int, j: int,
                      rng: np.random.Generator) -> int:
    """Lower rank wins, then larger crowding, then a coin."""
    if pop.rank[i] != pop.rank[j]:
        return int(i if pop.rank[i] < pop.rank[j] else j)
    if pop.crowding[i] != pop.crowding[j]:
        return int(i if pop.crowding[i] > pop.crowding[j] else j)
    return int(i if rng.random() < 0.5 else j)


def tournament_select(pop: RankedPopulation, rng: np.random.Generator) -> int:
    """Binary tournament between two members drawn with replacement."""
    if len(pop) < 2:
        raise EvaluationError("tournament needs at least two members")
    i, j = rng.integers(0, len(pop), size=2)
    return tournament_winner(pop, int(i), int(j), rng)


def environmental_select(points: list[EvaluatedPoint], popsize: int) -> list[EvaluatedPoint]:
    """Keep ``popsize`` survivors: whole fronts by ascending rank, the
    boundary front split by descending crowding (ties by input index)."""
    if len(points) < popsize:
        raise EvaluationError(f"cannot select {popsize} from {len(points)} points")
    ranked = nondominated_sort(points)
    survivors: list[int] = []
    for r in range(1, int(ranked.rank.max()) + 1):
        idx = [i for i in range(len(points)) if ranked.rank[i] == r]
        if len(survivors) + len(idx) <= popsize:
            survivors.extend(idx)
            if len(survivors) == popsize:
                break
        else:
            idx.sort(key=lambda i: (-ranked.crowding[i], i))
            survivors.extend(idx[: popsize - len(survivors)])
            break
    return [points[i] for i in survivors]


def _decision_context(index: int, ranked: RankedPopulation, gen: int, max_gen: int,
                      front: list[EvaluatedPoint] | None, dispersion: DispersionSet | None,
                      rng: np.random.Generator) -> DecisionContext:
    return DecisionContext(point_index=index, population=ranked,
                           n_gen=min(gen, max_gen), max_gen=max_gen,
                           front=front, dispersion=dispersion, rng=rng)


def _resample_at_creation(point: EvaluatedPoint, parents: list[EvaluatedPoint],
                          strategy: ResamplingStrategy, ev: Evaluator, gen: int,
                          max_gen: int, dispersion: DispersionSet | None,
                          rng: np.random.Generator) -> None:
    # One-shot mode: keep asking the decision function about this fresh point,
    # ranked against the current parents, until it says stop or the budget does.
    if isinstance(strategy, StaticStrategy):
        # Static ignores the population context; skip the ranking work.
        while point.count < strategy.n and ev.reevaluate(point, gen):
            if dispersion is not None:
                push_newest_residual(dispersion, point)
        return
    while ev.remaining > 0:
        ranked = nondominated_sort(parents + [point])
        ctx = _decision_context(len(parents), ranked, gen, max_gen,
                                ranked.first_front(), dispersion, rng)
        if not should_resample(strategy, ctx):
            break
        if not ev.reevaluate(point, gen):
            break
        if dispersion is not None:
            push_newest_residual(dispersion, point)


def _initialize_arb(ev: Evaluator, strategy: ArbStrategy, popsize: int,
                    rng: np.random.Generator) -> tuple[list[EvaluatedPoint], DispersionSet]:
    # Oversized first generation: everyone evaluated once, the best
    # `seed_size` (NSGA-II criterion) a second time so their residuals seed
    # the dispersion pool, then truncate to the working population size.
    points: list[EvaluatedPoint] = []
    for _ in range(strategy.init_popsize):
        pt = ev.spawn(ev.problem.random_decision(rng), 0)
        if pt is None:
            break
        points.append(pt)
    ranked = nondominated_sort(points)
    order = sorted(range(len(points)), key=lambda i: (ranked.rank[i], -ranked.crowding[i], i))
    dispersion = DispersionSet(capacity=strategy.capacity)
    for i in order[: strategy.seed_size]:
        if not ev.reevaluate(points[i], 0):
            break
        push_newest_residual(dispersion, points[i])
    return environmental_select(points, popsize), dispersion


def nsga2_run(problem: NoisyProblem, strategy: ResamplingStrategy, mode: str,
              popsize: int, budget: int, variation: VariationConfig,
              rng: np.random.Generator) -> RunResult:
    """NSGA-II under a resampling strategy, spending the budget exactly.

    Sequential mode evaluates each offspring once and then sweeps the whole
    combined population every generation, granting one extra evaluation per
    point and sweep while the decision function approves. One-shot mode
    instead settles each point's budget at creation time and never returns
    to it. The planning horizon for time-based decisions is
    budget // popsize generations.
    """
    if mode not in MODES:
        raise EvaluationError(f"unknown mode {mode!r}")
    if popsize < 2 or popsize % 2:
        raise EvaluationError("popsize must be even and at least 2")
    arb = isinstance(strategy, ArbStrategy)
    init_cost = strategy.init_popsize + strategy.seed_size if arb else popsize
    if budget < init_cost:
        raise EvaluationError(f"budget {budget} below initialization cost {init_cost}")
    if arb and strategy.init_popsize < max(popsize, strategy.seed_size):
        raise EvaluationError("arb init_popsize must cover popsize and seed_size")

    ev = Evaluator(problem, rng, budget)
    dispersion: DispersionSet | None = None
    if arb:
        pop, dispersion = _initialize_arb(ev, strategy, popsize, rng)
    else:
        pop = []
        for _ in range(popsize):
            pt = ev.spawn(problem.random_decision(rng), 0)
            if pt is not None:
                pop.append(pt)
        if mode == "one_shot":
            for pt in pop:
                others = [p for p in pop if p is not pt]
                _resample_at_creation(pt, others, strategy, ev, 0,
                                      max(1, budget // popsize), dispersion, rng)

    max_gen = max(1, budget // popsize)
    gen = 0
    while ev.remaining > 0:
        gen += 1
        ranked_parents = nondominated_sort(pop)
        offspring: list[EvaluatedPoint] = []
        while len(offspring) < popsize and ev.remaining > 0:
            a = tournament_select(ranked_parents, rng)
            b = tournament_select(ranked_parents, rng)
            children = make_children(pop[a].decision, pop[b].decision,
                                     problem.lower, problem.upper, variation, rng)
            for x in children[: popsize - len(offspring)]:
                child = ev.spawn(x, gen)
                if child is None:
                    break
                offspring.append(child)
                if mode == "one_shot":
                    _resample_at_creation(child, pop, strategy, ev, gen, max_gen,
                                          dispersion, rng)
        combined = pop + offspring
        if mode == "sequential":
            ranked = nondominated_sort(combined)
            front = ranked.first_front()
            for i, point in enumerate(combined):
                if ev.remaining <= 0:
                    break
                ctx = _decision_context(i, ranked, gen, max_gen, front, dispersion, rng)
                if should_resample(strategy, ctx) and ev.reevaluate(point, gen) and arb:
                    push_newest_residual(dispersion, point)
        pop = environmental_select(combined, popsize)

    final = nondominated_sort(pop)
    return RunResult(population=pop, front=final.first_front(), log=ev.log, spent=ev.spent)


@dataclass(frozen=True)
class RteaConfig:
    """Rolling Tide parameters: total budget m, resamples per iteration k,
    initial sample size p, refinement fraction z."""

    m: int
    k: int = 1
    p: int = 40
    z: float = 0.1

    def __post_init__(self) -> None:
        if self.p > self.m:
            raise EvaluationError("initial sample size exceeds the budget")
        if not 0.0 <= self.z < 1.0:
            raise EvaluationError("refinement fraction must lie in [0, 1)")
        if self.k < 1:
            raise EvaluationError("k must be at least 1")

    @property
    def refinement_evals(self) -> int:
        return int(round(self.z * self.m))


def _front_insert(front: list[EvaluatedPoint], archive: list[EvaluatedPoint],
                  point: EvaluatedPoint) -> None:
    # Keep `front` mutually non-dominated under current means; losers go to
    # the archive and stay there.
    if any(dominates(f.mean, point.mean) for f in front):
        archive.append(point)
        return
    expelled = [f for f in front if dominates(point.mean, f.mean)]
    front[:] = [f for f in front if not dominates(point.mean, f.mean)]
    front.append(point)
    archive.extend(expelled)


def _front_refresh(front: list[EvaluatedPoint], archive: list[EvaluatedPoint],
                   member: EvaluatedPoint) -> None:
    # A re-evaluated member's mean moved; it either drops out or expels
    # newly dominated members (never both: domination is transitive).
    others = [f for f in front if f is not member]
    if any(dominates(f.mean, member.mean) for f in others):
        front[:] = others
        archive.append(member)
        return
    expelled = [f for f in others if dominates(member.mean, f.mean)]
    if expelled:
        front[:] = [f for f in front if f is member or not dominates(member.mean, f.mean)]
        archive.extend(expelled)


def _fewest_evaluated(front: list[EvaluatedPoint], rng: np.random.Generator) -> EvaluatedPoint:
    counts = np.array([f.count for f in front])
    candidates = np.flatnonzero(counts == counts.min())
    return front[int(candidates[rng.integers(0, candidates.size)])]


def rtea_run(problem: NoisyProblem, cfg: RteaConfig, variation: VariationConfig,
             rng: np.random.Generator) -> RunResult:
    """Rolling Tide EA: strong elitism with continual front re-evaluation.

    Initialization samples ``p`` points once. The optimization phase then
    alternates one offspring (bred from two uniformly chosen front members)
    with ``k`` re-evaluations of the least-sampled front members until only
    the refinement share of the budget is left; refinement spends the rest
    re-evaluating the front. Returns the front under sample means.
    """
    ev = Evaluator(problem, rng, cfg.m)
    points: list[EvaluatedPoint] = []
    for _ in range(cfg.p):
        pt = ev.spawn(problem.random_decision(rng), 0)
        if pt is None:
            break
        points.append(pt)
    ranked = nondominated_sort(points)
    front = ranked.first_front()
    archive = [p for p, r in zip(points, ranked.rank) if r != 1]

    iteration = 0
    refine = cfg.refinement_evals
    while ev.remaining > refine:
        iteration += 1
        a, b = rng.integers(0, len(front), size=2)
        child_x, _ = make_children(front[a].decision, front[b].decision,
                                   problem.lower, problem.upper, variation, rng)
        child = ev.spawn(child_x, iteration)
        if child is None:
            break
        _front_insert(front, archive, child)
        for _ in range(cfg.k):
            if ev.remaining <= refine:
                break
            target = _fewest_evaluated(front, rng)
            if not ev.reevaluate(target, iteration):
                break
            _front_refresh(front, archive, target)

    while ev.remaining > 0:
        iteration += 1
        target = _fewest_evaluated(front, rng)
        if not ev.reevaluate(target, iteration):
            break
        _front_refresh(front, archive, target)

    return RunResult(population=front + archive, front=list(front), log=ev.log, spent=ev.spent)
