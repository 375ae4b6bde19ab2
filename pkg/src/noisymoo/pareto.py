"""Objective-space vocabulary: dominance relations, non-dominated sorting,
crowding distance, Pareto ranks.

All comparisons are under minimization. Optimizers compare points by their
sample means, never by individual noisy samples; every function here is a
pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class EvaluationError(ValueError):
    """Raised when an operation is called on inconsistent or empty inputs."""


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise EvaluationError(f"objective vectors differ in length: {a.shape} vs {b.shape}")


def weakly_dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff a is at least as good as b in every objective (a_t <= b_t)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_pair(a, b)
    return bool(np.all(a <= b))


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff a <= b everywhere and a < b in at least one objective."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_pair(a, b)
    return bool(np.all(a <= b) and np.any(a < b))


def indifferent(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff neither vector dominates the other.

    For every pair exactly one of ``dominates(a, b)``, ``dominates(b, a)``
    and ``indifferent(a, b)`` holds.
    """
    return not dominates(a, b) and not dominates(b, a)


def dominance_matrix(objectives: np.ndarray) -> np.ndarray:
    """Pairwise strict dominance: out[i, j] is True iff row i dominates row j."""
    objs = np.asarray(objectives, dtype=float)
    a = objs[:, None, :]
    b = objs[None, :, :]
    return np.all(a <= b, axis=2) & np.any(a < b, axis=2)


def front_ranks(objectives: np.ndarray) -> np.ndarray:
    """Assign 1-based Pareto ranks by iterative non-dominated peeling.

    Rank 1 is the mutually non-dominated subset; rank k members are
    non-dominated once ranks < k are removed. O(n^2 * T).
    """
    objs = np.asarray(objectives, dtype=float)
    n = objs.shape[0]
    if n == 0:
        raise EvaluationError("cannot rank an empty set")
    dom = dominance_matrix(objs)
    n_dominators = dom.sum(axis=0)
    ranks = np.zeros(n, dtype=np.int64)
    remaining = np.arange(n)
    rank = 1
    while remaining.size:
        in_front = n_dominators[remaining] == 0
        front = remaining[in_front]
        ranks[front] = rank
        remaining = remaining[~in_front]
        for i in front:
            n_dominators[remaining] -= dom[i, remaining]
        rank += 1
    return ranks


def crowding_distance(front: np.ndarray) -> np.ndarray:
    """NSGA-II cuboid crowding distance for the members of one front.

    Boundary points of each objective get infinite distance; interior points
    accumulate the normalized gap between their two neighbours, summed over
    objectives. An objective with zero range contributes nothing. Ties in
    the per-objective ordering are broken by input index (stable sort), so
    interior values are invariant under permutation of the input.
    """
    objs = np.atleast_2d(np.asarray(front, dtype=float))
    n, n_obj = objs.shape
    if n == 0:
        raise EvaluationError("crowding distance of an empty front")
    dist = np.zeros(n)
    for t in range(n_obj):
        order = np.argsort(objs[:, t], kind="stable")
        span = objs[order[-1], t] - objs[order[0], t]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span > 0:
            gaps = objs[order[2:], t] - objs[order[:-2], t]
            dist[order[1:-1]] += gaps / span
    return dist


@dataclass
class EvaluatedPoint:
    """A decision vector with its raw objective samples and cached mean.

    ``mean`` is kept equal to the component-wise average of ``samples``;
    it is recomputed from the full sample list on every append so the
    1e-12 accumulation tolerance holds regardless of sample count.
    """

    decision: np.ndarray
    samples: list[np.ndarray] = field(default_factory=list)
    mean: np.ndarray | None = None
    uid: int = -1

    def __post_init__(self) -> None:
        self.decision = np.asarray(self.decision, dtype=float)
        self.samples = [np.asarray(s, dtype=float) for s in self.samples]
        if self.samples:
            self.mean = np.mean(self.samples, axis=0)

    @property
    def count(self) -> int:
        return len(self.samples)

    def add_sample(self, y: np.ndarray) -> None:
        self.samples.append(np.asarray(y, dtype=float))
        self.mean = np.mean(self.samples, axis=0)

    def scaled_residuals(self) -> np.ndarray:
        """The N residuals (y - mean) scaled by sqrt(N / (N - 1)), shape (N, T).

        Undefined for a single sample; the scaling factor blows up at N = 1.
        """
        n = self.count
        if n < 2:
            raise EvaluationError("residuals need at least two samples")
        return np.sqrt(n / (n - 1)) * (np.asarray(self.samples) - self.mean)


@dataclass
class RankedPopulation:
    """A population with 1-based Pareto ranks and per-member crowding."""

    members: list[EvaluatedPoint]
    rank: np.ndarray
    crowding: np.ndarray

    def __len__(self) -> int:
        return len(self.members)

    @property
    def means(self) -> np.ndarray:
        return np.array([p.mean for p in self.members])

    def first_front(self) -> list[EvaluatedPoint]:
        return [p for p, r in zip(self.members, self.rank) if r == 1]


def nondominated_sort(points: list[EvaluatedPoint]) -> RankedPopulation:
    """Rank a population by non-dominated peeling on the sample means.

    Crowding is computed per front. Equal-rank members keep their input
    order, so the result is stable with respect to the input.
    """
    if not points:
        raise EvaluationError("cannot sort an empty population")
    means = np.array([p.mean for p in points])
    ranks = front_ranks(means)
    crowding = np.zeros(len(points))
    for r in np.unique(ranks):
        idx = np.flatnonzero(ranks == r)
        crowding[idx] = crowding_distance(means[idx])
    return RankedPopulation(members=list(points), rank=ranks, crowding=crowding)
