"""Bootstrap machinery for comparing noisy points.

The pieces, bottom to top:

* ``DispersionSet`` — a sliding pool of scaled, mean-centered residual
  vectors harvested from recently re-evaluated points. Under the working
  assumption that dispersion is roughly homogeneous across the decision
  space, this pool lends variability to points observed only once.
* ``bootstrap_means`` — bootstrap replicates of a point's sample mean from
  its own samples, rescaled by sqrt(N / (N - 1)) so the replicate variance
  matches the unbiased estimate s^2 / N instead of undershooting it.
* ``bootstrap_means_pooled`` — the mixed scheme: one summand of every
  replicate comes from the shared pool, the other N - 1 from the point's
  own samples. With a single observation this degenerates to mean + pool
  draw; as N grows the point's own dispersion dominates.
* ``dominance_probability`` — cross-pair frequency with which one replicate
  cloud strictly dominates another.
* ``arb_decide`` — the adaptive resampling rule: spend another evaluation
  only while the candidate's best chance of dominating a front member sits
  inside the uncertainty band (alpha_l, alpha_u).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .pareto import EvaluatedPoint, EvaluationError


class DispersionSet:
    """Ring buffer of scaled residual vectors, capacity 100 by default.

    Entries handed out by :meth:`centered` are re-centered so their
    component-wise mean is exactly zero; the raw buffer keeps insertion
    order and evicts the oldest entries beyond capacity.
    """

    def __init__(self, capacity: int = 100):
        if capacity < 1:
            raise EvaluationError("dispersion set capacity must be positive")
        self.capacity = capacity
        self._entries: deque[np.ndarray] = deque(maxlen=capacity)
        self._centered: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._entries)

    def push(self, residual: np.ndarray) -> None:
        """Append one scaled residual vector, evicting the oldest if full."""
        self._entries.append(np.asarray(residual, dtype=float))
        self._centered = None

    def centered(self) -> np.ndarray:
        """The (m, T) view used for sampling: entries minus their column mean."""
        if not self._entries:
            raise EvaluationError("dispersion set is empty")
        if self._centered is None:
            raw = np.asarray(self._entries)
            self._centered = raw - raw.mean(axis=0)
        return self._centered

    def variance(self) -> np.ndarray:
        """Per-objective population variance of the centered entries."""
        view = self.centered()
        return view.var(axis=0)


def push_residuals(dispersion: DispersionSet, point: EvaluatedPoint) -> DispersionSet:
    """Append all N scaled residuals of a multiply-evaluated point."""
    if point.count < 2:
        raise EvaluationError("residuals require at least two samples")
    for row in point.scaled_residuals():
        dispersion.push(row)
    return dispersion


def push_newest_residual(dispersion: DispersionSet, point: EvaluatedPoint) -> None:
    """Append only the latest sample's scaled residual.

    This is what the optimizer loop uses after each re-evaluation, so the
    pool always holds the most recently observed errors, one per extra
    evaluation.
    """
    if point.count < 2:
        raise EvaluationError("residuals require at least two samples")
    dispersion.push(point.scaled_residuals()[-1])


def bootstrap_means(point: EvaluatedPoint, n_draws: int, rng: np.random.Generator) -> np.ndarray:
    """Variance-corrected bootstrap replicates of the sample mean, shape (B, T).

    Each replicate is mean + (1/N) * sum of N scaled residuals drawn
    uniformly with replacement from the point's own residuals. The
    sqrt(N / (N - 1)) scaling makes the replicate variance s^2 / N in
    expectation, where s^2 is the unbiased sample variance.
    """
    n = point.count
    if n < 2:
        raise EvaluationError("own-sample bootstrap needs at least two samples; "
                              "route singly evaluated points through the pooled scheme")
    residuals = point.scaled_residuals()
    idx = rng.integers(0, n, size=(n_draws, n))
    return point.mean + residuals[idx].mean(axis=1)


def bootstrap_means_pooled(point: EvaluatedPoint, dispersion: DispersionSet,
                           n_draws: int, rng: np.random.Generator) -> np.ndarray:
    """Mixed bootstrap replicates: one pooled summand, N - 1 own summands.

    Each replicate is mean + (1/N) * (E + sum of N - 1 own scaled residual
    draws) with E uniform from the centered dispersion pool. For N = 1 this
    reduces to mean + E.
    """
    pool = dispersion.centered()
    pooled = pool[rng.integers(0, pool.shape[0], size=n_draws)]
    n = point.count
    if n == 1:
        return point.mean + pooled
    residuals = point.scaled_residuals()
    idx = rng.integers(0, n, size=(n_draws, n - 1))
    own = residuals[idx].sum(axis=1)
    return point.mean + (pooled + own) / n


def _cross_pair_hits(a: np.ndarray, b: np.ndarray, strict: bool) -> np.ndarray:
    # (len(a), len(b)) matrix of "a-row beats b-row in every coordinate".
    if strict:
        hits = a[:, 0][:, None] < b[:, 0][None, :]
        for t in range(1, a.shape[1]):
            hits &= a[:, t][:, None] < b[:, t][None, :]
    else:
        hits = a[:, 0][:, None] <= b[:, 0][None, :]
        for t in range(1, a.shape[1]):
            hits &= a[:, t][:, None] <= b[:, t][None, :]
    return hits


def dominance_probability(draws_a: np.ndarray, draws_b: np.ndarray, *, strict: bool = True) -> float:
    """Fraction of cross pairs (a, b) where a dominates b in every coordinate.

    ``strict`` demands a_d < b_d in all coordinates (the default); the weak
    variant uses <= instead. Always in [0, 1], and the strict variant
    satisfies P(A over B) + P(B over A) <= 1.
    """
    a = np.asarray(draws_a, dtype=float)
    b = np.asarray(draws_b, dtype=float)
    if a.shape[1] != b.shape[1]:
        raise EvaluationError("draw sets differ in objective dimension")
    return float(_cross_pair_hits(a, b, strict).mean())


@dataclass(frozen=True)
class ArbThresholds:
    """Uncertainty band for the resampling decision.

    ``alpha_l`` in (0, 0.5) is the minimum dominance potential a point must
    show to stay interesting; ``alpha_u`` in (0.5, 1] is the confidence level
    above which further evaluations are considered wasted.
    """

    alpha_l: float = 0.2
    alpha_u: float = 0.9

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha_l < 0.5:
            raise EvaluationError("alpha_l must lie in (0, 0.5)")
        if not 0.5 < self.alpha_u <= 1.0:
            raise EvaluationError("alpha_u must lie in (0.5, 1]")


def arb_decide(candidate: EvaluatedPoint, front: list[EvaluatedPoint],
               dispersion: DispersionSet, thresholds: ArbThresholds,
               n_draws: int, rng: np.random.Generator, *, weak: bool = False) -> bool:
    """Decide whether the candidate deserves another evaluation.

    Computes p* = max over front members (the candidate itself excluded) of
    the bootstrap probability that the candidate's mean dominates the
    member's mean, with fresh replicates on every call. Returns False when
    p* > alpha_u (confidently good) or p* < alpha_l (hopeless), True inside
    the band. A candidate that is the sole front member has no comparison
    target, which counts as p* = 0.
    """
    if not front:
        raise EvaluationError("the front must be nonempty")
    rivals = [s for s in front if s is not candidate]
    if not rivals:
        return False
    candidate_draws = bootstrap_means_pooled(candidate, dispersion, n_draws, rng)
    # One batched cross comparison against all rivals at once; per rival this
    # equals dominance_probability(candidate draws, rival draws).
    rival_draws = np.concatenate(
        [bootstrap_means_pooled(r, dispersion, n_draws, rng) for r in rivals])
    hits = _cross_pair_hits(candidate_draws, rival_draws, strict=not weak)
    per_rival = hits.reshape(n_draws, len(rivals), n_draws).sum(axis=(0, 2))
    p_star = float(per_rival.max()) / (n_draws * n_draws)
    if p_star > thresholds.alpha_u:
        return False
    return not p_star < thresholds.alpha_l
