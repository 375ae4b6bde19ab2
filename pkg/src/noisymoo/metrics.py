"""Quality assessment of returned point sets.

The scoring pipeline evaluates the *true* mean function at each returned
decision vector, drops points whose true means are dominated within the
returned set, and scores what survives: dominated hypervolume against a
nadir point (normalized by the true front's hypervolume) and the power-mean
inverted generational distance against a dense front sample. Scoring real
quality instead of noise luck is the whole point of the filter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pareto import EvaluatedPoint, EvaluationError, dominance_matrix
from .problems import NoisyProblem, sample_true_pf


@dataclass(frozen=True)
class MetricParams:
    nadir_delta: float = 0.1
    n_pf: int = 1000
    igd_power: float = 2.0


@dataclass(frozen=True)
class MetricReport:
    hv_raw: float
    hv_normalized: float
    igd: float
    igd_power: float
    nadir: tuple[float, ...]
    pf_sample_size: int
    n_returned: int
    n_filtered: int

    def as_dict(self) -> dict:
        return {
            "hv_raw": self.hv_raw,
            "hv_normalized": self.hv_normalized,
            "igd": self.igd,
            "igd_power": self.igd_power,
            "nadir": list(self.nadir),
            "pf_sample_size": self.pf_sample_size,
            "n_returned": self.n_returned,
            "n_filtered": self.n_filtered,
        }


def true_nondominated_filter(returned: list[EvaluatedPoint],
                             problem: NoisyProblem) -> list[EvaluatedPoint]:
    """Keep the points whose true means are not strictly dominated within the set."""
    if not returned:
        return []
    mus = np.array([problem.mean_fn(p.decision) for p in returned])
    dominated = dominance_matrix(mus).any(axis=0)
    return [p for p, d in zip(returned, dominated) if not d]


def hypervolume(points: np.ndarray, nadir: np.ndarray) -> float:
    """Exact bi-objective dominated hypervolume against a nadir point.

    Points with any coordinate at or beyond the nadir enclose no volume and
    are dropped. The sweep sums rectangle slabs of the remaining points in
    ascending first-objective order, which makes dominated points contribute
    nothing, so the result equals the hypervolume of the non-dominated
    subset.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return 0.0
    pts = np.atleast_2d(pts)
    if pts.shape[1] != 2:
        raise EvaluationError("hypervolume sweep is implemented for exactly 2 objectives")
    nadir = np.asarray(nadir, dtype=float)
    pts = pts[np.all(pts < nadir, axis=1)]
    if pts.size == 0:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    hv = 0.0
    ceiling = nadir[1]
    for a, b in pts[order]:
        if b < ceiling:
            hv += (nadir[0] - a) * (ceiling - b)
            ceiling = b
    return float(hv)


def nadir_for(problem: NoisyProblem, params: MetricParams = MetricParams()) -> np.ndarray:
    """Per-problem nadir: (1 + delta) times the objective maxima over the true front."""
    pf = sample_true_pf(problem, params.n_pf)
    return (1.0 + params.nadir_delta) * pf.max(axis=0)


def normalized_hypervolume(points: np.ndarray, problem: NoisyProblem,
                           nadir: np.ndarray, n_pf: int = 1000) -> float:
    """Hypervolume scaled by the true front sample's hypervolume.

    Values above 1 can only arise from the discretization of the front
    sample; the denominator being zero means the nadir is degenerate.
    """
    denom = hypervolume(sample_true_pf(problem, n_pf), nadir)
    if denom <= 0.0:
        raise EvaluationError("true-front hypervolume is zero; nadir is degenerate")
    return hypervolume(points, nadir) / denom


def igd_p(points: np.ndarray, pf: np.ndarray, power: float = 2.0) -> float:
    """Power mean of distances from front samples to their nearest set member."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    ref = np.atleast_2d(np.asarray(pf, dtype=float))
    if pts.size == 0 or ref.size == 0:
        raise EvaluationError("igd needs a nonempty set and a nonempty front sample")
    if power < 1.0:
        raise EvaluationError("igd power must be at least 1")
    dists = np.sqrt(((ref[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)).min(axis=1)
    return float(np.mean(dists ** power) ** (1.0 / power))


def score_final_set(returned: list[EvaluatedPoint], problem: NoisyProblem,
                    params: MetricParams = MetricParams()) -> MetricReport:
    """Apply the true-mean filter and compute the full metric report."""
    filtered = true_nondominated_filter(returned, problem)
    nadir = nadir_for(problem, params)
    pf = sample_true_pf(problem, params.n_pf)
    denom = hypervolume(pf, nadir)
    if denom <= 0.0:
        raise EvaluationError("true-front hypervolume is zero; nadir is degenerate")
    if filtered:
        true_means = np.array([problem.mean_fn(p.decision) for p in filtered])
        hv_raw = hypervolume(true_means, nadir)
        igd = igd_p(true_means, pf, params.igd_power)
    else:
        hv_raw = 0.0
        igd = float("inf")
    return MetricReport(hv_raw=hv_raw, hv_normalized=hv_raw / denom, igd=igd,
                        igd_power=params.igd_power, nadir=tuple(float(v) for v in nadir),
                        pf_sample_size=params.n_pf, n_returned=len(returned),
                        n_filtered=len(filtered))
