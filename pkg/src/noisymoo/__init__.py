"""Noisy multi-objective optimization benchmark with adaptive resampling.

Library layout:

* ``pareto`` — dominance relations, non-dominated sorting, crowding.
* ``problems`` — UF1/UF2/UF3 mean functions with standardized noise.
* ``bootstrap`` — dispersion pooling, corrected/mixed bootstrap of the
  sample mean, dominance probability, the adaptive resampling decision.
* ``resampling`` — static, time, rank, strength, and standard-error
  baseline decision functions behind one interface.
* ``optimizers`` — NSGA-II (one-shot / sequential resampling) and the
  Rolling Tide EA under a strict evaluation budget.
* ``metrics`` — true-mean filtering, 2-D hypervolume, IGD.
* ``harness`` / ``cli`` — reproducible sweeps, comparison protocols,
  CSV reporting.
"""

from .bootstrap import (ArbThresholds, DispersionSet, arb_decide, bootstrap_means,
                        bootstrap_means_pooled, dominance_probability, push_residuals)
from .metrics import (MetricParams, MetricReport, hypervolume, igd_p, nadir_for,
                      normalized_hypervolume, score_final_set, true_nondominated_filter)
from .optimizers import (Evaluator, RteaConfig, RunResult, environmental_select,
                         nsga2_run, rtea_run, tournament_select)
from .pareto import (EvaluatedPoint, EvaluationError, RankedPopulation,
                     crowding_distance, dominates, indifferent, nondominated_sort,
                     weakly_dominates)
from .problems import (NoiseLaw, NoisyProblem, SIGMA_GRID, evaluate_noisy,
                       make_problem, sample_true_pf)
from .resampling import (ArbStrategy, DecisionContext, RankStrategy, SeErrorStrategy,
                         StaticStrategy, StrengthStrategy, TimeStrategy,
                         budget_fraction_rank, budget_fraction_strength,
                         budget_fraction_time, domination_strength, sederror_decide,
                         should_resample, strategy_from_dict)
from .variation import VariationConfig

__version__ = "0.1.0"
