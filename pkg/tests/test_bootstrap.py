import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisymoo.bootstrap import (ArbThresholds, DispersionSet, arb_decide,
                                bootstrap_means, bootstrap_means_pooled,
                                dominance_probability, push_newest_residual,
                                push_residuals)
from noisymoo.pareto import EvaluatedPoint, EvaluationError

from .oracles import brute_dominance_probability

vec = lambda *v: np.array(v, dtype=float)


def point(*samples):
    return EvaluatedPoint(decision=np.zeros(2), samples=[vec(*s) for s in samples])


class TestDispersionSet:
    def test_push_residuals_scales_by_count_factor(self):
        ds = DispersionSet()
        push_residuals(ds, point((0, 0), (2, 2)))
        raw = sorted(tuple(e) for e in np.asarray(ds._entries))
        r2 = np.sqrt(2)
        assert raw == [(-r2, -r2), (r2, r2)]

    def test_ring_buffer_keeps_last_hundred(self):
        ds = DispersionSet()
        for i in range(60):
            ds.push(vec(i, i))
        for i in range(60, 120):
            ds.push(vec(i, i))
        assert len(ds) == 100
        assert np.asarray(ds._entries)[0, 0] == 20

    def test_sampled_view_is_centered(self):
        ds = DispersionSet()
        for i in range(7):
            ds.push(vec(i, 2 * i + 1))
        assert np.allclose(ds.centered().mean(axis=0), 0.0, atol=1e-12)

    def test_single_observation_rejected(self):
        with pytest.raises(EvaluationError):
            push_residuals(DispersionSet(), point((1, 1)))

    def test_newest_residual_is_latest_sample(self):
        ds = DispersionSet()
        pt = point((0, 0), (2, 2))
        push_newest_residual(ds, pt)
        assert len(ds) == 1
        assert np.allclose(ds._entries[0], np.sqrt(2) * (vec(2, 2) - vec(1, 1)))

    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
                    min_size=1, max_size=150))
    def test_capacity_never_exceeded(self, entries):
        ds = DispersionSet()
        for e in entries:
            ds.push(vec(*e))
        assert len(ds) <= 100
        assert np.allclose(ds.centered().mean(axis=0), 0.0, atol=1e-12)


class TestOwnSampleBootstrap:
    def test_identical_samples_collapse_to_mean(self):
        pt = point((3, 4), (3, 4), (3, 4))
        draws = bootstrap_means(pt, 50, np.random.default_rng(0))
        assert np.allclose(draws, [3, 4])

    def test_variance_correction_matches_unbiased_variance(self):
        rng = np.random.default_rng(5)
        pt = point(*[tuple(rng.normal(size=2)) for _ in range(5)])
        draws = bootstrap_means(pt, 100_000, rng)
        s2 = np.var(np.asarray(pt.samples), axis=0, ddof=1)
        assert np.all(np.abs(draws.var(axis=0) / (s2 / 5) - 1) < 0.05)

    def test_two_samples_give_three_distinct_means(self):
        # Rounding merges float summation-order noise; distinct multisets
        # stay far apart with these sample values.
        pt = point((0, 0), (3, 3))
        draws = bootstrap_means(pt, 2000, np.random.default_rng(1))
        assert len({tuple(np.round(d, 9)) for d in draws}) == 3

    def test_single_sample_rejected(self):
        with pytest.raises(EvaluationError):
            bootstrap_means(point((1, 1)), 10, np.random.default_rng(0))

    @pytest.mark.parametrize("n,expected", [(1, 1), (2, 3), (3, 10), (4, 35)])
    def test_resample_multiset_count(self, n, expected):
        # Exhaustive enumeration over index tuples; the number of distinct
        # multisets of size n from n items is C(2n - 1, n).
        multisets = {tuple(sorted(t)) for t in itertools.product(range(n), repeat=n)}
        assert len(multisets) == expected == math.comb(2 * n - 1, n)

    def test_three_samples_give_ten_distinct_means(self):
        pt = point((0, 0), (1, 1), (10, 10))
        draws = bootstrap_means(pt, 5000, np.random.default_rng(2))
        assert len({tuple(np.round(d, 9)) for d in draws}) == 10


class TestPooledBootstrap:
    def _pool(self, entries):
        ds = DispersionSet()
        for e in entries:
            ds.push(vec(*e))
        return ds

    def test_single_observation_reduces_to_mean_plus_pool(self):
        ds = self._pool([(1, 0), (-1, 0)])
        pt = point((5, 5))
        draws = bootstrap_means_pooled(pt, ds, 4000, np.random.default_rng(3))
        values = {tuple(d) for d in draws}
        assert values == {(6.0, 5.0), (4.0, 5.0)}
        freq = np.mean([d[0] == 6.0 for d in draws])
        assert freq == pytest.approx(0.5, abs=0.05)

    def test_zero_own_dispersion_halves_pool_draw(self):
        ds = self._pool([(2, 2), (-2, -2)])
        pt = point((1, 1), (1, 1))
        draws = bootstrap_means_pooled(pt, ds, 500, np.random.default_rng(4))
        assert {tuple(d) for d in draws} == {(2.0, 2.0), (0.0, 0.0)}

    def test_variance_decomposition(self):
        rng = np.random.default_rng(6)
        ds = self._pool([tuple(rng.normal(size=2)) for _ in range(100)])
        n = 10
        pt = point(*[tuple(rng.normal(size=2)) for _ in range(n)])
        draws = bootstrap_means_pooled(pt, ds, 100_000, rng)
        s2 = np.var(np.asarray(pt.samples), axis=0, ddof=1)
        expected = (s2 * (n - 1) / n + ds.variance() / n) / n
        assert np.all(np.abs(draws.var(axis=0) / expected - 1) < 0.10)

    def test_empty_pool_rejected(self):
        with pytest.raises(EvaluationError):
            bootstrap_means_pooled(point((1, 1)), DispersionSet(), 10,
                                   np.random.default_rng(0))

    def test_draw_variance_shrinks_with_count(self):
        # Monte Carlo trend: more samples of the same distribution mean a
        # tighter bootstrap cloud, checked as a majority direction.
        rng = np.random.default_rng(7)
        ds = self._pool([tuple(rng.normal(size=2)) for _ in range(100)])
        downward = 0
        for _ in range(20):
            spreads = []
            for n in (2, 5, 10, 20):
                pt = point(*[tuple(rng.normal(size=2)) for _ in range(n)])
                draws = bootstrap_means_pooled(pt, ds, 2000, rng)
                spreads.append(draws.var(axis=0).mean())
            downward += sum(b < a for a, b in zip(spreads, spreads[1:]))
        assert downward > 30  # majority of the 60 adjacent comparisons


class TestDominanceProbability:
    def test_enumerated_example(self):
        assert dominance_probability(vec(0, 0)[None].repeat(1, 0), np.array([[1, 1]])) == 1.0
        p = dominance_probability(np.array([[0, 0], [2, 2]]), np.array([[1, 1]]))
        assert p == 0.5

    def test_identical_singletons(self):
        assert dominance_probability(np.array([[1, 1]]), np.array([[1, 1]])) == 0.0

    def test_all_below_gives_one(self):
        a = np.array([[0, 0], [0.1, 0.1]])
        b = np.array([[1, 1], [2, 2]])
        assert dominance_probability(a, b) == 1.0

    def test_matches_bruteforce_enumeration(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            na, nb = rng.integers(1, 51, size=2)
            t = int(rng.integers(2, 4))
            a = rng.normal(size=(na, t))
            b = rng.normal(size=(nb, t))
            assert dominance_probability(a, b) == brute_dominance_probability(a, b)
            assert (dominance_probability(a, b, strict=False)
                    == brute_dominance_probability(a, b, strict=False))

    @given(st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=50, deadline=None)
    def test_sum_bounded_by_one(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(rng.integers(1, 30), 2))
        b = rng.normal(size=(rng.integers(1, 30), 2))
        assert dominance_probability(a, b) + dominance_probability(b, a) <= 1.0


class TestArbDecision:
    def _tiny_pool(self, delta=1e-6):
        ds = DispersionSet()
        ds.push(vec(delta, delta))
        ds.push(vec(-delta, -delta))
        return ds

    def test_confidently_good_stops(self):
        # Candidate sits far below the lone front rival: p* is 1.
        ds = self._tiny_pool()
        candidate = point((0, 0))
        rival = point((1, 1), (1, 1))
        assert arb_decide(candidate, [rival], ds, ArbThresholds(0.1, 0.9),
                          100, np.random.default_rng(0)) is False

    def test_hopeless_stops(self):
        ds = self._tiny_pool()
        candidate = point((2, 2))
        rival = point((1, 1), (1, 1))
        assert arb_decide(candidate, [rival], ds, ArbThresholds(0.1, 0.9),
                          100, np.random.default_rng(0)) is False

    def test_uncertain_band_continues(self):
        # Equal means with symmetric jitter put p* near 0.5.
        ds = self._tiny_pool(delta=0.5)
        candidate = point((1, 1))
        rival = point((1, 1), (1, 1))
        assert arb_decide(candidate, [rival], ds, ArbThresholds(0.2, 0.9),
                          100, np.random.default_rng(0)) is True

    def test_candidate_excluded_from_own_front(self):
        ds = self._tiny_pool()
        candidate = point((0, 0))
        assert arb_decide(candidate, [candidate], ds, ArbThresholds(0.2, 0.9),
                          100, np.random.default_rng(0)) is False

    def test_empty_front_rejected(self):
        with pytest.raises(EvaluationError):
            arb_decide(point((0, 0)), [], self._tiny_pool(), ArbThresholds(),
                       100, np.random.default_rng(0))

    def test_threshold_ranges_enforced(self):
        with pytest.raises(EvaluationError):
            ArbThresholds(alpha_l=0.6, alpha_u=0.9)
        with pytest.raises(EvaluationError):
            ArbThresholds(alpha_l=0.1, alpha_u=0.4)

    def test_matches_pairwise_maximum(self):
        # The batched rule must agree with explicit per-rival probabilities.
        rng = np.random.default_rng(9)
        ds = DispersionSet()
        for _ in range(30):
            ds.push(rng.normal(size=2))
        candidate = point(*[tuple(rng.normal(size=2)) for _ in range(3)])
        rivals = [point(*[tuple(rng.normal(size=2)) for _ in range(k)]) for k in (1, 2, 4)]
        thresholds = ArbThresholds(0.2, 0.9)
        decision = arb_decide(candidate, rivals, ds, thresholds, 100,
                              np.random.default_rng(77))
        rng2 = np.random.default_rng(77)
        cand_draws = bootstrap_means_pooled(candidate, ds, 100, rng2)
        p_star = max(dominance_probability(
            cand_draws, bootstrap_means_pooled(r, ds, 100, rng2)) for r in rivals)
        expected = not (p_star > 0.9 or p_star < 0.2)
        assert decision is expected
