import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pooltest.cost import cost_dorfman, cost_dorfman_modified, cost_sterrett, evaluate_plan
from pooltest.model import Group, OrderedPartition, SetPartition, validate_probability_vector
from pooltest.simulate import (
    PROTOCOLS,
    RngSpec,
    beta_one_quantile,
    estimate_cost,
    exact_expected_tests,
    run_dorfman,
    run_dorfman_modified,
    run_sterrett,
    sample_beta_one,
)


def group_of(k):
    return Group(items=tuple(range(k)))


class TestDorfmanProtocol:
    def test_negative_pool(self):
        trace = run_dorfman(group_of(3), (False, False, False))
        assert trace.tests_performed == 1
        assert trace.inferred_without_test == frozenset()

    def test_positive_pool_tests_everyone(self):
        trace = run_dorfman(group_of(3), (False, True, False))
        assert trace.tests_performed == 4
        assert trace.classifications == (False, True, False)

    def test_single_item(self):
        assert run_dorfman(group_of(1), (True,)).tests_performed == 1


class TestModifiedDorfmanProtocol:
    def test_last_item_inferred(self):
        trace = run_dorfman_modified(group_of(3), (False, False, True))
        assert trace.tests_performed == 3
        assert trace.inferred_without_test == frozenset({2})
        assert trace.classifications == (False, False, True)

    def test_early_positive_forces_all_tests(self):
        trace = run_dorfman_modified(group_of(3), (True, False, False))
        assert trace.tests_performed == 4
        assert trace.inferred_without_test == frozenset()

    def test_negative_pool(self):
        assert run_dorfman_modified(group_of(2), (False, False)).tests_performed == 1

    def test_never_more_tests_than_dorfman(self):
        for k in range(1, 9):
            for defects in itertools.product([False, True], repeat=k):
                a = run_dorfman_modified(group_of(k), defects).tests_performed
                b = run_dorfman(group_of(k), defects).tests_performed
                assert a <= b


class TestSterrettProtocol:
    def test_trailing_defective_inferred(self):
        trace = run_sterrett(group_of(3), (False, False, True))
        assert trace.tests_performed == 3
        assert trace.inferred_without_test == frozenset({2})

    def test_middle_defective_restarts(self):
        # pool, item 1, item 2 positive, then a fresh single-item test
        trace = run_sterrett(group_of(3), (False, True, False))
        assert trace.tests_performed == 4

    def test_negative_pool(self):
        assert run_sterrett(group_of(2), (False, False)).tests_performed == 1

    def test_all_defective_worst_case(self):
        for k in range(1, 8):
            trace = run_sterrett(group_of(k), (True,) * k)
            assert trace.tests_performed <= 2 * k - 1

    def test_deep_group_iterative(self):
        k = 10_000
        defects = tuple(i % 3 == 0 for i in range(k))
        trace = run_sterrett(group_of(k), defects)
        assert trace.classifications == defects


@pytest.mark.parametrize("procedure", ["D", "Dp", "S"])
def test_protocols_classify_correctly(procedure):
    run = PROTOCOLS[procedure]
    for k in range(1, 11):
        for defects in itertools.product([False, True], repeat=k):
            trace = run(group_of(k), defects)
            assert trace.classifications == defects
            assert trace.inferred_without_test.isdisjoint(trace.tested_individually)
            assert trace.tests_performed >= 1


class TestExactExpectation:
    """Probability-weighted enumeration of every defect vector must
    reproduce the closed forms; this ties the formulas to the protocols."""

    closed = {"D": cost_dorfman, "Dp": cost_dorfman_modified, "S": cost_sterrett}

    @pytest.mark.parametrize("procedure", ["D", "Dp", "S"])
    def test_small_groups_random_probs(self, procedure):
        rng = random.Random(7)
        for k in range(1, 8):
            pv = validate_probability_vector([rng.uniform(0.02, 0.98) for _ in range(k)])
            g = group_of(k)
            exact = exact_expected_tests(g, pv, procedure)
            assert exact == pytest.approx(self.closed[procedure](g, pv), abs=1e-12)

    @given(st.lists(st.floats(min_value=0.01, max_value=0.99), min_size=1, max_size=6))
    @settings(max_examples=100, deadline=None)
    def test_sterrett_property(self, probs):
        pv = validate_probability_vector(probs)
        g = group_of(pv.n)
        assert exact_expected_tests(g, pv, "S") == pytest.approx(
            cost_sterrett(g, pv), abs=1e-12
        )


class TestRngSpec:
    def test_same_spec_same_draws(self):
        a = RngSpec(seed=9, stream=3).generator().random(5)
        b = RngSpec(seed=9, stream=3).generator().random(5)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = RngSpec(seed=9, stream=0).generator().random(5)
        b = RngSpec(seed=9, stream=1).generator().random(5)
        assert not np.array_equal(a, b)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            RngSpec(seed=-1)
        with pytest.raises(ValueError):
            RngSpec(seed=1, stream=-2)


class TestEstimateCost:
    def test_singleton_plan_is_deterministic(self):
        pv = validate_probability_vector([0.3, 0.5, 0.7])
        plan = OrderedPartition(sizes=(1, 1, 1))
        summary = estimate_cost(plan, pv, "S", 50, RngSpec(seed=1))
        assert summary.mean_tests == 3.0
        assert summary.std_error == 0.0

    def test_pair_matches_closed_form(self):
        pv = validate_probability_vector([0.1, 0.2])
        plan = OrderedPartition(sizes=(2,))
        summary = estimate_cost(plan, pv, "S", 40_000, RngSpec(seed=11))
        assert summary.std_error > 0
        assert abs(summary.mean_tests - 1.38) <= 4 * summary.std_error

    def test_counterexample_pairing(self):
        pv = validate_probability_vector([0.4, 0.4, 0.01, 0.01])
        plan = SetPartition(blocks=((0, 2), (1, 3)))
        summary = estimate_cost(plan, pv, "S", 40_000, RngSpec(seed=12))
        assert abs(summary.mean_tests - 2.832) <= 4 * summary.std_error

    def test_reproducible(self):
        pv = validate_probability_vector([0.2, 0.3, 0.4])
        plan = OrderedPartition(sizes=(3,))
        a = estimate_cost(plan, pv, "Dp", 500, RngSpec(seed=5))
        b = estimate_cost(plan, pv, "Dp", 500, RngSpec(seed=5))
        assert a == b

    def test_rejects_single_replicate(self):
        pv = validate_probability_vector([0.2])
        with pytest.raises(ValueError):
            estimate_cost(OrderedPartition(sizes=(1,)), pv, "S", 1, RngSpec(seed=1))

    def test_given_order_matches_its_own_closed_form(self):
        # blocks costed exactly as written: the risky item first is the
        # expensive way around, and the estimate must track that form
        pv = validate_probability_vector([0.4, 0.01])
        plan = SetPartition(blocks=((0, 1),))
        expected = evaluate_plan(plan, pv, "S", arrange="given").total
        summary = estimate_cost(plan, pv, "S", 40_000, RngSpec(seed=31), arrange="given")
        assert expected == pytest.approx(1.806, abs=1e-12)
        assert abs(summary.mean_tests - expected) <= 4 * summary.std_error

    def test_consistency_over_seeds(self):
        # the mean should land within four standard errors nearly always
        pv = validate_probability_vector([0.15, 0.3, 0.45])
        plan = OrderedPartition(sizes=(3,))
        expected = evaluate_plan(plan, pv, "S", arrange="optimal").total
        hits = 0
        for seed in range(100):
            s = estimate_cost(plan, pv, "S", 2000, RngSpec(seed=seed))
            if abs(s.mean_tests - expected) <= 4 * s.std_error:
                hits += 1
        assert hits >= 99


class TestBetaSampler:
    def test_quantile_median_uniform(self):
        assert beta_one_quantile(0.5, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_quantile_rejects_bad_beta(self):
        with pytest.raises(ValueError):
            beta_one_quantile(0.5, 0.0)

    def test_mean_matches_target(self):
        # Beta(1, 9) has mean 0.1
        rng = RngSpec(seed=21).generator()
        draws = [sample_beta_one(9.0, rng) for _ in range(40_000)]
        assert np.mean(draws) == pytest.approx(0.1, abs=0.005)

    def test_sd_matches_target(self):
        # for mean 0.1 the population sd is 0.1 * sqrt(0.9 / 1.1) = 0.0905
        rng = RngSpec(seed=22).generator()
        beta = (1 - 0.1) / 0.1
        draws = [sample_beta_one(beta, rng) for _ in range(40_000)]
        assert np.std(draws, ddof=1) == pytest.approx(0.0905, abs=0.003)

    def test_draws_strictly_inside_unit_interval(self):
        rng = RngSpec(seed=23).generator()
        for _ in range(2000):
            x = sample_beta_one(0.01, rng)  # heavy mass near 1
            assert 0.0 < x < 1.0
