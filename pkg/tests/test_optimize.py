import random

import pytest
from hypothesis import given, settings, strategies as st

from pooltest.cost import evaluate_plan
from pooltest.model import (
    InstanceTooLargeError,
    NotSortedError,
    sort_ascending,
    validate_probability_vector,
)
from pooltest.optimize import (
    count_partitions,
    dp_ordered,
    dp_table,
    exhaustive_ordered,
    exhaustive_set,
    iter_set_partitions,
    pair_interchange_costs,
)

# q values {0.6, 0.6, 0.99, 0.99}: optimal ordered plans are beaten by an
# unordered pairing under both sequential procedures
COUNTEREXAMPLE = [0.4, 0.4, 0.01, 0.01]


def random_pv(rng, n, lo=0.01, hi=0.99):
    return validate_probability_vector([rng.uniform(lo, hi) for _ in range(n)])


class TestCounterexampleInstance:
    def test_dp_sterrett(self):
        result = dp_ordered(validate_probability_vector(COUNTEREXAMPLE), "S")
        assert result.total == pytest.approx(2.83794, abs=1e-9)
        assert sorted(result.plan.sizes) == [1, 3]

    def test_dp_modified_dorfman(self):
        result = dp_ordered(validate_probability_vector(COUNTEREXAMPLE), "Dp")
        assert result.total == pytest.approx(2.8438, abs=1e-4)

    def test_exhaustive_set_pairing(self):
        result = exhaustive_set(validate_probability_vector(COUNTEREXAMPLE), "S")
        assert result.total == pytest.approx(2.832, abs=1e-9)
        assert result.plan.blocks == ((0, 2), (1, 3))

    def test_exhaustive_set_modified_dorfman(self):
        result = exhaustive_set(validate_probability_vector(COUNTEREXAMPLE), "Dp")
        assert result.total == pytest.approx(2.832, abs=1e-9)

    def test_exhaustive_ordered_matches_dp(self):
        pv = validate_probability_vector(COUNTEREXAMPLE)
        assert exhaustive_ordered(pv, "S").total == pytest.approx(
            dp_ordered(pv, "S").total, abs=1e-12
        )


class TestDpTable:
    def test_base_cases(self):
        pv, _ = sort_ascending(validate_probability_vector([0.1, 0.2, 0.3]))
        table = dp_table(pv, "S")
        assert table.cost_to_go[0] == 0.0
        assert table.cost_to_go[1] == 1.0

    def test_requires_sorted(self):
        pv = validate_probability_vector([0.3, 0.1])
        with pytest.raises(NotSortedError):
            dp_table(pv, "S")

    def test_singleton_append_bound(self):
        rng = random.Random(4)
        for _ in range(50):
            pv, _ = sort_ascending(random_pv(rng, rng.randint(1, 30)))
            for proc in ("D", "Dp", "S"):
                table = dp_table(pv, proc)
                for k in range(1, pv.n + 1):
                    assert table.cost_to_go[k] <= table.cost_to_go[k - 1] + 1.0 + 1e-12

    def test_plan_sizes_recover_total(self):
        rng = random.Random(5)
        for _ in range(30):
            pv = random_pv(rng, rng.randint(1, 15))
            result = dp_ordered(pv, "S")
            assert sum(result.plan.sizes) == pv.n

    def test_tie_break_prefers_small_trailing_block(self):
        # two identical items above the no-pooling threshold: {1}{1} ties with
        # nothing, and every split index yields the same cost, so the largest
        # split (singleton blocks) must be chosen
        pv, _ = sort_ascending(validate_probability_vector([0.5, 0.5]))
        table = dp_table(pv, "S")
        assert table.split[2] == 1
        assert table.plan_sizes() == (1, 1)


class TestDpAgainstExhaustive:
    @pytest.mark.parametrize("procedure", ["D", "Dp", "S"])
    def test_random_instances(self, procedure):
        rng = random.Random(17)
        for _ in range(40):
            pv = random_pv(rng, rng.randint(1, 12))
            dp = dp_ordered(pv, procedure)
            brute = exhaustive_ordered(pv, procedure)
            assert abs(dp.total - brute.total) <= 1e-12 * max(1.0, dp.total)

    @pytest.mark.parametrize("s_rule", ["optimal", "smallest-last"])
    def test_sterrett_rules_consistent(self, s_rule):
        rng = random.Random(23)
        for _ in range(30):
            pv = random_pv(rng, rng.randint(1, 11))
            spv, _ = sort_ascending(pv)
            a = dp_table(spv, "S", s_rule=s_rule).total
            b = exhaustive_ordered(pv, "S", s_rule=s_rule).total
            assert abs(a - b) <= 1e-12 * max(1.0, a)

    def test_optimal_rule_never_worse_than_smallest_last(self):
        rng = random.Random(29)
        for _ in range(40):
            pv, _ = sort_ascending(random_pv(rng, rng.randint(1, 25)))
            assert (
                dp_table(pv, "S", "optimal").total
                <= dp_table(pv, "S", "smallest-last").total + 1e-12
            )

    def test_single_item(self):
        pv = validate_probability_vector([0.5])
        assert exhaustive_ordered(pv, "S").total == 1.0
        assert dp_ordered(pv, "S").total == 1.0


class TestExhaustiveSet:
    def test_enumeration_counts_match_bell_numbers(self):
        assert sum(1 for _ in iter_set_partitions(3)) == 5
        assert sum(1 for _ in iter_set_partitions(5)) == 52

    def test_partitions_are_partitions(self):
        for blocks in iter_set_partitions(4):
            items = sorted(i for b in blocks for i in b)
            assert items == [0, 1, 2, 3]

    def test_sandwich_below_dp(self):
        rng = random.Random(31)
        for _ in range(25):
            pv = random_pv(rng, rng.randint(1, 8))
            for proc in ("D", "Dp", "S"):
                unordered = exhaustive_set(pv, proc).total
                ordered = dp_ordered(pv, proc).total
                assert unordered <= ordered + 1e-12
                assert ordered <= pv.n + 1e-12

    def test_guards(self):
        pv = validate_probability_vector([0.1] * 14)
        with pytest.raises(InstanceTooLargeError):
            exhaustive_set(pv, "S")
        pv = validate_probability_vector([0.1] * 21)
        with pytest.raises(InstanceTooLargeError):
            exhaustive_ordered(pv, "S")

    def test_report_matches_reevaluation(self):
        pv = validate_probability_vector(COUNTEREXAMPLE)
        result = exhaustive_set(pv, "S")
        again = evaluate_plan(result.plan, pv, "S", arrange="optimal")
        assert abs(result.total - again.total) <= 1e-12 * max(1.0, result.total)


def test_fast_block_cost_matches_arrangement_route():
    # the DP's O(m) block formula and the public arrange-then-cost path are
    # independent implementations of the same quantity
    from pooltest.cost import arrange_for_sterrett, cost_sterrett
    from pooltest.model import Group
    from pooltest.optimize import _optimal_sterrett_cost_ascending

    rng = random.Random(53)
    for _ in range(300):
        k = rng.randint(1, 12)
        pv = random_pv(rng, k)
        fast = _optimal_sterrett_cost_ascending(sorted(pv.q))
        g = arrange_for_sterrett(Group(items=tuple(range(k))), pv).group
        slow = cost_sterrett(g, pv)
        assert abs(fast - slow) <= 1e-12 * max(1.0, slow)


def test_count_partitions_values():
    assert count_partitions(1) == (1, 1)
    assert count_partitions(3) == (5, 4)
    assert count_partitions(5) == (52, 16)
    assert count_partitions(10) == (115975, 512)
    assert count_partitions(13) == (27644437, 4096)


class TestInterchange:
    def test_counterexample_quadruple(self):
        ordered, swapped = pair_interchange_costs(0.99, 0.99, 0.6, 0.6, "S")
        assert ordered == pytest.approx(3.0699, abs=1e-9)
        assert swapped == pytest.approx(2.832, abs=1e-9)

    def test_equal_values_tie(self):
        ordered, swapped = pair_interchange_costs(0.7, 0.7, 0.7, 0.7, "Dp")
        assert ordered == pytest.approx(swapped, abs=1e-12)

    def test_rejects_unsorted(self):
        with pytest.raises(NotSortedError):
            pair_interchange_costs(0.5, 0.9, 0.4, 0.3, "S")

    def test_rejects_dorfman(self):
        with pytest.raises(ValueError):
            pair_interchange_costs(0.9, 0.8, 0.7, 0.6, "D")

    @given(
        st.lists(st.floats(min_value=0.01, max_value=0.99), min_size=4, max_size=4),
        st.sampled_from(["Dp", "S"]),
    )
    @settings(max_examples=500)
    def test_swapped_never_worse(self, qs, procedure):
        q1, q2, q3, q4 = sorted(qs, reverse=True)
        ordered, swapped = pair_interchange_costs(q1, q2, q3, q4, procedure)
        assert swapped <= ordered + 1e-12


class TestStructuralProperties:
    def test_ungar_region_yields_singletons(self):
        rng = random.Random(37)
        for _ in range(30):
            n = rng.randint(1, 20)
            pv = validate_probability_vector([rng.uniform(0.39, 0.99) for _ in range(n)])
            for proc in ("D", "Dp", "S"):
                result = dp_ordered(pv, proc)
                assert result.plan.sizes == (1,) * n
                assert result.total == float(n)

    def test_dominance_chain_on_optimal_plans(self):
        # with m the D-optimal plan and m' the Dp-optimal plan:
        # E_Dp(m') <= E_Dp(m) <= E_D(m)
        rng = random.Random(41)
        for _ in range(40):
            pv = random_pv(rng, rng.randint(1, 30), hi=0.5)
            m = dp_ordered(pv, "D")
            mprime = dp_ordered(pv, "Dp")
            e_dp_on_m = evaluate_plan(m.plan, pv, "Dp", arrange="optimal").total
            assert mprime.total <= e_dp_on_m + 1e-12
            assert e_dp_on_m <= m.total + 1e-12

    def test_sequential_dominance_low_risk(self):
        rng = random.Random(43)
        for _ in range(40):
            pv = random_pv(rng, rng.randint(1, 25), hi=0.3)
            s = dp_ordered(pv, "S").total
            dp_ = dp_ordered(pv, "Dp").total
            d = dp_ordered(pv, "D").total
            assert s <= dp_ + 1e-12
            assert dp_ <= d + 1e-12


def test_plan_result_json_shape():
    pv = validate_probability_vector(COUNTEREXAMPLE)
    payload = dp_ordered(pv, "S").to_json()
    assert payload["search"] == "dp-ordered"
    assert payload["plan"] == {"ordered_sizes": [3, 1]}
    assert payload["permutation"] == [3, 4, 1, 2]
    assert payload["report"]["total"] == pytest.approx(2.83794, abs=1e-9)
