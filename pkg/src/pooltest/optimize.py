"""Plan search: dynamic programming over ordered partitions plus exhaustive
oracles over all ordered partitions and all set partitions for small N.

The DP works on the population sorted ascending by p (descending by q).
With C(0) = 0 and C(1) = 1, the cost-to-go of the first k sorted items is

    C(k) = min over 0 <= i <= k-1 of  E(block i+1..k) + C(i)

where each candidate block is costed under its within-block arrangement.
For D and Dp, block costs are maintained incrementally while i sweeps from
k-1 down to 0, so the table costs O(N^2) arithmetic. Sterrett blocks are
arranged by one of two rules:

  "optimal"        the true minimum over block orders (enumerates the
                   last-position value per block; O(N^3) overall)
  "smallest-last"  the simple ascending-head rule, optimal only for
                   blocks of up to three items but O(N^2) overall and the
                   rule behind published comparison tables
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .bounds import ungar_threshold
from .cost import evaluate_plan
from .model import (
    CostReport,
    InstanceTooLargeError,
    NotSortedError,
    OrderedPartition,
    ProbabilityVector,
    SetPartition,
    sort_ascending,
)

MAX_EXHAUSTIVE_ORDERED = 20
MAX_EXHAUSTIVE_SET = 13

SEARCH_KINDS = ("dp-ordered", "exhaustive-ordered", "exhaustive-set")
STERRETT_RULES = ("optimal", "smallest-last")


@dataclass(frozen=True)
class DpTable:
    """Cost-to-go table of the ordered-partition dynamic program.

    ``cost_to_go[k]`` is the optimal cost of the first k sorted items;
    ``split[k]`` is the chosen i, i.e. the last block covers sorted items
    i+1..k. Ties pick the largest i (smallest trailing block).
    """

    procedure: str
    cost_to_go: tuple[float, ...]
    split: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.cost_to_go) - 1

    @property
    def total(self) -> float:
        return self.cost_to_go[-1]

    def plan_sizes(self) -> tuple[int, ...]:
        sizes: list[int] = []
        k = self.n
        while k > 0:
            i = self.split[k]
            sizes.append(k - i)
            k = i
        return tuple(reversed(sizes))


@dataclass(frozen=True)
class PlanResult:
    """A plan found by one of the searches, with its evaluated cost report.

    ``permutation`` maps sorted positions to original indices for the
    searches that sort the population first; it is None for the
    set-partition search, which works on original indices directly.
    """

    plan: OrderedPartition | SetPartition
    report: CostReport
    search: str
    permutation: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.search not in SEARCH_KINDS:
            raise ValueError(f"unknown search kind {self.search!r}")

    @property
    def total(self) -> float:
        return self.report.total

    def to_json(self) -> dict:
        return {
            "search": self.search,
            "plan": self.plan.to_json(),
            "permutation": [i + 1 for i in self.permutation] if self.permutation else None,
            "report": self.report.to_json(),
        }


def _check_sorted(pv: ProbabilityVector) -> None:
    for a, b in zip(pv.probs, pv.probs[1:]):
        if a > b:
            raise NotSortedError("population must be sorted ascending by p")


def _optimal_sterrett_cost_ascending(v: list[float]) -> float:
    """Minimum Sterrett cost of a block whose q values are given ascending.

    One candidate order per choice of last value b: the smallest remaining
    value goes first (its position never enters the cost) and the rest sit
    ascending in between. With w = v[1:], suffix-product tail sums G_t of w
    give every candidate in O(1), so the whole block costs O(m).
    """
    m = len(v)
    if m == 1:
        return 1.0
    total = math.fsum(v)
    prod = math.prod(v)
    w = v[1:]
    r = len(w)
    # G[t] = sum over u >= t of (w_u * w_{u+1} * ... * w_r), 1-based
    G = [0.0] * (r + 2)
    acc_suffix = [0.0] * (r + 2)
    acc = 1.0
    for t in range(r, 0, -1):
        acc *= w[t - 1]
        acc_suffix[t] = acc
    for t in range(r, 0, -1):
        G[t] = acc_suffix[t] + G[t + 1]
    two_m1 = 2.0 * m - 1.0
    # b = 1: smallest value last, w[0] first, middle = w[1:]
    best = two_m1 - (total - v[0]) - prod - v[0] * G[2]
    g1 = G[1]
    # b >= 2: value w[j-1] last, v[0] first, middle = w without w[j-1]
    for j in range(1, r + 1):
        wj = w[j - 1]
        e = two_m1 - total + wj - prod - wj * G[j + 1] - (g1 - G[j])
        if e < best:
            best = e
    return best


def dp_table(pv: ProbabilityVector, procedure: str, s_rule: str = "optimal") -> DpTable:
    """Run the ordered-partition DP on an already sorted population.

    ``s_rule`` selects the within-block arrangement for Sterrett blocks
    (see the module docstring); it is ignored for D and Dp.
    """
    _check_sorted(pv)
    if procedure not in ("D", "Dp", "S"):
        raise ValueError(f"unknown procedure {procedure!r}")
    if s_rule not in STERRETT_RULES:
        raise ValueError(f"unknown Sterrett block rule {s_rule!r}")
    qs = pv.q  # descending
    n = pv.n
    cost = [0.0] * (n + 1)
    split = [0] * (n + 1)
    cost[1] = 1.0
    for k in range(2, n + 1):
        qlast = qs[k - 1]
        one_minus_qlast = 1.0 - qlast
        prod = qlast  # product of qs[i..k-1]
        prod_head = 1.0  # product of qs[i..k-2]
        head_sum = 0.0  # sum of qs[i..k-2]
        prefix_chain = 0.0  # qs[i] + qs[i]qs[i+1] + ... + qs[i]..qs[k-2]
        best = cost[k - 1] + 1.0  # i = k-1: trailing singleton
        best_i = k - 1
        if procedure == "S" and s_rule == "optimal":
            # Ascending block values v = (qs[k-1], ..., qs[i]) gain their
            # largest element as i falls, so the suffix tail sums G over
            # w = v[1:] update in place: G[t] <- qi * (G[t] + 1).
            total = qlast
            G = [0.0] * (k + 1)
            for i in range(k - 2, -1, -1):
                qi = qs[i]
                total += qi
                prod *= qi
                m = k - i
                r = m - 1
                for t in range(1, r + 1):
                    G[t] = qi * (G[t] + 1.0)
                g1 = G[1]
                two_m1 = 2.0 * m - 1.0
                blk = two_m1 - (total - qlast) - prod - qlast * G[2]
                for j in range(1, r + 1):
                    wj = qs[k - 1 - j]
                    e = two_m1 - total + wj - prod - wj * G[j + 1] - (g1 - G[j])
                    if e < blk:
                        blk = e
                cand = blk + cost[i]
                if cand < best:
                    best = cand
                    best_i = i
        elif procedure == "S":
            for i in range(k - 2, -1, -1):
                qi = qs[i]
                head_sum += qi
                prefix_chain = qi * (1.0 + prefix_chain)
                m = k - i
                cand = (2.0 * m - 1.0) - head_sum - qlast * prefix_chain + cost[i]
                if cand < best:
                    best = cand
                    best_i = i
        elif procedure == "Dp":
            for i in range(k - 2, -1, -1):
                qi = qs[i]
                prod *= qi
                prod_head *= qi
                m = k - i
                cand = 1.0 + m - m * prod - prod_head * one_minus_qlast + cost[i]
                if cand < best:
                    best = cand
                    best_i = i
        else:
            for i in range(k - 2, -1, -1):
                prod *= qs[i]
                m = k - i
                cand = 1.0 + m - m * prod + cost[i]
                if cand < best:
                    best = cand
                    best_i = i
        cost[k] = best
        split[k] = best_i
    return DpTable(procedure=procedure, cost_to_go=tuple(cost), split=tuple(split))


def dp_ordered(pv: ProbabilityVector, procedure: str) -> PlanResult:
    """Minimum-cost ordered partition via dynamic programming.

    The population is sorted ascending by p internally; the result carries
    the permutation and a cost report expressed in original item indices.
    When every p_i is at or above the individual-testing threshold
    (3 - sqrt(5)) / 2, pooling cannot help and the all-singleton plan is
    returned directly.
    """
    sorted_pv, perm = sort_ascending(pv)
    if min(pv.probs) >= ungar_threshold():
        plan = OrderedPartition(sizes=(1,) * pv.n)
    else:
        table = dp_table(sorted_pv, procedure)
        plan = OrderedPartition(sizes=table.plan_sizes())
    report = evaluate_plan(plan, pv, procedure, arrange="optimal")
    return PlanResult(plan=plan, report=report, search="dp-ordered", permutation=perm)


# ---------------------------------------------------------------------------
# exhaustive oracles
# ---------------------------------------------------------------------------


def _arranged_block_cost_q(v: list[float], procedure: str, s_rule: str = "optimal") -> float:
    """Arranged cost of a block with q values ``v`` sorted descending."""
    m = len(v)
    if m == 1:
        return 1.0
    if procedure == "D":
        return 1.0 + m - m * math.prod(v)
    if procedure == "Dp":
        prod_head = math.prod(v[:-1])
        return 1.0 + m - m * prod_head * v[-1] - prod_head * (1.0 - v[-1])
    if s_rule == "optimal":
        return _optimal_sterrett_cost_ascending(v[::-1])
    # smallest-last rule: (2m-1) - sum of first m-1 values - v_m * (P_1+...+P_{m-1})
    head = 0.0
    acc = 1.0
    chain = 0.0
    for x in v[:-1]:
        head += x
        acc *= x
        chain += acc
    return (2.0 * m - 1.0) - head - v[-1] * chain


def _block_cost_table(qs: tuple[float, ...], procedure: str, s_rule: str) -> list[list[float]]:
    """bc[i][j] = arranged cost of sorted items i..j-1 (q descending)."""
    n = len(qs)
    bc = [[0.0] * (n + 1) for _ in range(n)]
    for j in range(1, n + 1):
        qlast = qs[j - 1]
        prod = qlast
        prod_head = 1.0
        head_sum = 0.0
        prefix_chain = 0.0
        bc[j - 1][j] = 1.0
        for i in range(j - 2, -1, -1):
            qi = qs[i]
            prod *= qi
            prod_head *= qi
            head_sum += qi
            prefix_chain = qi * (1.0 + prefix_chain)
            m = j - i
            if procedure == "D":
                bc[i][j] = 1.0 + m - m * prod
            elif procedure == "Dp":
                bc[i][j] = 1.0 + m - m * prod - prod_head * (1.0 - qlast)
            elif s_rule == "optimal":
                bc[i][j] = _optimal_sterrett_cost_ascending(list(qs[i:j])[::-1])
            else:
                bc[i][j] = (2.0 * m - 1.0) - head_sum - qlast * prefix_chain
    return bc


def exhaustive_ordered(
    pv: ProbabilityVector, procedure: str, s_rule: str = "optimal"
) -> PlanResult:
    """Brute-force minimum over all 2^(N-1) ordered partitions.

    Verification oracle for dp_ordered; guarded at N <= 20. ``s_rule``
    must match the rule used by the DP being checked.
    """
    n = pv.n
    if n > MAX_EXHAUSTIVE_ORDERED:
        raise InstanceTooLargeError(n, MAX_EXHAUSTIVE_ORDERED, "ordered-partition enumeration")
    if s_rule not in STERRETT_RULES:
        raise ValueError(f"unknown Sterrett block rule {s_rule!r}")
    sorted_pv, perm = sort_ascending(pv)
    bc = _block_cost_table(sorted_pv.q, procedure, s_rule)
    best = math.inf
    best_mask = 0
    for mask in range(1 << (n - 1)):
        total = 0.0
        start = 0
        for t in range(n - 1):
            if mask & (1 << t):
                total += bc[start][t + 1]
                start = t + 1
        total += bc[start][n]
        if total < best:
            best = total
            best_mask = mask
    sizes: list[int] = []
    start = 0
    for t in range(n - 1):
        if best_mask & (1 << t):
            sizes.append(t + 1 - start)
            start = t + 1
    sizes.append(n - start)
    plan = OrderedPartition(sizes=tuple(sizes))
    report = evaluate_plan(plan, pv, procedure, arrange="optimal", s_rule=s_rule)
    return PlanResult(plan=plan, report=report, search="exhaustive-ordered", permutation=perm)


def iter_set_partitions(n: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """All set partitions of {0..n-1} in restricted-growth-string order.

    Each partition is yielded as a tuple of blocks; block labels appear in
    first-occurrence order, so blocks are sorted by their smallest member.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = [0] * n
    while True:
        nblocks = max(a) + 1
        blocks: list[list[int]] = [[] for _ in range(nblocks)]
        for idx, label in enumerate(a):
            blocks[label].append(idx)
        yield tuple(tuple(b) for b in blocks)
        # odometer step: rightmost position that may grow by one
        for i in range(n - 1, 0, -1):
            if a[i] <= max(a[:i]):
                a[i] += 1
                for j in range(i + 1, n):
                    a[j] = 0
                break
        else:
            return


def exhaustive_set(pv: ProbabilityVector, procedure: str) -> PlanResult:
    """Global minimum over ALL set partitions, each block arranged optimally.

    This is the unordered-plan oracle; guarded at N <= 13 (Bell(13) is
    about 2.8e7). Ties keep the first partition in enumeration order, i.e.
    the lexicographically smallest restricted growth string.
    """
    n = pv.n
    if n > MAX_EXHAUSTIVE_SET:
        raise InstanceTooLargeError(n, MAX_EXHAUSTIVE_SET, "set-partition enumeration")
    qs = pv.q
    best = math.inf
    best_blocks: tuple[tuple[int, ...], ...] | None = None
    for blocks in iter_set_partitions(n):
        total = 0.0
        for b in blocks:
            v = sorted((qs[i] for i in b), reverse=True)
            total += _arranged_block_cost_q(v, procedure)
        if total < best:
            best = total
            best_blocks = blocks
    assert best_blocks is not None
    plan = SetPartition(blocks=best_blocks)
    report = evaluate_plan(plan, pv, procedure, arrange="optimal")
    return PlanResult(plan=plan, report=report, search="exhaustive-set")


def count_partitions(n: int) -> tuple[int, int]:
    """(Bell number B(n), number of ordered partitions 2^(n-1)).

    Exact integer arithmetic via the Bell triangle.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[-1], 1 << (n - 1)


def pair_interchange_costs(
    q1: float, q2: float, q3: float, q4: float, procedure: str = "S"
) -> tuple[float, float]:
    """Costs of the two pairings of a descending quadruple q1 >= q2 >= q3 >= q4.

    Returns (cost of {q1,q2} u {q3,q4}, cost of {q1,q3} u {q2,q4}), each pair
    arranged with the larger q first. Swapping the middle values can never
    increase the total, so the second entry is always <= the first.
    """
    if procedure not in ("Dp", "S"):
        raise ValueError("interchange comparison applies to procedures Dp and S")
    if not (q1 >= q2 >= q3 >= q4):
        raise NotSortedError(f"expected q1 >= q2 >= q3 >= q4, got {(q1, q2, q3, q4)}")
    for q in (q1, q2, q3, q4):
        if not (0.0 < q < 1.0):
            raise ValueError(f"q values must lie strictly inside (0, 1), got {q}")

    def pair(a: float, b: float) -> float:
        # two-item cost, identical for Dp and S
        return 3.0 - a - a * b

    ordered = pair(q1, q2) + pair(q3, q4)
    swapped = pair(q1, q3) + pair(q2, q4)
    return ordered, swapped
