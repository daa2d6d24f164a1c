"""Exact expected-cost evaluators for the three pooling procedures.

For a group of size k with good-probabilities q_1..q_k in test order:

  Dorfman (D)            E = 1 + (k - k * q_1...q_k)                for k >= 2
  modified Dorfman (Dp)  E = E_D - (q_1...q_{k-1}) * (1 - q_k)      for k >= 2
  Sterrett (S)           E = (2k - 1) - [ (q_1 + ... + q_{k-1})
                              + q_{k-1} q_k + q_{k-2} q_{k-1} q_k
                              + ... + q_1 q_2 ... q_k ]             for k >= 2

A single-item group costs exactly one test under every procedure.

D is order-invariant. Dp is minimized by putting the smallest q last.
For S, the cost depends on the order in a less obvious way: the value in
the FIRST position never appears in the cost except through the constant
sum and full product, so it only absorbs one value from the pool, and the
middle positions are best sorted ascending (an adjacent swap changes one
suffix product, which grows when the larger value sits later). What
remains is the choice of the last value, which trades its exclusion from
the head sum against its weight on the suffix chain; no closed-form rule
picks it, so the minimizer enumerates the k possible last values. The
often-quoted simpler rule "ascending head, smallest q last" agrees with
this optimum for k <= 3 but is strictly beaten for most groups of four or
more; it is kept available in the optimizer for reproducing published
comparison tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (
    BlockCost,
    CostReport,
    Group,
    OrderedPartition,
    ProbabilityVector,
    SetPartition,
    sort_ascending,
)

ARRANGE_RULES = ("as-given", "optimal-Dp", "optimal-S")


@dataclass(frozen=True)
class ArrangedGroup:
    """A group whose test order has been fixed by one of the arrangement rules."""

    group: Group
    rule: str

    def __post_init__(self):
        if self.rule not in ARRANGE_RULES:
            raise ValueError(f"unknown arrangement rule {self.rule!r}")


# ---------------------------------------------------------------------------
# closed forms on a q-sequence (test order = sequence order)
# ---------------------------------------------------------------------------


def _canonical_prod(values) -> float:
    # multiply in sorted order so mathematically tied orders of the same
    # multiset produce bit-identical results
    return math.prod(sorted(values))


def _cost_dorfman_q(q: tuple[float, ...]) -> float:
    k = len(q)
    if k == 1:
        return 1.0
    return 1.0 + k - k * _canonical_prod(q)


def _cost_modified_dorfman_q(q: tuple[float, ...]) -> float:
    k = len(q)
    if k == 1:
        return 1.0
    prod_head = _canonical_prod(q[:-1])
    return 1.0 + k - k * prod_head * q[-1] - prod_head * (1.0 - q[-1])


def _cost_sterrett_q(q: tuple[float, ...]) -> float:
    # Single right-to-left pass: the suffix-product chain is accumulated
    # Horner-style so each product is reused, O(k) total.
    k = len(q)
    if k == 1:
        return 1.0
    head = sum(q[: k - 1])
    suffix = q[-1]
    chain = 0.0
    for i in range(k - 2, -1, -1):
        suffix *= q[i]
        chain += suffix
    return (2.0 * k - 1.0) - head - chain


def cost_dorfman(group: Group, pv: ProbabilityVector) -> float:
    """Expected tests under Dorfman pooling; invariant to the group order."""
    return _cost_dorfman_q(group.qs(pv))


def cost_dorfman_modified(group: Group, pv: ProbabilityVector) -> float:
    """Expected tests under modified Dorfman; the LAST item is the one whose
    individual test may be skipped, so order matters."""
    return _cost_modified_dorfman_q(group.qs(pv))


def cost_sterrett(group: Group, pv: ProbabilityVector) -> float:
    """Expected tests under the Sterrett procedure for the given test order."""
    return _cost_sterrett_q(group.qs(pv))


def cost_sterrett_recursive(group: Group, pv: ProbabilityVector) -> float:
    """Independent Sterrett oracle via the first-defective-position recursion.

    Conditioning on the position j of the first defective item:

      no defective      contributes  q_1...q_k * 1
      first at k        contributes  q_1...q_{k-1} (1-q_k) * k
      first at k-1      contributes  q_1...q_{k-2} (1-q_{k-1}) * (k+1)
      first at j<=k-2   contributes  q_1...q_{j-1} (1-q_j) * (1 + j + E(j+1:k))

    where E(j+1:k) is the cost of a fresh run on the untested suffix.
    Evaluated bottom-up over suffixes; shares no code with cost_sterrett.
    """
    q = group.qs(pv)
    k = len(q)
    # e[i] = expected tests of a fresh run on items i..k-1; e[k] unused
    e = [0.0] * (k + 1)
    for i in range(k - 1, -1, -1):
        m = k - i
        if m == 1:
            e[i] = 1.0
            continue
        total = math.prod(q[i:])
        prefix = 1.0
        for j in range(1, m + 1):  # j = 1-based position within the suffix
            term = prefix * (1.0 - q[i + j - 1])
            if j == m:
                total += term * m
            elif j == m - 1:
                total += term * (m + 1)
            else:
                total += term * (1 + j + e[i + j])
            prefix *= q[i + j - 1]
        e[i] = total
    return e[0]


def cost_sterrett_equal_prob(k: int, q: float) -> float:
    """Sterrett cost for a group of k items sharing the same q.

    Closed form 2k - (k-2) q - (1 - q^(k+1)) / (1 - q); returns exactly 1
    for k = 1, matching the single-test convention of the other evaluators.
    """
    if k < 1:
        raise ValueError("group size must be >= 1")
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must lie strictly inside (0, 1), got {q}")
    if k == 1:
        return 1.0
    return 2.0 * k - (k - 2) * q - (1.0 - q ** (k + 1)) / (1.0 - q)


# ---------------------------------------------------------------------------
# optimal within-group arrangements
# ---------------------------------------------------------------------------


def _sorted_desc_q(group: Group, pv: ProbabilityVector) -> list[int]:
    group.check_against(pv)
    # descending q, ties broken by original index ascending
    return sorted(group.items, key=lambda i: (-(1.0 - pv.probs[i]), i))


def sterrett_smallest_last_order(group: Group, pv: ProbabilityVector) -> Group:
    """The simple rule: positions 1..k-1 ascending by q, smallest q last.

    Minimizes the Sterrett cost for k <= 3 only; for larger groups
    arrange_for_sterrett finds strictly cheaper orders on most inputs.
    Published comparison tables are built on this rule, so the optimizer
    can be switched to it for reproduction runs.
    """
    v = _sorted_desc_q(group, pv)
    k = len(v)
    if k <= 1:
        return Group(items=tuple(v))
    return Group(items=tuple(reversed(v[: k - 1])) + (v[k - 1],))


def arrange_for_sterrett(group: Group, pv: ProbabilityVector) -> ArrangedGroup:
    """Reorder a group to minimize the Sterrett cost over all k! orders.

    The first position's value only absorbs one member (it never enters
    the cost except through order-invariant terms), and between the first
    and last positions the values must ascend. That leaves k candidate
    orders, one per choice of last value; each candidate places the
    smallest remaining value first and the rest ascending in between. The
    candidates are costed directly and the cheapest kept, ties going to
    the smaller last value (then to the lower item index, via the sort).
    """
    group.check_against(pv)
    asc = sorted(group.items, key=lambda i: (1.0 - pv.probs[i], i))  # ascending q
    k = len(asc)
    if k == 1:
        return ArrangedGroup(group=Group(items=tuple(asc)), rule="optimal-S")
    qs = {i: 1.0 - pv.probs[i] for i in asc}
    best_order: tuple[int, ...] | None = None
    best_cost = math.inf
    for b in range(k):
        rest = asc[:b] + asc[b + 1 :]
        order = (rest[0], *rest[1:], asc[b])
        c = _cost_sterrett_q(tuple(qs[i] for i in order))
        if c < best_cost:
            best_cost = c
            best_order = order
    assert best_order is not None
    return ArrangedGroup(group=Group(items=best_order), rule="optimal-S")


def arrange_for_modified_dorfman(group: Group, pv: ProbabilityVector) -> ArrangedGroup:
    """Reorder a group to minimize the modified-Dorfman cost.

    Only the last position matters: it must hold the smallest q. The other
    positions are fixed to descending q (ties by index) for deterministic
    reports.
    """
    v = _sorted_desc_q(group, pv)
    return ArrangedGroup(group=Group(items=tuple(v)), rule="optimal-Dp")


def arranged_cost(
    group: Group, pv: ProbabilityVector, procedure: str, s_rule: str = "optimal"
) -> tuple[Group, float]:
    """The arranged group and its cost under ``procedure``.

    ``s_rule`` picks the Sterrett arrangement: "optimal" (the true minimum)
    or "smallest-last" (the simple published rule); D and Dp ignore it.
    """
    if procedure == "D":
        return group, cost_dorfman(group, pv)
    if procedure == "Dp":
        g = arrange_for_modified_dorfman(group, pv).group
        return g, cost_dorfman_modified(g, pv)
    if procedure == "S":
        if s_rule == "smallest-last":
            g = sterrett_smallest_last_order(group, pv)
        elif s_rule == "optimal":
            g = arrange_for_sterrett(group, pv).group
        else:
            raise ValueError(f"unknown Sterrett rule {s_rule!r}")
        return g, cost_sterrett(g, pv)
    raise ValueError(f"unknown procedure {procedure!r}")


def group_cost(group: Group, pv: ProbabilityVector, procedure: str) -> float:
    """Cost of a group exactly as ordered, under ``procedure``."""
    if procedure == "D":
        return cost_dorfman(group, pv)
    if procedure == "Dp":
        return cost_dorfman_modified(group, pv)
    if procedure == "S":
        return cost_sterrett(group, pv)
    raise ValueError(f"unknown procedure {procedure!r}")


# ---------------------------------------------------------------------------
# plan evaluation
# ---------------------------------------------------------------------------


def resolve_plan(
    plan: OrderedPartition | SetPartition, pv: ProbabilityVector
) -> list[Group]:
    """Turn a plan into concrete groups over original item indices.

    Ordered partitions slice the population sorted ascending by p, so each
    resulting group lists its members in ascending-p (descending-q) order.
    Set-partition blocks keep the order in which they were written.
    """
    if isinstance(plan, OrderedPartition):
        if plan.n != pv.n:
            raise ValueError(f"partition sizes sum to {plan.n}, population has {pv.n} items")
        _, perm = sort_ascending(pv)
        groups = []
        pos = 0
        for size in plan.sizes:
            groups.append(Group(items=tuple(perm[pos : pos + size])))
            pos += size
        return groups
    if isinstance(plan, SetPartition):
        plan.check_cover(pv.n)
        return [Group(items=b) for b in plan.blocks]
    raise TypeError(f"unsupported plan type {type(plan).__name__}")


def evaluate_plan(
    plan: OrderedPartition | SetPartition,
    pv: ProbabilityVector,
    procedure: str,
    arrange: str = "optimal",
    s_rule: str = "optimal",
) -> CostReport:
    """Cost report for a plan: per-block arranged orders and expected tests.

    ``arrange`` is "optimal" (rearrange each block for the procedure) or
    "given" (cost the blocks exactly as ordered). ``s_rule`` selects the
    Sterrett arrangement variant when rearranging.
    """
    if arrange not in ("optimal", "given"):
        raise ValueError(f"arrange must be 'optimal' or 'given', got {arrange!r}")
    blocks = []
    total = 0.0
    for g in resolve_plan(plan, pv):
        if arrange == "optimal":
            ordered, cost = arranged_cost(g, pv, procedure, s_rule)
        else:
            ordered, cost = g, group_cost(g, pv, procedure)
        blocks.append(BlockCost(items=g.items, order=ordered.items, expected_tests=cost))
        total += cost
    return CostReport(procedure=procedure, per_block=tuple(blocks), total=total)
