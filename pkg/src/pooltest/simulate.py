"""Execution-level validation: run the actual testing protocols on defect
vectors and estimate expected test counts.

The protocol executors operate on one group at a time. ``defects`` is
position-aligned with the group's test order (entry t belongs to the item
at position t), and a pool is positive iff it contains a defective item.
Tests are error-free, so every run classifies all items correctly; the
interesting output is how many tests it took.

The primary validator is ``exact_expected_tests``: it enumerates all 2^k
defect vectors of a group and weights each trace by its probability, which
must reproduce the closed forms without any sampling noise. Monte Carlo
(``estimate_cost``) is for whole plans and larger groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cost import arranged_cost, resolve_plan
from .model import (
    Group,
    OrderedPartition,
    ProbabilityVector,
    SetPartition,
    SimulationSummary,
)


@dataclass(frozen=True)
class RngSpec:
    """Deterministic stream addressing: replicate r of a run with base
    ``seed`` draws from the child stream (seed, r)."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.stream < 0:
            raise ValueError("stream index must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ProtocolTrace:
    """Outcome of running one protocol on one group.

    ``classifications`` is position-aligned with the group (True means
    defective). ``inferred_without_test`` holds positions classified
    defective by deduction, without an individual test of their own.
    ``tested_individually`` holds positions that received their own test.
    """

    tests_performed: int
    classifications: tuple[bool, ...]
    inferred_without_test: frozenset[int]
    tested_individually: frozenset[int]

    def __post_init__(self):
        if self.tests_performed < 1:
            raise ValueError("a nonempty group always costs at least one test")
        if self.inferred_without_test & self.tested_individually:
            raise ValueError("an item cannot be both tested individually and inferred")


def _as_bools(defects) -> tuple[bool, ...]:
    return tuple(bool(d) for d in defects)


def run_dorfman(group: Group, defects) -> ProtocolTrace:
    """Dorfman: pool test, then every member individually if positive."""
    d = _as_bools(defects)
    k = group.size
    if len(d) != k:
        raise ValueError(f"defect vector length {len(d)} does not match group size {k}")
    if k == 1:
        return ProtocolTrace(1, d, frozenset(), frozenset({0}))
    if not any(d):
        return ProtocolTrace(1, d, frozenset(), frozenset())
    return ProtocolTrace(1 + k, d, frozenset(), frozenset(range(k)))


def run_dorfman_modified(group: Group, defects) -> ProtocolTrace:
    """Dorfman with the inference rule: when the pool is positive and the
    first k-1 members all test negative, the last member must be defective
    and is not tested."""
    d = _as_bools(defects)
    k = group.size
    if len(d) != k:
        raise ValueError(f"defect vector length {len(d)} does not match group size {k}")
    if k == 1:
        return ProtocolTrace(1, d, frozenset(), frozenset({0}))
    if not any(d):
        return ProtocolTrace(1, d, frozenset(), frozenset())
    if not any(d[: k - 1]):
        # all leading items negative: last item inferred defective
        return ProtocolTrace(k, d, frozenset({k - 1}), frozenset(range(k - 1)))
    return ProtocolTrace(1 + k, d, frozenset(), frozenset(range(k)))


def run_sterrett(group: Group, defects) -> ProtocolTrace:
    """Sterrett: pool test; if positive, test members one by one until the
    first defective, then restart the whole procedure on the untested rest.

    A remaining window of size one is a plain individual test. When every
    member of a window except the last tests negative, the last is inferred
    defective without a test. Implemented iteratively over a start pointer
    so deep groups cannot overflow the call stack.
    """
    d = _as_bools(defects)
    k = group.size
    if len(d) != k:
        raise ValueError(f"defect vector length {len(d)} does not match group size {k}")
    tests = 0
    tested: set[int] = set()
    inferred: set[int] = set()
    start = 0
    while start < k:
        size = k - start
        if size == 1:
            tests += 1
            tested.add(start)
            break
        tests += 1  # pool test on positions start..k-1
        if not any(d[start:]):
            break
        j = start
        found = False
        while j < k - 1:
            tests += 1
            tested.add(j)
            if d[j]:
                found = True
                break
            j += 1
        if found:
            start = j + 1
        else:
            # positions start..k-2 all negative, last one inferred defective
            inferred.add(k - 1)
            break
    return ProtocolTrace(tests, d, frozenset(inferred), frozenset(tested))


PROTOCOLS = {"D": run_dorfman, "Dp": run_dorfman_modified, "S": run_sterrett}


def exact_expected_tests(group: Group, pv: ProbabilityVector, procedure: str) -> float:
    """Probability-weighted test count over all 2^k defect vectors.

    Exhaustive-outcome oracle for the closed forms; no sampling involved.
    """
    run = PROTOCOLS[procedure]
    probs = [pv.probs[i] for i in group.items]
    k = len(probs)
    total = 0.0
    for mask in range(1 << k):
        d = tuple(bool(mask >> t & 1) for t in range(k))
        w = math.prod(p if x else 1.0 - p for p, x in zip(probs, d))
        total += w * run(group, d).tests_performed
    return total


def estimate_cost(
    plan: OrderedPartition | SetPartition,
    pv: ProbabilityVector,
    procedure: str,
    m: int,
    rng: RngSpec,
    arrange: str = "optimal",
) -> SimulationSummary:
    """Monte Carlo estimate of a plan's expected total tests.

    Each of the ``m`` replicates draws an independent defect vector (item i
    defective with probability p_i) from its own child stream of
    ``rng.seed`` and runs the protocol on every block. The standard error
    is the sample standard deviation over replicates divided by sqrt(m).
    """
    if m < 2:
        raise ValueError("at least two replicates are required")
    run = PROTOCOLS[procedure]
    groups = resolve_plan(plan, pv)
    if arrange == "optimal":
        groups = [arranged_cost(g, pv, procedure)[0] for g in groups]
    elif arrange != "given":
        raise ValueError(f"arrange must be 'optimal' or 'given', got {arrange!r}")
    p = np.asarray(pv.probs)
    block_items = [list(g.items) for g in groups]
    children = np.random.SeedSequence(entropy=rng.seed).spawn(m)
    totals = np.empty(m)
    for r in range(m):
        gen = np.random.Generator(np.random.PCG64(children[r]))
        defective = gen.random(pv.n) < p
        tests = 0
        for g, items in zip(groups, block_items):
            tests += run(g, defective[items]).tests_performed
        totals[r] = tests
    mean = float(totals.mean())
    sd = float(totals.std(ddof=1))
    return SimulationSummary(
        procedure=procedure,
        plan=plan,
        replicates=m,
        mean_tests=mean,
        std_error=sd / math.sqrt(m),
        seed=rng.seed,
    )


def beta_one_quantile(u: float, beta: float) -> float:
    """Inverse CDF of the Beta(1, beta) distribution: 1 - (1-u)^(1/beta)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return 1.0 - (1.0 - u) ** (1.0 / beta)


def sample_beta_one(beta: float, rng: np.random.Generator) -> float:
    """One Beta(1, beta) draw strictly inside (0, 1) by inverse transform.

    Draws landing exactly on 0 or 1 at floating-point boundaries are
    rejected and redrawn.
    """
    while True:
        x = beta_one_quantile(rng.random(), beta)
        if 0.0 < x < 1.0:
            return x
