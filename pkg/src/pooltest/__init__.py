"""Pooled (group) testing plan design for populations with heterogeneous,
known defect probabilities: exact expected-cost formulas and optimal
within-group orderings for the Dorfman, modified Dorfman, and Sterrett
procedures, a dynamic program over ordered partitions, exhaustive
small-instance oracles, protocol-level Monte Carlo validation, and
information-theoretic lower bounds."""

from .bounds import (
    BoundReport,
    all_above_ungar,
    check_bounds,
    entropy_bits,
    huffman_length,
    outcome_distribution,
    ungar_threshold,
)
from .cost import (
    ArrangedGroup,
    arrange_for_modified_dorfman,
    arrange_for_sterrett,
    arranged_cost,
    cost_dorfman,
    cost_dorfman_modified,
    cost_sterrett,
    cost_sterrett_equal_prob,
    cost_sterrett_recursive,
    evaluate_plan,
    group_cost,
    resolve_plan,
    sterrett_smallest_last_order,
)
from .model import (
    PROCEDURES,
    BlockCost,
    CostReport,
    EmptyInputError,
    Group,
    InstanceTooLargeError,
    NotSortedError,
    OrderedPartition,
    OutOfRangeError,
    ProbabilityVector,
    SetPartition,
    SimulationSummary,
    UnknownFormatError,
    plan_from_json,
    sort_ascending,
    validate_probability_vector,
)
from .optimize import (
    DpTable,
    PlanResult,
    count_partitions,
    dp_ordered,
    dp_table,
    exhaustive_ordered,
    exhaustive_set,
    iter_set_partitions,
    pair_interchange_costs,
)
from .simulate import (
    ProtocolTrace,
    RngSpec,
    beta_one_quantile,
    estimate_cost,
    exact_expected_tests,
    run_dorfman,
    run_dorfman_modified,
    run_sterrett,
    sample_beta_one,
)
from .study import StudyConfig, StudyRow, emit_table, run_study

__version__ = "0.1.0"
