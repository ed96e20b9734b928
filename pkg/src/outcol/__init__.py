"""Out-colourings and degree-constrained 2-partitions of digraphs.

The package splits along what the objects are rather than how they are
computed: `digraph` holds the bitmask core and verifiers, `catalog` the
named digraphs and derived exception classes, `outcolour` the
semicomplete and 2-out-regular solvers with their certificates,
`kpartition` the randomized degree-constrained partition loops,
`reductions` the hardness gadgets, and `oracle` the exhaustive ground
truth everything else is tested against. The most commonly combined
names are re-exported here; the heavier modules (`cli`, `report`) are
imported explicitly by the callers that want them.
"""

from outcol.catalog import (
    BadParameter,
    build,
    canonical_form,
    derive_exceptions_delta2,
    derive_unbalanceable6,
    is_isomorphic,
    paley,
    shipped_exceptions_delta2,
    shipped_unbalanceable6,
)
from outcol.digraph import (
    Classification,
    Colouring,
    Digraph,
    TwoPartition,
    classify,
    cycle_through,
    from_text,
    in_dominating,
    strong_components,
    terminal_components,
    to_text,
    verify_kpartition,
    verify_out_colouring,
)
from outcol.kpartition import (
    PartitionConfig,
    chernoff_failure_bound,
    degree_threshold,
    discrepancy_exhaustive,
    paley_spectrum,
    partition_k,
    partition_k_inout,
    partition_r,
)
from outcol.outcolour import (
    SolveOutcome,
    rebalance,
    solve_2outregular,
    solve_semicomplete,
    three_out_colouring,
    validate_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "BadParameter",
    "Classification",
    "Colouring",
    "Digraph",
    "PartitionConfig",
    "SolveOutcome",
    "TwoPartition",
    "build",
    "canonical_form",
    "chernoff_failure_bound",
    "classify",
    "cycle_through",
    "degree_threshold",
    "derive_exceptions_delta2",
    "derive_unbalanceable6",
    "discrepancy_exhaustive",
    "from_text",
    "in_dominating",
    "is_isomorphic",
    "paley",
    "paley_spectrum",
    "partition_k",
    "partition_k_inout",
    "partition_r",
    "rebalance",
    "shipped_exceptions_delta2",
    "shipped_unbalanceable6",
    "solve_2outregular",
    "solve_semicomplete",
    "strong_components",
    "terminal_components",
    "three_out_colouring",
    "to_text",
    "validate_certificate",
    "verify_kpartition",
    "verify_out_colouring",
    "__version__",
]
