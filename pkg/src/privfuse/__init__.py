"""Exact rational majorization, source-element fusion, resource protocols and noninterference."""

from .errors import (
    InconsistentSet, InvalidSource, NotMajorized, PrivfuseError, ScenarioError,
)
from .lattice import (
    ConsistencyPartition, MergedPreference, common_ordering, consistency_classes,
    find_cycle, fold_fusion, format_cycle, fusion, impose_consistency, is_consistent,
    join, join_ordered, join_sorted, meet, meet_ordered, meet_sorted, merged_preference,
)
from .majorization import (
    ConvexDecomposition, birkhoff_decompose, dilate_to_doubly_stochastic, is_majorized,
    partial_permutation_decomposition, substochastic_witness, verify_witness,
)
from .matrix import Matrix
from .noninterference import (
    ActionAlphabet, SharedMachine, counter_machine, deterministic_ni_forms, elevator,
    ni_bruteforce, ni_enumerate, ni_product,
)
from .protocol import (
    Casting, ComposeStep, FuseStep, IncludeStep, ProtocolScript, ResourceNetwork, RPStep,
    local_privacy_check, rp_run, run_scenario, strong_privacy_check,
)
from .resources import (
    PartialMap, Resource, bsc, compose, compose_chain, from_table, identity_resource,
    resource_fusion, resource_leq, resource_meet,
)
from .scenario import Scenario, bundled_fixtures, loads, parse_scenario
from .weights import (
    Ordering, SourceElement, canonical_ordering, descending, differential, integral,
    make_source,
)

__version__ = "0.1.0"
