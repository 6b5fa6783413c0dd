"""Sparsification and non-redundancy for non-linear binary codes and CSPs."""

from __future__ import annotations

__version__ = "0.1.0"

from ._budget import (
    Budget,
    BudgetExceeded,
    InvalidInput,
    SolverError,
    SparsicodeError,
    VerificationFailure,
)
from .code import (
    BinaryCode,
    Chain,
    NonRedundancyWitness,
    chain_length_exact,
    cut_code,
    identity_code,
    linear_code,
    low_weight_support,
    minimal_hitting_set,
    nrd_exact,
    nrd_value,
    or_closure,
    puncture,
    random_code,
    shattered_set,
    staircase_chain,
    staircase_code,
    vc_dimension,
)
from .csp import (
    CspInstance,
    GroupCode,
    Predicate,
    complement,
    csp_chain_length,
    csp_nrd,
    gadget_conjoin,
    gadget_disjoin,
    gadget_project,
    gadget_restrict,
    group_code,
    is_conditionally_nonredundant,
    kernelize,
    parse_predicate_name,
    predicate_catalog,
    satisfiability_code,
)
from .ensemble import (
    Ensemble,
    construct_3lin,
    degeneracy_check,
    ensemble_to_instance,
    instance_to_ensemble,
    polynomial_bound,
    triple_count_check,
    verify_ensemble,
)
from .entropy import (
    CodeDistribution,
    CoordinateDistribution,
    binary_entropy,
    check_sawin_bound,
    decompose,
    solve_cover_or_sparse,
    sparse_removal,
)
from .sparsify import (
    SparsifyReport,
    WeightMap,
    chain_adversarial_weights,
    entropy_sparsifier,
    simple_sparsifier,
    verify_sparsifier,
    weighted_sparsifier,
)

__all__ = sorted(
    name
    for name, value in list(globals().items())
    if not name.startswith("_") and name != "annotations" and not isinstance(value, type(_budget))
)
