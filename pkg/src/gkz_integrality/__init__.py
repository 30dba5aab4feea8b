"""p-integrality of A-hypergeometric series - weights, lattice cosets, certificates."""

from gkz_integrality.arith import (
    BoxedRational,
    PAdicRational,
    alpha_p,
    beta_p,
    ord_p,
    phi_h,
    psi_h,
    weight_w_p,
    wt_p,
)
from gkz_integrality.classical import (
    ClassicalSpec,
    F_coefficient,
    build_configuration,
    cor57_check,
    factorial_ratio_spec,
    thm56_check,
    xi_eval,
    xi_minimum,
)
from gkz_integrality.cone import facet_description, rel_interior_test, smallest_face
from gkz_integrality.constants import TOOL_VERSION
from gkz_integrality.eisenstein import (
    AlgebraicSeries,
    denominator_constant,
    reduce_constant,
    tail_normalize,
)
from gkz_integrality.exceptions import (
    ConsistencyError,
    InfeasibleError,
    IntegralityError,
    InvalidInputError,
    PrefixError,
    ResourceGuardError,
)
from gkz_integrality.geometry import (
    check_criterion_49,
    check_thm63,
    coset_min_weight,
    lower_bound_thm46,
    uniqueness_prop516,
    w_delta,
)
from gkz_integrality.lattice import (
    Configuration,
    enumerate_Lv,
    group_ZA,
    kernel_basis,
    minimal_negative_support_check,
    nsupp,
)
from gkz_integrality.series import (
    Certificate,
    SearchParams,
    analyze,
    coefficient,
    residue_transfer,
    unbounded_family,
    valuation_by_formula,
)

__version__ = TOOL_VERSION

__all__ = [
    "Configuration",
    "Certificate",
    "SearchParams",
    "ClassicalSpec",
    "AlgebraicSeries",
    # Errors
    "IntegralityError",
    "InvalidInputError",
    "InfeasibleError",
    "ResourceGuardError",
    "ConsistencyError",
    "PrefixError",
    # Digit arithmetic
    "wt_p",
    "alpha_p",
    "beta_p",
    "ord_p",
    "phi_h",
    "psi_h",
    "weight_w_p",
    "PAdicRational",
    "BoxedRational",
    # Lattice
    "kernel_basis",
    "group_ZA",
    "nsupp",
    "enumerate_Lv",
    "minimal_negative_support_check",
    # Cone geometry
    "facet_description",
    "smallest_face",
    "rel_interior_test",
    "w_delta",
    "coset_min_weight",
    "lower_bound_thm46",
    "check_criterion_49",
    "check_thm63",
    "uniqueness_prop516",
    # Series
    "coefficient",
    "valuation_by_formula",
    "analyze",
    "unbounded_family",
    "residue_transfer",
    # Classical series
    "build_configuration",
    "F_coefficient",
    "xi_eval",
    "xi_minimum",
    "thm56_check",
    "cor57_check",
    "factorial_ratio_spec",
    # Algebraic series
    "tail_normalize",
    "denominator_constant",
    "reduce_constant",
]
