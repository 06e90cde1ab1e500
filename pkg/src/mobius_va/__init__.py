"""Exact mode algebra for graded Moebius vertex algebras, with a numeric smearing lab."""

from .core import GradedSpace, InvariantViolation, SpaceMismatch, Vec, apply_sl2, inner, make_space
from .fields import (
    FieldTable,
    HeadroomExceeded,
    LocalityResult,
    UndefinedWeight,
    commutator_via_borcherds,
    covariance_check,
    derivative,
    locality_order,
    mode_apply,
    n_product,
    shifted_mode_apply,
)
from .models import GramDegenerate, ModelDescriptor, heisenberg, virasoro
from .reconstruct import (
    BudgetExhausted,
    InjectivityFailure,
    NotGenerating,
    SingularAtOrigin,
    VAStructure,
    axiom_suite,
    build_Y,
    dong_closure,
    l1_closure_check,
    state_of_field,
)
from .unitarity import (
    ThetaMap,
    conjugate_state,
    hermitian_check,
    hermitian_generating_criterion,
    invariant_form_check,
)

__all__ = [
    "apply_sl2",
    "axiom_suite",
    "BudgetExhausted",
    "build_Y",
    "commutator_via_borcherds",
    "conjugate_state",
    "covariance_check",
    "derivative",
    "dong_closure",
    "FieldTable",
    "GradedSpace",
    "GramDegenerate",
    "HeadroomExceeded",
    "heisenberg",
    "hermitian_check",
    "hermitian_generating_criterion",
    "InjectivityFailure",
    "inner",
    "invariant_form_check",
    "InvariantViolation",
    "l1_closure_check",
    "locality_order",
    "LocalityResult",
    "make_space",
    "mode_apply",
    "ModelDescriptor",
    "n_product",
    "NotGenerating",
    "shifted_mode_apply",
    "SingularAtOrigin",
    "SpaceMismatch",
    "state_of_field",
    "ThetaMap",
    "UndefinedWeight",
    "VAStructure",
    "Vec",
    "virasoro",
]

__version__ = "0.1.0"
