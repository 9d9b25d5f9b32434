"""Services package - the math engine behind the curvature realizer.

This package contains service modules for each stage of a realization:
- jetcalc: exact truncated polynomial (jet) arithmetic
- tensor_algebra: curvature operators, Ricci splitting, classification
- frame_normalizer: metric normal form and orthonormal frames
- norms: sampled weighted norms for report diagnostics
- realizer: Christoffel fields, curvature and the correction loop
- verifier: exact checks and the finite-difference oracle
- codec: JSON documents for jets, tensors, metrics and fields
"""

from .codec import (
    christoffel_to_document,
    document_to_christoffel,
    document_to_metric,
    entries_to_operator,
    operator_to_entries,
    validate_christoffel,
    validate_model,
)
from .frame_normalizer import (
    FrameField,
    MetricField,
    constant_metric,
    inverse_metric,
    orthonormal_frame,
    quadratic_normalize,
    random_metric,
    validate_normal_form,
)
from .jetcalc import Jet
from .realizer import (
    ChristoffelField,
    CurvatureField,
    curvature_L,
    curvature_of,
    initial_gamma,
    realize,
    solve_correction,
    star,
    theta,
)
from .tensor_algebra import (
    AlgebraicCurvatureOperator,
    BilinearForm,
    InnerProduct,
    classify,
    project_to_aco,
    random_aco,
)
from .verifier import (
    check_constant_scalar_curvature,
    check_realization_at_origin,
    check_ricci_antisymmetric_part,
    check_ricci_symmetric_part,
    finite_difference_oracle,
    verify_realization,
    weighted_norm_sample,
)

__all__ = [
    # Jets
    "Jet",
    # Tensors
    "AlgebraicCurvatureOperator",
    "BilinearForm",
    "InnerProduct",
    "classify",
    "project_to_aco",
    "random_aco",
    # Metrics and frames
    "FrameField",
    "MetricField",
    "constant_metric",
    "inverse_metric",
    "orthonormal_frame",
    "quadratic_normalize",
    "random_metric",
    "validate_normal_form",
    # Realization
    "ChristoffelField",
    "CurvatureField",
    "curvature_L",
    "curvature_of",
    "initial_gamma",
    "realize",
    "solve_correction",
    "star",
    "theta",
    # Verification
    "check_constant_scalar_curvature",
    "check_realization_at_origin",
    "check_ricci_antisymmetric_part",
    "check_ricci_symmetric_part",
    "finite_difference_oracle",
    "verify_realization",
    "weighted_norm_sample",
    # Documents
    "christoffel_to_document",
    "document_to_christoffel",
    "document_to_metric",
    "entries_to_operator",
    "operator_to_entries",
    "validate_christoffel",
    "validate_model",
]
