"""Polynomial quadrature rules on the triangle.

Generates cardinal quadrature rules (point count equal to dim P_d for a
chosen degree d) whose generalized Newton-Cotes weights integrate a much
larger polynomial space exactly, certifies rule strength against an
orthonormal basis with an independent monomial cross-check, classifies
triangle symmetry, and reads/writes the barycentric rule-file format.
"""

from .basis import (
    BasisEvaluation,
    BasisSpec,
    CollapsedVertexError,
    dim_poly,
    index_of,
    jacobi,
    jacobi_derivative,
    kd_eval,
    kd_gradient,
    kd_integral,
    multi_indices,
    rank_of,
    vandermonde,
)
from .domain import (
    BarycentricPoint,
    TrianglePoint,
    from_barycentric,
    gauss_quadrature,
    monomial_integral,
    to_barycentric,
    to_equilateral,
)
from .optimizer import (
    AllRestartsDegenerateError,
    OptimizeResult,
    OptimizerConfig,
    optimize,
    residual,
    residual_jacobian,
)
from .rule import (
    ASYMMETRIC,
    D3_SYMMETRIC,
    CertificationReport,
    OracleDisagreementError,
    QuadratureRule,
    certify,
    classify_symmetry,
    dof_bound,
    validate,
)
from .ruleio import Registry, RuleParseError, emit_rule, parse_points_xyw, parse_rule
from .svgplot import plot_rule
from .weights import (
    DegenerateConfigurationError,
    WeightSolution,
    newton_cotes_weights,
    weight_jacobian,
)

__version__ = "0.1.0"

__all__ = [
    "ASYMMETRIC",
    "AllRestartsDegenerateError",
    "BarycentricPoint",
    "BasisEvaluation",
    "BasisSpec",
    "CertificationReport",
    "CollapsedVertexError",
    "D3_SYMMETRIC",
    "DegenerateConfigurationError",
    "OptimizeResult",
    "OptimizerConfig",
    "OracleDisagreementError",
    "QuadratureRule",
    "Registry",
    "RuleParseError",
    "TrianglePoint",
    "WeightSolution",
    "certify",
    "classify_symmetry",
    "dim_poly",
    "dof_bound",
    "emit_rule",
    "from_barycentric",
    "gauss_quadrature",
    "index_of",
    "jacobi",
    "jacobi_derivative",
    "kd_eval",
    "kd_gradient",
    "kd_integral",
    "monomial_integral",
    "multi_indices",
    "newton_cotes_weights",
    "optimize",
    "parse_points_xyw",
    "parse_rule",
    "plot_rule",
    "rank_of",
    "residual",
    "residual_jacobian",
    "to_barycentric",
    "to_equilateral",
    "validate",
    "vandermonde",
    "weight_jacobian",
]
