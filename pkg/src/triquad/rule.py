"""Quadrature rules, strength certification, and symmetry classification.

A rule's *strength* is the largest degree D such that it integrates every
polynomial of total degree <= D exactly (to tolerance).  Certification
measures the max-norm residual over the orthonormal basis functions,
degree shell by degree shell, and cross-checks the outcome against the
independent monomial oracle so a basis bug cannot silently certify.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from itertools import permutations

import numpy as np

from .basis import BasisSpec, dim_poly, vandermonde
from .domain import (
    INTERIOR_TOL,
    as_point_array,
    monomial_integral,
    points_inside,
    ref_to_bary,
    ref_to_unit,
)

D3_SYMMETRIC = "d3_symmetric"
ASYMMETRIC = "asymmetric"

#: Default max-norm residual for a degree shell to count as exact.
CERTIFY_TOL = 1e-12

#: Default point/weight matching tolerance for symmetry classification.
SYMMETRY_TOL = 1e-10

#: Upper bound on the strength search (also the monomial-oracle cap).
STRENGTH_CAP = 60


class OracleDisagreementError(RuntimeError):
    """Basis-residual strength and monomial-oracle strength differ.

    This indicates a defect in the basis evaluation, not a property of the
    rule under test.
    """


@dataclass(frozen=True)
class QuadratureRule:
    """An immutable point-and-weight set on the reference triangle.

    `cardinal_degree` is the degree d with N = dim P_d for rules of the
    cardinal type; imported foreign rules may have no such d (None).
    Weights follow the internal convention sum(w) = 2, the triangle area.
    """

    cardinal_degree: int | None
    points: np.ndarray
    weights: np.ndarray
    certified_strength: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = as_point_array(self.points)
        wts = np.asarray(self.weights, dtype=float).reshape(-1)
        if pts.shape[0] != wts.shape[0]:
            raise ValueError(
                f"{pts.shape[0]} points but {wts.shape[0]} weights"
            )
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)
        if self.cardinal_degree is not None and not self.is_cardinal:
            raise ValueError(
                f"{wts.shape[0]} points is not dim P_{self.cardinal_degree}"
            )
        if abs(wts.sum() - 2.0) > 1e-12:
            # foreign rules parsed at looser file tolerance may land here
            warnings.warn(
                f"weights sum to {float(wts.sum())!r}, expected 2 (constant "
                "not integrated exactly)",
                stacklevel=2,
            )

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def is_cardinal(self) -> bool:
        return (
            self.cardinal_degree is not None
            and self.n_points == dim_poly(self.cardinal_degree)
        )

    def with_certification(self, report: "CertificationReport") -> "QuadratureRule":
        meta = dict(self.metadata)
        meta.update(
            max_error=report.max_error,
            symmetry=report.symmetry,
            positive_weights=report.positive_weights,
            all_interior=report.all_interior,
        )
        return replace(self, certified_strength=report.strength, metadata=meta)


@dataclass(frozen=True)
class CertificationReport:
    """Outcome of a strength certification."""

    strength: int
    max_error: float
    per_degree_error: dict[int, float]
    positive_weights: bool
    all_interior: bool
    symmetry: str


def dof_bound(d: int) -> int:
    """Largest degree admissible by the counting argument dim P_{d+e} <= 3N."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    budget = 3 * dim_poly(d)
    t = d
    while dim_poly(t + 1) <= budget:
        t += 1
    return t


def _shell_errors(rule: QuadratureRule, degree: int) -> float:
    """Max-norm quadrature residual over the normalized basis shell m+n = degree."""
    spec = BasisSpec(degree)
    v = vandermonde(spec, rule.points).values
    lo = dim_poly(degree - 1)
    approx = v[:, lo:].T @ rule.weights
    exact = np.zeros(spec.dim - lo)
    if degree == 0:
        exact[0] = 2.0
    return float(np.max(np.abs(approx - exact)))


def _monomial_shell_error(rule: QuadratureRule, degree: int) -> float:
    """Max residual of unit-triangle monomials of exact total degree `degree`."""
    xy = ref_to_unit(rule.points)
    w_unit = rule.weights / 4.0  # reference area 2 -> unit area 1/2
    worst = 0.0
    for a in range(degree + 1):
        b = degree - a
        approx = float(w_unit @ (xy[:, 0] ** a * xy[:, 1] ** b))
        worst = max(worst, abs(approx - monomial_integral(a, b)))
    return worst


def certify(
    rule: QuadratureRule,
    tolerance: float = CERTIFY_TOL,
    strength_cap: int = STRENGTH_CAP,
) -> CertificationReport:
    """Certify the rule's strength against the orthonormal basis.

    Ascends degree by degree and stops at the first shell whose max-norm
    residual exceeds `tolerance`; the failing shell's error is kept in
    per_degree_error for diagnostics.  The resulting strength is
    cross-checked against the monomial oracle at the same tolerance and an
    OracleDisagreementError is raised on mismatch.
    """
    per_degree: dict[int, float] = {}
    strength = -1
    for t in range(strength_cap + 1):
        err = _shell_errors(rule, t)
        per_degree[t] = err
        if err > tolerance:
            break
        strength = t

    mono_strength = -1
    for t in range(strength_cap + 1):
        if _monomial_shell_error(rule, t) > tolerance:
            break
        mono_strength = t

    if mono_strength != strength:
        raise OracleDisagreementError(
            f"basis residuals certify strength {strength} but the monomial "
            f"oracle certifies {mono_strength}"
        )

    max_error = max(
        (e for t, e in per_degree.items() if t <= strength), default=0.0
    )
    return CertificationReport(
        strength=strength,
        max_error=max_error,
        per_degree_error=per_degree,
        positive_weights=bool(np.all(rule.weights > 0.0)),
        all_interior=bool(np.all(points_inside(rule.points))),
        symmetry=classify_symmetry(rule),
    )


def classify_symmetry(rule: QuadratureRule, tolerance: float = SYMMETRY_TOL) -> str:
    """D3 invariance check of the weighted point set.

    The six triangle symmetries act as permutations of the barycentric
    coordinates.  For each group element the transformed points must match
    the originals bijectively (greedy nearest-neighbor in reference
    coordinates) with matching weights.
    """
    bary = ref_to_bary(rule.points)
    ref = rule.points
    wts = rule.weights
    n = rule.n_points
    for perm in permutations(range(3)):
        transformed = 2.0 * bary[:, list(perm)][:, :2] - 1.0
        used = np.zeros(n, dtype=bool)
        for i in range(n):
            dist = np.max(np.abs(ref - transformed[i]), axis=1)
            j = int(np.argmin(dist))
            if dist[j] > tolerance or used[j] or abs(wts[i] - wts[j]) > tolerance:
                return ASYMMETRIC
            used[j] = True
    return D3_SYMMETRIC


def validate(rule: QuadratureRule) -> list[str]:
    """Positivity and interiority violations, one message per offense."""
    violations = []
    for i, w in enumerate(rule.weights):
        if not w > 0.0:
            violations.append(f"weight {i} is not positive: {float(w)!r}")
    inside = points_inside(rule.points, INTERIOR_TOL)
    for i in np.nonzero(~inside)[0]:
        xi1, xi2 = rule.points[i]
        violations.append(
            f"point {i} lies outside the triangle: ({float(xi1)!r}, {float(xi2)!r})"
        )
    return violations
