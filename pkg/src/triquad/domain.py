"""Reference triangle, coordinate systems, and exact monomial integrals.

Everything internal lives on the right triangle

    T = { (xi1, xi2) : xi1 >= -1, xi2 >= -1, xi1 + xi2 <= 0 }

which has vertices (-1,-1), (1,-1), (-1,1) and area 2. Rule files store
points in barycentric coordinates (equivalently, Cartesian coordinates on
the unit right triangle x >= 0, y >= 0, x + y <= 1), and plots use an
equilateral triangle with unit edge centered at the origin. This module
holds the three coordinate systems, the affine maps between them, and the
closed-form monomial integrals used as an independent integration oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

#: Absolute tolerance (reference coordinates) for interior-or-boundary tests.
INTERIOR_TOL = 1e-12

#: Reference triangle vertices, one per row.
REF_VERTICES = np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])

# Equilateral triangle with unit edge, centroid at the origin.  The vertex
# rows correspond to REF_VERTICES under the affine map of to_equilateral.
_SQRT3 = math.sqrt(3.0)
EQUILATERAL_VERTICES = np.array([
    [-0.5, -0.5 / _SQRT3],
    [0.5, -0.5 / _SQRT3],
    [0.0, 1.0 / _SQRT3],
])


@dataclass(frozen=True)
class TrianglePoint:
    """A point in reference coordinates on the triangle T."""

    xi1: float
    xi2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.xi1, self.xi2])

    def is_inside(self, tol: float = INTERIOR_TOL) -> bool:
        """Interior-or-boundary test with absolute tolerance `tol`."""
        return bool(
            self.xi1 >= -1.0 - tol
            and self.xi2 >= -1.0 - tol
            and self.xi1 + self.xi2 <= tol
        )


@dataclass(frozen=True)
class BarycentricPoint:
    """First two barycentric coordinates; the third is implied."""

    b1: float
    b2: float

    @property
    def b3(self) -> float:
        return 1.0 - self.b1 - self.b2

    def is_inside(self, tol: float = INTERIOR_TOL) -> bool:
        return bool(self.b1 >= -tol and self.b2 >= -tol and self.b3 >= -tol)


def as_point_array(points) -> np.ndarray:
    """Normalize a point collection to a float array of shape (n, 2).

    Accepts an (n, 2) array-like, a single TrianglePoint, or a sequence of
    TrianglePoint / pair-likes.
    """
    if isinstance(points, TrianglePoint):
        return points.as_array().reshape(1, 2)
    if isinstance(points, (list, tuple)) and points and isinstance(points[0], TrianglePoint):
        return np.array([[p.xi1, p.xi2] for p in points])
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected points of shape (n, 2), got {arr.shape}")
    return arr


def to_barycentric(p: TrianglePoint) -> BarycentricPoint:
    """Map reference coordinates to barycentric coordinates.

    b1 and b2 equal the Cartesian coordinates on the unit right triangle.
    The map is affine and is applied regardless of interiority.
    """
    return BarycentricPoint((p.xi1 + 1.0) / 2.0, (p.xi2 + 1.0) / 2.0)


def from_barycentric(b: BarycentricPoint) -> TrianglePoint:
    """Inverse of :func:`to_barycentric`."""
    return TrianglePoint(2.0 * b.b1 - 1.0, 2.0 * b.b2 - 1.0)


def to_equilateral(p: TrianglePoint) -> tuple[float, float]:
    """Affine image on the unit-edge equilateral triangle centered at (0,0)."""
    xy = ref_to_equilateral(np.array([[p.xi1, p.xi2]]))[0]
    return float(xy[0]), float(xy[1])


def ref_to_bary(points) -> np.ndarray:
    """Vectorized reference -> (b1, b2, b3), shape (n, 3)."""
    pts = as_point_array(points)
    b12 = (pts + 1.0) / 2.0
    b3 = 1.0 - b12[:, 0] - b12[:, 1]
    return np.column_stack([b12, b3])


def bary_to_ref(b12) -> np.ndarray:
    """Vectorized (b1, b2) -> reference coordinates, shape (n, 2)."""
    arr = np.asarray(b12, dtype=float).reshape(-1, 2)
    return 2.0 * arr - 1.0


def ref_to_unit(points) -> np.ndarray:
    """Reference -> unit right triangle Cartesian (x, y) = (b1, b2)."""
    return (as_point_array(points) + 1.0) / 2.0


def ref_to_equilateral(points) -> np.ndarray:
    """Vectorized affine map onto the unit-edge equilateral triangle."""
    return ref_to_bary(points) @ EQUILATERAL_VERTICES[[1, 2, 0]]


def points_inside(points, tol: float = INTERIOR_TOL) -> np.ndarray:
    """Boolean mask of interior-or-boundary points (reference tolerance)."""
    pts = as_point_array(points)
    return (
        (pts[:, 0] >= -1.0 - tol)
        & (pts[:, 1] >= -1.0 - tol)
        & (pts[:, 0] + pts[:, 1] <= tol)
    )


#: Degree cap for the factorial-based monomial oracle.
MONOMIAL_DEGREE_CAP = 60


def monomial_integral(a: int, b: int) -> float:
    """Exact integral of x^a y^b over the unit right triangle.

    Uses the beta-function identity a! b! / (a+b+2)!, evaluated through
    log-gamma so the result stays accurate well past degree 25.
    """
    if a < 0 or b < 0:
        raise ValueError("monomial exponents must be nonnegative")
    if a + b > MONOMIAL_DEGREE_CAP:
        raise ValueError(
            f"total degree {a + b} exceeds the oracle cap {MONOMIAL_DEGREE_CAP}"
        )
    return math.exp(math.lgamma(a + 1) + math.lgamma(b + 1) - math.lgamma(a + b + 3))


def gauss_quadrature(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensorized Gauss quadrature on T, exact for degree <= 2n - 1.

    Built from n Gauss-Legendre nodes in the collapsed direction and n
    Gauss-Jacobi(1, 0) nodes in xi2, absorbing the collapse Jacobian
    (1 - xi2)/2 into the weights.  Serves as the high-strength integration
    oracle for Gram matrices and basis checks; the points avoid the
    collapsed vertex by construction.

    Returns (points, weights) with points of shape (n*n, 2) and weights
    summing to the triangle area 2.
    """
    if n < 1:
        raise ValueError("need at least one node per direction")
    xg, wg = np.polynomial.legendre.leggauss(n)
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    eta, xi2 = np.meshgrid(xg, xj, indexing="ij")
    xi1 = (1.0 + eta) * (1.0 - xi2) / 2.0 - 1.0
    pts = np.column_stack([xi1.ravel(), xi2.ravel()])
    wts = (np.outer(wg, wj) / 2.0).ravel()
    return pts, wts
