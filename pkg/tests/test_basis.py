import math

import numpy as np
import pytest
import sympy as sp

from triquad.basis import (
    BasisSpec,
    CollapsedVertexError,
    dim_poly,
    gram_matrix,
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
from triquad.domain import gauss_quadrature


def symbolic_basis(m, n, normalized=True):
    """Independent symbolic construction of one basis function (sympy Jacobi)."""
    x1, x2 = sp.symbols("xi1 xi2")
    eta = (2 * x1 + x2 + 1) / (1 - x2)
    expr = sp.jacobi(m, 0, 0, eta) * ((1 - x2) / 2) ** m * sp.jacobi(n, 2 * m + 1, 0, x2)
    if normalized:
        expr *= sp.sqrt((2 * m + 1) * (m + n + 1))
    return sp.lambdify((x1, x2), sp.expand(sp.cancel(sp.together(expr))))


def random_interior(rng, count):
    b = rng.dirichlet([1.0, 1.0, 1.0], size=count)
    return 2.0 * b[:, :2] - 1.0


# ---------------------------------------------------------------- jacobi


def test_jacobi_degree_zero_is_one():
    for x in (-1.0, -0.3, 0.0, 0.9, 1.0):
        assert jacobi(0.0, 0.0, 0, x) == 1.0


def test_jacobi_legendre_linear():
    assert jacobi(0.0, 0.0, 1, 0.5) == pytest.approx(0.5, abs=1e-15)


def test_jacobi_legendre_quadratic_at_one():
    # oracle: P2(x) = (3x^2 - 1)/2 evaluated at 1
    assert jacobi(0.0, 0.0, 2, 1.0) == pytest.approx((3.0 - 1.0) / 2.0, abs=1e-15)


@pytest.mark.parametrize("alpha,beta", [(0.0, 0.0), (1.0, 0.0), (3.0, 0.0), (2.5, 1.5)])
def test_jacobi_matches_sympy(alpha, beta):
    x1 = sp.Symbol("x")
    xs = np.linspace(-1.0, 1.0, 7)
    for n in range(6):
        ref = sp.lambdify(x1, sp.jacobi(n, alpha, beta, x1))
        for x in xs:
            assert jacobi(alpha, beta, n, float(x)) == pytest.approx(
                float(ref(x)), rel=1e-12, abs=1e-12
            )


def test_jacobi_clamps_tolerance_band():
    assert jacobi(0.0, 0.0, 3, 1.0 + 1e-13) == pytest.approx(1.0, abs=1e-14)


def test_jacobi_derivative_linear_and_constant():
    for x in (-0.9, 0.1, 0.7):
        assert jacobi_derivative(0.0, 0.0, 1, x) == 1.0
        assert jacobi_derivative(0.0, 0.0, 0, x) == 0.0


def test_jacobi_derivative_matches_finite_difference():
    h = 1e-6
    x = 0.3
    fd = (jacobi(2.0, 0.0, 3, x + h) - jacobi(2.0, 0.0, 3, x - h)) / (2.0 * h)
    assert jacobi_derivative(2.0, 0.0, 3, x) == pytest.approx(fd, rel=1e-7)


# ----------------------------------------------------------- enumeration


def test_enumeration_order_is_graded_lex():
    assert multi_indices(2) == ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))


def test_enumeration_bijection():
    for degree in (0, 1, 5, 12):
        for k in range(dim_poly(degree)):
            m, n = index_of(k)
            assert rank_of(m, n) == k
            assert m + n <= degree


def test_dimension_formula():
    for d in range(15):
        assert dim_poly(d) == (d + 1) * (d + 2) // 2


# -------------------------------------------------------------- kd_eval


def test_constant_basis_function_is_one():
    spec = BasisSpec(4)
    rng = np.random.default_rng(0)
    for p in random_interior(rng, 10):
        assert kd_eval(spec, (0, 0), tuple(p)) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("idx", [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1)])
def test_kd_eval_matches_symbolic(idx):
    spec = BasisSpec(4)
    fn = symbolic_basis(*idx)
    rng = np.random.default_rng(1)
    for p in random_interior(rng, 20):
        assert kd_eval(spec, idx, tuple(p)) == pytest.approx(
            float(fn(*p)), rel=1e-12, abs=1e-12
        )


def test_kd_eval_unnormalized_linear():
    # unnormalized (1, 0) function is xi1 + (1 + xi2)/2; zero at the centroid
    spec = BasisSpec(2, normalized=False)
    val = kd_eval(spec, (1, 0), (-1.0 / 3.0, -1.0 / 3.0))
    assert val == pytest.approx(0.0, abs=1e-15)
    assert kd_eval(spec, (1, 0), (0.25, -0.5)) == pytest.approx(
        0.25 + 0.25, abs=1e-15
    )


def test_nonconstant_basis_functions_have_zero_mean():
    pts, wts = gauss_quadrature(24)
    spec = BasisSpec(8)
    v = vandermonde(spec, pts).values
    means = v.T @ wts
    assert means[0] == pytest.approx(2.0, abs=1e-13)
    assert np.max(np.abs(means[1:])) <= 1e-12


def test_gram_matrix_is_twice_identity():
    spec = BasisSpec(10)
    g = gram_matrix(spec, n_nodes=40)
    assert np.max(np.abs(g - 2.0 * np.eye(spec.dim))) <= 1e-11


def test_degree_correctness_along_lines():
    # restricted to a line, g_{m,n} is a 1-D polynomial of degree <= m+n:
    # interpolating on m+n+1 points must reproduce a further sample
    rng = np.random.default_rng(5)
    spec = BasisSpec(6)
    for idx in [(0, 3), (2, 2), (4, 0), (3, 3)]:
        deg = idx[0] + idx[1]
        a = np.array([-0.9, -0.85])
        direction = np.array([0.8, 0.3])
        ts = np.linspace(0.0, 1.0, deg + 2)
        samples = [kd_eval(spec, idx, tuple(a + t * direction)) for t in ts]
        coeffs = np.polyfit(ts[:-1], samples[:-1], deg)
        predicted = np.polyval(coeffs, ts[-1])
        assert predicted == pytest.approx(samples[-1], rel=1e-8, abs=1e-10)


# ------------------------------------------------------------ gradients


def test_gradient_constant_is_zero():
    assert kd_gradient(BasisSpec(3), (0, 0), (0.1, -0.6)) == (0.0, 0.0)


def test_gradient_unnormalized_linear():
    spec = BasisSpec(2, normalized=False)
    rng = np.random.default_rng(2)
    for p in random_interior(rng, 5):
        g1, g2 = kd_gradient(spec, (1, 0), tuple(p))
        assert g1 == pytest.approx(1.0, abs=1e-13)
        assert g2 == pytest.approx(0.5, abs=1e-13)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    spec = BasisSpec(8)
    pts = random_interior(rng, 200)
    h = 1e-6
    ev = vandermonde(spec, pts, derivatives=True)
    vp1 = vandermonde(spec, pts + [h, 0.0]).values
    vm1 = vandermonde(spec, pts - [h, 0.0]).values
    vp2 = vandermonde(spec, pts + [0.0, h]).values
    vm2 = vandermonde(spec, pts - [0.0, h]).values
    fd1 = (vp1 - vm1) / (2.0 * h)
    fd2 = (vp2 - vm2) / (2.0 * h)
    scale = np.maximum(1.0, np.maximum(np.abs(fd1), np.abs(fd2)))
    assert np.max(np.abs(ev.d_xi1 - fd1) / scale) <= 1e-6
    assert np.max(np.abs(ev.d_xi2 - fd2) / scale) <= 1e-6


def test_gradient_refused_at_collapsed_vertex():
    spec = BasisSpec(3)
    with pytest.raises(CollapsedVertexError):
        kd_gradient(spec, (1, 0), (-1.0, 1.0 - 1e-12))
    # m = 0 stays regular there
    g1, g2 = kd_gradient(spec, (0, 2), (-1.0, 1.0 - 1e-12))
    assert g1 == 0.0 and np.isfinite(g2)


# ----------------------------------------------------------- vandermonde


def test_vandermonde_degree_zero():
    ev = vandermonde(BasisSpec(0), [(-0.2, -0.3)])
    assert ev.values.shape == (1, 1)
    assert ev.values[0, 0] == pytest.approx(1.0, abs=1e-15)


def test_vandermonde_constant_column():
    ev = vandermonde(BasisSpec(1), [(-0.5, -0.5), (0.0, -0.8), (-0.9, 0.1)])
    assert ev.values.shape == (3, 3)
    assert np.allclose(ev.values[:, 0], 1.0)


def test_vandermonde_random_square_system_is_solvable():
    rng = np.random.default_rng(11)
    for d in (2, 4):
        spec = BasisSpec(d)
        pts = random_interior(rng, spec.dim)
        v = vandermonde(spec, pts).values
        assert np.isfinite(np.linalg.cond(v))
        b = np.zeros(spec.dim)
        b[0] = 2.0
        w = np.linalg.solve(v.T, b)
        assert np.max(np.abs(v.T @ w - b)) <= 1e-10


def test_vandermonde_values_regular_at_collapsed_vertex():
    spec = BasisSpec(6)
    ev = vandermonde(spec, [(-1.0, 1.0)])  # the collapsed vertex itself
    assert np.all(np.isfinite(ev.values))
    # functions with m >= 1 vanish there; m = 0 reduce to P_n^{1,0}(1) = n+1
    assert ev.values[0, rank_of(1, 0)] == pytest.approx(0.0, abs=1e-14)
    unnorm = vandermonde(BasisSpec(6, normalized=False), [(-1.0, 1.0)])
    for n in range(7):
        assert unnorm.values[0, rank_of(0, n)] == pytest.approx(n + 1.0, rel=1e-13)


def test_vandermonde_derivatives_refused_at_vertex():
    with pytest.raises(CollapsedVertexError):
        vandermonde(BasisSpec(2), [(-1.0, 1.0)], derivatives=True)


# ------------------------------------------------------------ integrals


def test_kd_integral_values():
    spec = BasisSpec(5)
    assert kd_integral(spec, (0, 0)) == 2.0
    assert kd_integral(spec, (3, 2)) == 0.0
    assert kd_integral(spec, (0, 1)) == 0.0


def test_kd_integral_rejects_out_of_range_index():
    with pytest.raises(ValueError):
        kd_integral(BasisSpec(2), (2, 1))
