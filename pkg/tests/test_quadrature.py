"""Quadrature kernel: closed-form oracles and the adaptivity contract."""

import pytest
from mpmath import mp, mpf, mpc, sqrt, pi, exp, e, beta as beta_fn, workdps

from twocut.precision import PrecisionContext
from twocut.geometry import ContourArc
from twocut.quadrature import (
    QuadratureSpec,
    integrate_arc,
    integrate_segment,
    gauss_jacobi_nodes,
    gauss_legendre_nodes,
)
from twocut.errors import SingularInterior, NonConvergent

CTX = PrecisionContext(40, 1e-30)


def test_constant_segment():
    arc = ContourArc([0, 1])
    with workdps(40):
        v = integrate_arc(lambda z: mpc(1), arc, QuadratureSpec(), CTX)
        assert abs(v - 1) < mpf("1e-35")


def test_linear_antiderivative():
    # int of z over 0 -> 1+i equals (1+i)^2/2 = i
    arc = ContourArc([0, mpc(1, 1)])
    with workdps(40):
        v = integrate_arc(lambda z: z, arc, QuadratureSpec(), CTX)
        assert abs(v - mpc(0, 1)) < mpf("1e-35")


def test_arcsine_jacobi_weight():
    # int_{-1}^{1} dz/sqrt(1-z^2) = pi, a closed-form oracle for the
    # (-1/2,-1/2) endpoint factoring
    arc = ContourArc([-1, 1])
    spec = QuadratureSpec("gauss_jacobi", -0.5, -0.5, 1)
    with workdps(40):
        v = integrate_arc(lambda z: 1 / sqrt((1 - z) * (1 + z)), arc, spec, CTX)
        assert abs(v - pi) < mpf("1e-35")


def test_general_jacobi_exponents_beta_oracle():
    # weight (1-x)^a (1+x)^b integrates to 2^(a+b+1) B(a+1, b+1)
    a_exp, b_exp = mpf("0.5"), mpf("-0.25")
    arc = ContourArc([-1, 1])
    spec = QuadratureSpec("gauss_jacobi", float(b_exp), float(a_exp), 1)
    with workdps(40):
        v = integrate_arc(
            lambda z: (1 - z) ** a_exp * (1 + z) ** b_exp, arc, spec, CTX
        )
        exact = mpf(2) ** (a_exp + b_exp + 1) * beta_fn(a_exp + 1, b_exp + 1)
        assert abs(v - exact) < mpf("1e-33")


def test_mixed_sqrt_endpoint_segments():
    with workdps(40):
        v = integrate_segment(lambda z: 1 / sqrt(z), mpf(0), mpf(1), CTX, left_exp=-0.5)
        assert abs(v - 2) < mpf("1e-33")
        v2 = integrate_segment(lambda z: sqrt(1 - z), mpf(0), mpf(1), CTX, right_exp=0.5)
        assert abs(v2 - mpf(2) / 3) < mpf("1e-33")


def test_polyline_with_kink():
    arc = ContourArc([0, 1, mpc(1, 1)])
    with workdps(40):
        v = integrate_arc(lambda z: exp(z), arc, QuadratureSpec(panel_count=2), CTX)
        assert abs(v - (exp(mpc(1, 1)) - 1)) < mpf("1e-33")


def test_adaptive_refinement_stability():
    # doubling the starting panel count moves the answer by < target_tol
    arc = ContourArc([0, 2])
    with workdps(40):
        v1 = integrate_arc(lambda z: exp(-z * z), arc, QuadratureSpec(panel_count=1), CTX)
        v2 = integrate_arc(lambda z: exp(-z * z), arc, QuadratureSpec(panel_count=2), CTX)
        assert abs(v1 - v2) < mpf(CTX.target_tol) * 10


def test_singular_interior_raises():
    arc = ContourArc([-1, 1])

    def overflowing(z):
        return mpc("inf") if abs(z) < mpf("0.5") else mpc(1)

    with workdps(40):
        with pytest.raises(SingularInterior):
            integrate_arc(overflowing, arc, QuadratureSpec(), CTX)


def test_undeclared_singularity_fails_fast():
    # 1/sqrt(1-z^2) without factored exponents cannot reach 1e-30
    arc = ContourArc([-1, 1])
    with workdps(40):
        with pytest.raises(NonConvergent):
            integrate_arc(
                lambda z: 1 / sqrt((1 - z) * (1 + z) + mpf("1e-38")),
                arc,
                QuadratureSpec(),
                CTX,
            )


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec("unknown_rule")
    with pytest.raises(ValueError):
        QuadratureSpec(left_exponent=-1.5)
    with pytest.raises(ValueError):
        QuadratureSpec(panel_count=0)


def test_node_caches_scale_with_precision():
    n40 = gauss_legendre_nodes(24, 40)
    n100 = gauss_legendre_nodes(24, 100)
    with workdps(110):
        # the 100-digit nodes really carry more digits
        p = n100[0][0]
        resid = abs(p - n40[0][0])
        assert resid < mpf("1e-39")
    j = gauss_jacobi_nodes(16, "-0.5", "-0.5", 40)
    assert len(j[0]) == 16
