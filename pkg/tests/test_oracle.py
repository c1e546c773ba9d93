"""Moment oracle: seeds, recursion, Hankel pivots, recurrence, Toda."""

import random

import pytest
from mpmath import mp, mpf, mpc, exp, pi, workdps, det, matrix, power

from twocut.oracle import (
    airy_series,
    moment_seed,
    moment_quadrature,
    moment_table,
    recurrence_from_moments,
    recurrence_residual,
    hn_direct_check,
    partition_and_toda,
    MomentTable,
)
from twocut.errors import DegenerateHankel
from conftest import t_reference


@pytest.fixture(scope="module")
def table_ref():
    with workdps(140):
        t = 4 * exp(mpc(0, 1) * pi / 3)
    return moment_table(t, 10, 30, 120)


@pytest.fixture(scope="module")
def result_ref(table_ref):
    return recurrence_from_moments(table_ref, 13)


def test_airy_series_against_library():
    import mpmath

    with workdps(60):
        for z in (mpc(1), mpc(-3, 2), mpc(0, 5), mpc(-8, -1)):
            ai, aip = airy_series(z)
            assert abs(ai - mpmath.airyai(z)) < mpf("1e-55") * max(1, abs(ai))
            assert abs(aip - mpmath.airyai(z, 1)) < mpf("1e-55") * max(1, abs(aip))


def test_seed_validation_two_routes():
    # moment_seed itself enforces agreement of the Airy-contour identity
    # with direct quadrature; (0, 1) is the spec anchor case
    m0, m1 = moment_seed(mpc(0), 1, 60)
    with workdps(60):
        q0 = moment_quadrature(0, mpc(0), 1, 60)
        assert abs(m0 - q0) < mpf("1e-50") * abs(q0)


def test_moment_recursion_identities(table_ref):
    t = table_ref.t
    with workdps(120):
        m = table_ref.m
        assert abs(m[2] - t * m[0]) < mpf("1e-100") * abs(m[0])
        N = table_ref.N
        assert abs(m[3] - (t * m[1] - m[0] / N)) < mpf("1e-100") * abs(m[0])


def test_moment_analyticity_cauchy_riemann():
    # m0(t) is entire: the finite-difference d/d(conj t) derivative vanishes
    # (the budget supports a very small step, so truncation is negligible)
    with workdps(100):
        t0 = mpc("0.7", "0.4")
        h = mpf("1e-30")
        vals = {}
        for dt in (h, -h, mpc(0, 1) * h, -mpc(0, 1) * h):
            vals[dt], _ = moment_seed(t0 + dt, 2, 90)
        dx = (vals[h] - vals[-h]) / (2 * h)
        dy = (vals[mpc(0, 1) * h] - vals[-mpc(0, 1) * h]) / (2 * h)
        d_conj = (dx + mpc(0, 1) * dy) / 2
        assert abs(d_conj) < mpf("1e-20")


def test_moment_rescaling_identity():
    # m_k(t, N) = N^{-(k+1)/3} m_k(t N^(2/3), 1)
    with workdps(90):
        t = mpc("0.3", "0.9")
        N = 7
        tab_n = moment_table(t, N, 8, 80)
        tab_1 = moment_table(t * power(mpf(N), mpf(2) / 3), 1, 8, 80)
        for k in range(8):
            lhs = tab_n.m[k]
            rhs = power(mpf(N), -(mpf(k) + 1) / 3) * tab_1.m[k]
            assert abs(lhs - rhs) < mpf("1e-65") * max(abs(lhs), mpf("1e-30"))


def test_hankel_pivots_match_determinants(table_ref, result_ref):
    # h_n = D_n / D_{n-1} with explicit Hankel determinants for small n
    with workdps(120):
        m = table_ref.m
        dets = []
        for n in range(5):
            H = matrix(n + 1, n + 1)
            for i in range(n + 1):
                for j in range(n + 1):
                    H[i, j] = m[i + j]
            dets.append(det(H))
        for n in range(5):
            expect = dets[n] / (dets[n - 1] if n >= 1 else 1)
            assert abs(result_ref.h[n] - expect) < mpf("1e-90") * abs(expect)


def test_gamma2_is_pivot_ratio(result_ref):
    with workdps(120):
        for n in range(1, 12):
            ratio = result_ref.h[n] / result_ref.h[n - 1]
            assert abs(result_ref.gamma2[n] - ratio) < mpf("1e-110") * abs(ratio)


def test_three_term_recurrence_residuals(result_ref):
    rng = random.Random(4)
    with workdps(120):
        for n in range(2, 12):
            for _ in range(5):
                z = mpc(rng.uniform(-2, 2), rng.uniform(-2, 2))
                assert recurrence_residual(result_ref, n, z) < mpf(10) ** (-120 // 4)


def test_monic_base_cases(result_ref):
    with workdps(120):
        assert result_ref.poly_value(0, mpc("0.3")) == 1
        z = mpc("1.7", "0.2")
        assert abs(result_ref.poly_value(1, z) - (z - result_ref.beta[0])) < mpf("1e-100")


def test_h_direct_quadrature_route(result_ref):
    with workdps(120):
        direct = hn_direct_check(result_ref, 3)
        assert abs(direct - result_ref.h[3]) < mpf("1e-50") * abs(direct)


def test_precision_audit():
    # repeating with +50 digits moves reported values by far less than the
    # half-budget guard
    with workdps(140):
        t = mpc("0.9", "2.1")
    r1 = recurrence_from_moments(moment_table(t, 8, 22, 90), 9)
    r2 = recurrence_from_moments(moment_table(t, 8, 22, 140), 9)
    with workdps(140):
        for n in (4, 8):
            assert abs(r1.h[n] - r2.h[n]) < mpf(10) ** (-45) * abs(r2.h[n])
            assert abs(r1.beta[n] - r2.beta[n]) < mpf(10) ** (-40) * max(1, abs(r2.beta[n]))


def test_degenerate_hankel_detection():
    # a fabricated moment list with h_1 = 0 must be reported, not used
    with workdps(60):
        fake = MomentTable(t=mpc(0), N=1, digits=50, m=[mpc(1), mpc(0), mpc(0), mpc(0), mpc(0), mpc(0), mpc(0)])
        with pytest.raises(DegenerateHankel):
            recurrence_from_moments(fake, 2)


def test_toda_equation_residual():
    with workdps(140):
        t = 4 * exp(mpc(0, 1) * pi / 3)
    zn, resid = partition_and_toda(t, 10, step=1e-3, digits=130)
    with workdps(60):
        assert resid < mpf("1e-4")
        assert abs(zn) > 0


def test_partition_function_smallest_case():
    # N = 1: Z_1 = m_0 and gamma_1^2 = h_1/h_0 consistency
    with workdps(80):
        t = mpc("0.4", "0.8")
    table = moment_table(t, 1, 10, 70)
    res = recurrence_from_moments(table, 3)
    with workdps(80):
        assert abs(res.h[0] - table.m[0]) < mpf("1e-60") * abs(table.m[0])
        assert res.gamma2[1] == res.h[1] / res.h[0]
