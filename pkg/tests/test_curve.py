"""Spectral curve: one-cut data, the two-cut endpoint system, the branch
of Q^(1/2), the level function, masses, and boundary-approach behavior."""

import pytest
from mpmath import mp, mpf, mpc, sqrt, exp, pi, workdps, fsum

from twocut.precision import PrecisionContext, CTX64
from twocut.curve import (
    endpoints_one_cut,
    solve_endpoints_two_cut,
    q_half,
    q_half_trace,
    u_function,
    cut_masses,
    first_moment_density,
    equilibrium_density,
    CutSystem,
    endpoint_residual,
    _endpoints_to_vector,
)
from twocut.quadrature import integrate_segment
from conftest import t_reference


def test_one_cut_branch_at_zero():
    tri = endpoints_one_cut(0)
    with workdps(64):
        assert abs(tri.x - exp(2 * pi * mpc(0, 1) / 3)) < mpf("1e-40")
        # soft edges from the explicit branch of sqrt(x)
        a_expect = exp(2 * pi * mpc(0, 1) / 3) - mpc(0, 1) * sqrt(mpf(2)) * exp(-mpc(0, 1) * pi / 3)
        b_expect = exp(2 * pi * mpc(0, 1) / 3) + mpc(0, 1) * sqrt(mpf(2)) * exp(-mpc(0, 1) * pi / 3)
        assert abs(tri.a - a_expect) < mpf("1e-40")
        assert abs(tri.b - b_expect) < mpf("1e-40")
        assert abs(tri.c + tri.x) == 0


def test_one_cut_cubic_residual():
    with workdps(64):
        for tval in (mpc("0.3", "0.1"), mpc(-2, 1), mpc(0, -3)):
            tri = endpoints_one_cut(tval)
            assert abs(tri.x ** 3 - tval * tri.x - 1) < mpf("1e-14")


def test_two_cut_residuals_and_symmetric_functions(endpoints_ref):
    E = endpoints_ref
    with workdps(64):
        e1, e2, e3, _ = E.elementary_symmetric()
        assert abs(e1) < mpf("1e-40")
        assert abs(e2 + 2 * E.t) < mpf("1e-40")
        assert abs(e3 + 4) < mpf("1e-40")
        assert E.residual_inf_norm < mpf("1e-12")


def test_symmetric_t_reflection_pairs(endpoints_ref):
    # at t on the symmetry ray the endpoint set is invariant under
    # reflection across arg z = 2 pi/3 with a1 <-> b2 and b1 <-> a2
    E = endpoints_ref
    with workdps(64):
        sig = lambda z: exp(4 * pi * mpc(0, 1) / 3) * z.conjugate()
        assert abs(sig(E.a1) - E.b2) < mpf("1e-30")
        assert abs(sig(E.b1) - E.a2) < mpf("1e-30")


def test_q_half_expansion_at_infinity(endpoints_ref):
    E = endpoints_ref
    with workdps(64):
        t = E.t
        for R in (mpf(1000), mpf(4000)):
            z = R * exp(mpc(0, 1) * mpf("0.4"))
            lead = (z * z - t) / 2 + 1 / z
            assert abs(q_half(z, E) - lead) < 10 * abs(z) ** (-2) * max(1, abs(E.mu1))


def test_q_half_opposite_traces(endpoints_ref):
    E = endpoints_ref
    with workdps(64):
        s = (E.a1 + E.b1) / 2
        plus = q_half_trace(s, E, 1, +1)
        minus = q_half_trace(s, E, 1, -1)
        assert abs(plus + minus) < mpf("1e-50")
        # the traces agree with two-sided limits of the off-cut branch
        n = mpc(0, 1) * (E.b1 - E.a1) / abs(E.b1 - E.a1)
        eps = mpf("1e-20")
        assert abs(q_half(s + eps * n, E) - plus) < mpf("1e-15")


def test_q_half_residue_coefficient(endpoints_ref):
    # (1/2 pi i) * loop integral of Q^(1/2) over a big circle picks out the
    # 1/z coefficient, which the branch normalization fixes at 1
    E = endpoints_ref
    ctx = PrecisionContext(48, 1e-30)
    with ctx.workdps():
        R = 50 * E.scale
        t = E.t

        def f(theta):
            z = R * exp(mpc(0, 1) * theta)
            return (q_half(z, E) - (z * z - t) / 2) * z  # subtract the polynomial part

        npts = 64
        acc = fsum(f(2 * pi * mpf(k) / npts) for k in range(npts)) / npts
        assert abs(acc - 1) < mpf("1e-20")


def test_u_function_zero_at_base_and_on_cuts(cuts_ref, constants_ref):
    E = cuts_ref.endpoints
    ctx = PrecisionContext(48, 1e-25)
    with ctx.workdps():
        assert u_function(E.b2, cuts_ref, ctx) == 0
    # on a true short trajectory the level function vanishes
    from twocut.curve import critical_graph

    short, _, _ = critical_graph(E)
    arc = short[("a1", "b1")]
    mid = arc.vertices[len(arc.vertices) // 2]
    with ctx.workdps():
        assert abs(u_function(mid, cuts_ref, ctx)) < mpf("1e-10")


def test_u_function_sector_signs(cuts_ref):
    # far field: U < 0 in the sector around arg z = pi/3 and > 0 around 0
    ctx = PrecisionContext(40, 1e-20)
    with ctx.workdps():
        R = 8 * cuts_ref.endpoints.scale
        assert u_function(R * exp(mpc(0, 1) * pi / 3), cuts_ref, ctx) < 0
        assert u_function(R * exp(mpc(0, 1) * pi), cuts_ref, ctx) < 0
        assert u_function(R, cuts_ref, ctx) > 0
        assert u_function(R * exp(2 * pi * mpc(0, 1) / 3), cuts_ref, ctx) > 0


def test_equilibrium_masses(endpoints_ref, constants_ref):
    E = endpoints_ref
    with workdps(64):
        m1, m2 = cut_masses(E)
        assert abs(m1.imag) < mpf("1e-20")
        assert abs(m2.imag) < mpf("1e-20")
        assert abs(m1 + m2 - 1) < mpf("1e-10")
        # cross-module oracle: mass of the first cut is omega
        assert abs(m1.real - constants_ref.omega) < mpf("1e-9")


def test_density_square_root_vanishing(endpoints_ref):
    # density(s) / sqrt|s - a1| stays bounded above and below near a1:
    # fit the local exponent on the straight-cut line
    E = endpoints_ref
    with workdps(64):
        d = (E.b1 - E.a1) / abs(E.b1 - E.a1)
        hs = [mpf("1e-3") * 2 ** k for k in range(0, 5)]
        vals = [equilibrium_density(E.a1 + h * d, E) for h in hs]
        import math

        # exponent from successive ratios: log2(v_{k+1}/v_k) ~ 0.5
        for v0, v1 in zip(vals, vals[1:]):
            expo = math.log(float(v1 / v0), 2)
            assert abs(expo - 0.5) < 0.05


def test_first_moment_two_routes(endpoints_ref):
    E = endpoints_ref
    with workdps(64):
        mu_quad = first_moment_density(E)
        assert abs(mu_quad - E.mu1) < mpf("1e-9")


def test_third_width_vanishes(endpoints_ref):
    # the system enforces Re of the [a1,b1] and connector periods; the
    # [a2,b2] width must then vanish through the residue bookkeeping
    E = endpoints_ref
    ctx = CTX64
    with ctx.workdps():
        w2 = integrate_segment(
            lambda s: q_half_trace(s, E, 2, +1), E.a2, E.b2, ctx, left_exp=0.5, right_exp=0.5
        )
        assert abs(w2.real) < mpf("1e-10")


def test_s_contour_assembly(solver):
    """The preferred contour: tails at the right asymptotic angles, the
    connector threaded through {U < 0}, no self-crossings, and straight
    quadrature cuts clear of each other and of the connector."""
    from twocut.curve import s_contour, u_function
    from twocut.geometry import segment_crosses_arc
    from mpmath import arg

    cs = s_contour(t_reference(), solver=solver)
    E = cs.endpoints
    ctx = PrecisionContext(40, 1e-18)
    with ctx.workdps():
        # asymptotic directions of the two tails
        a_in = arg(cs.gamma.vertices[0])
        a_out = arg(cs.gamma.vertices[-1])
        assert min(abs(a_in - pi), abs(a_in + pi)) < mpf("0.05")
        assert abs(a_out - pi / 3) < mpf("0.05")
        # the connector interior lies strictly inside the valley
        interior = cs.i_arc.vertices[5:-5:10]
        assert all(u_function(v, cs, ctx) < 0 for v in interior)
        # contour is simple
        assert cs.gamma.is_simple(0)
        # straight cuts do not cross each other or the connector
        c1, c2 = cs.straight_cuts
        assert not segment_crosses_arc(c1.vertices[0], c1.vertices[-1], c2)
        for seg in (c1, c2):
            crossings = sum(
                1
                for u, v in cs.i_arc.segments()
                if segment_crosses_arc(seg.vertices[0], seg.vertices[-1],
                                       type(cs.i_arc)([u, v]))
            )
            assert crossings == 0


def test_cauchy_riemann_defect(solver):
    """The endpoints depend real-analytically but NOT holomorphically on t:
    the finite-difference d/d(conj t) derivative is far from zero."""
    t0 = t_reference()
    with workdps(64):
        h = mpf("1e-4")
        vals = {}
        for dt in (h, -h, mpc(0, 1) * h, -mpc(0, 1) * h):
            vals[dt] = solver.solve(t0 + dt).a1
        dx = (vals[h] - vals[-h]) / (2 * h)
        dy = (vals[mpc(0, 1) * h] - vals[-mpc(0, 1) * h]) / (2 * h)
        d_conj = (dx + mpc(0, 1) * dy) / 2
        assert abs(d_conj) > mpf("1e3") * mpf("1e-12")


def test_boundary_approach_collision(solver, phase_diagram):
    """Approaching the split curve along the symmetry ray, the inner pair
    b1, a2 collides like sqrt(distance) while the endpoint set stays a
    valid solution."""
    with workdps(64):
        u = exp(mpc(0, 1) * pi / 3)
        # distances measured from the crossing point of the ray
        lo, hi = mpf("0.9"), mpf("1.2")
        for _ in range(50):
            midr = (lo + hi) / 2
            if phase_diagram.classify(midr * u).kind == "TwoCut":
                hi = midr
            else:
                lo = midr
        r_star = (lo + hi) / 2
        gaps = []
        for d in (mpf("0.2"), mpf("0.05"), mpf("0.0125")):
            E = solver.solve((r_star + d) * u)
            gaps.append(abs(E.b1 - E.a2))
        assert gaps[0] > gaps[1] > gaps[2]
        # sqrt scaling: quartering the distance roughly halves the gap
        ratio = float(gaps[1] / gaps[2])
        assert 1.5 < ratio < 2.6
