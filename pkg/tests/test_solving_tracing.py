"""Newton solver and ODE tracer against closed-form oracles."""

import pytest
from mpmath import mp, mpf, mpc, sqrt, pi, exp, workdps, fsum

from twocut.precision import PrecisionContext
from twocut.solving import newton_solve
from twocut.tracing import trace_ode, trajectory_field, critical_directions
from twocut.errors import MaxIterations, Runaway
from conftest import t_reference

CTX = PrecisionContext(40, 1e-26)


def test_newton_linear():
    x, tr = newton_solve(lambda v: [v[0] - 2], [mpf(0)], CTX)
    assert abs(x[0] - 2) < mpf("1e-25")
    assert tr.iterations <= 3


def test_newton_decoupled_quadratic():
    x, _ = newton_solve(
        lambda v: [v[0] ** 2 - v[1] - 1, v[1] - 1], [mpf("1.2"), mpf("0.8")], CTX
    )
    with workdps(40):
        assert abs(x[0] - sqrt(2)) < mpf("1e-24")
        assert abs(x[1] - 1) < mpf("1e-24")


def test_newton_iteration_cap():
    ctx = PrecisionContext(30, 1e-18, 5)
    with pytest.raises(MaxIterations):
        # no root on the reals: x^2 + 1 = 0
        newton_solve(lambda v: [v[0] ** 2 + 1], [mpf(3)], ctx)


def test_two_seeds_same_endpoint_set(solver, endpoints_ref):
    """The 8-real endpoint system has a locally unique solution: two
    distinct admissible seeds converge to the same branch points."""
    from twocut.curve import _polish, _endpoints_to_vector, _relabel_like

    t = t_reference()
    E1 = endpoints_ref
    # second seed: perturb every endpoint independently
    with workdps(64):
        import random

        rng = random.Random(11)
        v = _endpoints_to_vector(E1)
        v2 = [x + mpf(rng.uniform(-0.08, 0.08)) for x in v]
        E2 = _polish(v2, t, solver.ctx)
        E2 = _relabel_like(E2, E1)
        for a, b in zip(E1.as_tuple(), E2.as_tuple()):
            assert abs(a - b) < mpf("1e-12")


def test_trace_straight_field():
    arc = trace_ode(
        lambda z: mpc(1),
        mpc(0),
        lambda z: z.real >= 1,
        0.1,
        initial_direction=mpc(1),
        ctx=PrecisionContext(30, 1e-20),
    )
    assert abs(arc.end - 1) < mpf("1e-9")
    assert abs(arc.end.imag) < mpf("1e-12")


def test_trace_circle_oracle():
    # field iz/|z| from 1: the upper unit semicircle, ending at -1
    ctx = PrecisionContext(30, 1e-20)
    arc = trace_ode(
        lambda z: mpc(0, 1) * z / abs(z),
        mpc(1),
        lambda z: z.imag < 0,
        0.05,
        initial_direction=mpc(0, 1),
        tol=1e-11,
        ctx=ctx,
    )
    assert abs(arc.end + 1) < mpf("1e-8")
    assert max(abs(abs(v) - 1) for v in arc.vertices) < mpf("1e-8")


def test_trace_arclength_monotone():
    ctx = PrecisionContext(30, 1e-20)
    arc = trace_ode(
        lambda z: mpc(0, 1) * z / abs(z),
        mpc(1),
        lambda z: z.imag < 0,
        0.05,
        initial_direction=mpc(0, 1),
        ctx=ctx,
    )
    # cumulative arclength grows strictly; the chord sum undershoots the
    # true semicircle length by O(step^2) only
    lengths = [abs(b - a) for a, b in zip(arc.vertices, arc.vertices[1:])]
    assert all(L > 0 for L in lengths)
    total = float(fsum(lengths))
    assert float(pi) * (1 - 1e-3) < total <= float(pi) + 1e-9


def test_trace_runaway():
    ctx = PrecisionContext(30, 1e-20)
    with pytest.raises(Runaway):
        trace_ode(
            lambda z: mpc(1),
            mpc(0),
            lambda z: False,
            0.5,
            initial_direction=mpc(1),
            escape_radius=50,
            ctx=ctx,
        )


def test_short_trajectory_between_branch_points(endpoints_ref):
    """A trajectory of -Q dz^2 launched from (just off) a1 terminates at b1
    within tight capture distance: the short-trajectory existence check."""
    from twocut.curve import _q_poly, _q_poly_prime

    E = endpoints_ref
    ctx = PrecisionContext(32, 1e-20)
    with ctx.workdps():
        Q = lambda z: _q_poly(z, E)
        field = trajectory_field(Q)
        qp = _q_poly_prime(E.a1, E)
        best = None
        for theta in critical_directions(qp):
            z0 = E.a1 + mpf("1e-6") * E.scale * exp(mpc(0, 1) * theta)
            try:
                arc = trace_ode(
                    field,
                    z0,
                    lambda z: abs(z - E.b1) < mpf("2e-7") * E.scale or abs(z) > 40,
                    step=mpf("1e-5"),
                    initial_direction=exp(mpc(0, 1) * theta),
                    tol=2e-13,
                    ctx=ctx,
                )
            except Exception:
                continue
            d = abs(arc.end - E.b1)
            if best is None or d < best:
                best = d
        assert best is not None and best < mpf("1e-6") * E.scale
