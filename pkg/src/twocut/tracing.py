"""Adaptive tracing of trajectories of quadratic differentials.

A trajectory of -P(z) dz^2 satisfies -P(z(s)) z'(s)^2 > 0; orthogonal
trajectories flip the sign.  Both are integral curves of unit direction
fields z' = +-i / sqrt(P) (resp. +-1 / sqrt(P)) whose square-root branch is
kept continuous along the path by aligning each field evaluation with the
previous direction.  Integration is classical RK4 with step doubling/halving
on the two-half-steps error estimate.
"""

from mpmath import mp, mpf, mpc, sqrt, fabs

from .errors import StepUnderflow, Runaway, TraceFailure
from .geometry import ContourArc
from .precision import CTX64


def trajectory_field(P):
    """Unit tangent field of trajectories of -P(z) dz^2 (sign ambiguous)."""

    def field(z):
        w = sqrt(P(z))
        if w == 0:
            raise TraceFailure(f"direction field hit a critical point at {z}")
        v = mpc(0, 1) / w
        return v / abs(v)

    return field


def orthogonal_field(P):
    """Unit tangent field of orthogonal trajectories of -P(z) dz^2."""

    def field(z):
        w = sqrt(P(z))
        if w == 0:
            raise TraceFailure(f"direction field hit a critical point at {z}")
        v = 1 / w
        return v / abs(v)

    return field


def critical_directions(P_prime_at_e, orthogonal=False):
    """Tangent angles of the three (orthogonal) trajectories leaving a
    simple zero e of P, given P'(e).

    Along z = e + r e^{i theta}:  -P ~ -P'(e) r e^{i theta}, and the
    trajectory condition -P (dz)^2 > 0 reads arg(-P'(e)) + 3 theta = 0
    (mod 2 pi); orthogonal trajectories sit at the midpoints.
    """
    from mpmath import pi, arg

    base = -arg(-P_prime_at_e) / 3
    if orthogonal:
        base += pi / 3
    return [base + 2 * pi * k / 3 for k in range(3)]


def _rk4(field, z, v_prev, h):
    """One RK4 step of z' = field(z), keeping the sqrt branch aligned."""

    def f(zz, ref):
        v = field(zz)
        if (v.real * ref.real + v.imag * ref.imag) < 0:
            v = -v
        return v

    k1 = f(z, v_prev)
    k2 = f(z + h / 2 * k1, k1)
    k3 = f(z + h / 2 * k2, k2)
    k4 = f(z + h * k3, k3)
    return z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4), k1


def trace_ode(
    field,
    start,
    stop,
    step,
    initial_direction=None,
    escape_radius=1e6,
    max_steps=200000,
    tol=1e-10,
    min_step_factor=1e-14,
    ctx=CTX64,
    record_every=1,
):
    """Trace an integral curve of a unit direction field from start.

    field             : z -> unit complex (sign ambiguity resolved internally)
    stop              : predicate on z; the trace ends when it fires and the
                        crossing is refined by bisection to step accuracy
    step              : initial step length (arclength)
    initial_direction : complex hint selecting the sign of the field at start

    Returns a ContourArc of the traced polyline.  Raises Runaway when |z|
    exceeds escape_radius before stop fires, StepUnderflow when adaptive
    halving collapses the step, and TraceFailure from the field itself.
    """
    with ctx.workdps():
        z = mpc(start)
        h = mpf(step)
        tol = mpf(tol)
        scale = max(mpf(1), abs(z))
        min_step = mpf(min_step_factor) * scale
        v = field(z)
        if initial_direction is not None:
            ref = mpc(initial_direction)
            if (v.real * ref.real + v.imag * ref.imag) < 0:
                v = -v
        vertices = [z]
        if stop(z):
            raise TraceFailure("stop predicate already true at start")
        for n in range(max_steps):
            # step doubling error control: full step vs two half steps
            z_full, _ = _rk4(field, z, v, h)
            z_h1, _ = _rk4(field, z, v, h / 2)
            v_mid = field(z_h1)
            if (v_mid.real * v.real + v_mid.imag * v.imag) < 0:
                v_mid = -v_mid
            z_half, _ = _rk4(field, z_h1, v_mid, h / 2)
            err = abs(z_full - z_half)
            if err > tol * max(scale, abs(z)):
                h /= 2
                if h < min_step:
                    raise StepUnderflow(f"step collapsed near {z}")
                continue
            z_new = z_half  # more accurate of the two
            v_new = field(z_new)
            if (v_new.real * v_mid.real + v_new.imag * v_mid.imag) < 0:
                v_new = -v_new
            if stop(z_new):
                z_cross = _bisect_stop(field, z, v, h, stop)
                vertices.append(z_cross)
                return ContourArc(vertices)
            z, v = z_new, v_new
            if n % record_every == 0 or True:
                vertices.append(z)
            if abs(z) > escape_radius:
                raise Runaway(f"trace left escape radius at {z}")
            if err < tol * max(scale, abs(z)) / 64:
                h *= 2
        raise TraceFailure("step budget exhausted before stop fired")


def _bisect_stop(field, z0, v0, h, stop, bits=60):
    """Refine the stop crossing along the last step by bisection in the
    step fraction."""
    lo, hi = mpf(0), mpf(1)
    for _ in range(bits):
        mid = (lo + hi) / 2
        z_mid, _ = _rk4(field, z0, v0, h * mid)
        if stop(z_mid):
            hi = mid
        else:
            lo = mid
    z_end, _ = _rk4(field, z0, v0, h * hi)
    return z_end


def trace_until_radius(field, start, radius, step, **kw):
    """Convenience wrapper: trace until |z| >= radius."""
    return trace_ode(
        field,
        start,
        lambda z: abs(z) >= radius,
        step,
        escape_radius=radius * 4,
        **kw,
    )
