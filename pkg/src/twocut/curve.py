"""Spectral curve of the cubic weight: branch points, Q^(1/2), the level
function U, critical graph, equilibrium density, and the S-contour.

The weight e^{-N V} with V(z) = -z^3/3 + t z leads to a degree-4 polynomial

    Q(z) = (1/4) (z - a1)(z - b1)(z - a2)(z - b2),

whose square root (branch ~ z^2/2 at infinity) generates every other object
in the package.  In the two-cut phase the four roots are distinct and are
pinned by eight real conditions: the elementary symmetric values

    e1 = 0,   e2 = -2t,   e3 = -4,

plus two Boutroux-type reality constraints Re f4 = Re f5 = 0 forcing the
periods of Q^(1/2) over the cut [a1, b1] and the connecting arc [a2, b1] to
be purely imaginary.  The solver runs Newton on this 8-real system along a
continuation path from one reference solution computed at a symmetric
parameter on the ray arg t = pi/3.
"""

from dataclasses import dataclass, field

from mpmath import (
    mp,
    mpf,
    mpc,
    sqrt,
    exp,
    pi,
    fsum,
    arg,
    polyroots,
    nstr,
)

from .errors import (
    WrongPhase,
    OnCut,
    ContinuationStall,
    LabelAmbiguity,
    TopologyMismatch,
    ArcConstructionFailure,
    BoundaryTooClose,
)
from .precision import PrecisionContext, CTX64, CTX32
from .geometry import ContourArc, route_around, segment_crosses_arc
from .quadrature import gauss_jacobi_nodes, gauss_legendre_nodes, integrate_segment
from .solving import newton_solve, fd_jacobian
from .tracing import trace_ode, trajectory_field, orthogonal_field, critical_directions

I_UNIT = mpc(0, 1)

T_REFERENCE = "4*exp(i*pi/3)"  # symmetric two-cut anchor for continuation


def potential(z, t):
    return -(z ** 3) / 3 + t * z


def potential_prime(z, t):
    return -(z ** 2) + t


# ---------------------------------------------------------------------------
# domain types


@dataclass
class OneCutTriple:
    """Branch data in the one-cut phase: soft edges a, b, double point c = -x."""

    a: mpc
    b: mpc
    c: mpc
    x: mpc
    t: mpc


@dataclass
class EndpointSet:
    """The four simple branch points of Q in the two-cut phase.

    Labeling follows the S-contour chain: the contour arrives from
    e^{i pi} infinity at a1, runs through the cut [a1, b1], crosses to a2,
    runs through [a2, b2] and leaves toward e^{i pi/3} infinity.
    """

    a1: mpc
    b1: mpc
    a2: mpc
    b2: mpc
    t: mpc
    residual_inf_norm: mpf = mpf(0)
    phase: str = "TwoCut"
    jacobian_det: object = None

    def as_tuple(self):
        return (self.a1, self.b1, self.a2, self.b2)

    @property
    def scale(self):
        return max(abs(e) for e in self.as_tuple())

    def elementary_symmetric(self):
        z1, z2, z3, z4 = self.as_tuple()
        e1 = z1 + z2 + z3 + z4
        e2 = z1 * z2 + z1 * z3 + z1 * z4 + z2 * z3 + z2 * z4 + z3 * z4
        e3 = z2 * z3 * z4 + z1 * z3 * z4 + z1 * z2 * z4 + z1 * z2 * z3
        e4 = z1 * z2 * z3 * z4
        return e1, e2, e3, e4

    def s_k(self, k):
        return (self.b1 ** k - self.a1 ** k) + (self.b2 ** k - self.a2 ** k)

    @property
    def mu1(self):
        # 1/z^2 coefficient of Q^(1/2): from Q = ((z^2-t)/2 + 1/z + mu1/z^2...)^2
        e4 = self.elementary_symmetric()[3]
        return (e4 - self.t ** 2) / 4


@dataclass
class CutSystem:
    """Cut geometry attached to an EndpointSet.

    straight_cuts : the two segments [a1,b1], [a2,b2] used as quadrature
                    branch cuts of Q^(1/2) (period integrals are homotopy
                    invariant, so straight cuts are always used for numbers)
    i_arc         : connector from b1 to a2; straight segment by default,
                    replaced by a traced arc inside {U < 0} by s_contour
    j1, j2        : the short critical trajectories once traced (optional)
    gamma         : the assembled S-contour polyline (optional)
    """

    endpoints: EndpointSet
    straight_cuts: tuple = None
    i_arc: ContourArc = None
    j1: ContourArc = None
    j2: ContourArc = None
    gamma: ContourArc = None

    def __post_init__(self):
        e = self.endpoints
        if self.straight_cuts is None:
            self.straight_cuts = (
                ContourArc([e.a1, e.b1], endpoint_tags=("a1", "b1"), kind="cut"),
                ContourArc([e.a2, e.b2], endpoint_tags=("a2", "b2"), kind="cut"),
            )
        if self.i_arc is None:
            self.i_arc = ContourArc([e.b1, e.a2], endpoint_tags=("b1", "a2"), kind="cut")

    def obstacles(self):
        return [self.straight_cuts[0], self.straight_cuts[1], self.i_arc]

    @property
    def scale(self):
        return self.endpoints.scale


# ---------------------------------------------------------------------------
# branch of Q^(1/2)


def pair_sqrt(z, a, b):
    """sqrt((z-a)(z-b)) with branch cut exactly on the segment [a, b] and
    behavior z - (a+b)/2 + O(1/z) at infinity."""
    zeta = (2 * z - a - b) / (b - a)
    return (b - a) / 2 * sqrt(zeta - 1) * sqrt(zeta + 1)


def q_half(z, E, guard=0.0):
    """The branch of Q^(1/2) ~ z^2/2 with cuts on the straight segments
    [a1, b1] and [a2, b2]."""
    z = mpc(z)
    if guard:
        for a, b in ((E.a1, E.b1), (E.a2, E.b2)):
            from .geometry import point_segment_distance

            if point_segment_distance(z, a, b) < guard:
                raise OnCut("z is on a quadrature cut; request a one-sided trace")
    return pair_sqrt(z, E.a1, E.b1) * pair_sqrt(z, E.a2, E.b2) / 2


def q_half_trace(s, E, cut, side=+1):
    """One-sided trace of Q^(1/2) on a straight cut.

    cut  : 1 for [a1,b1], 2 for [a2,b2]
    side : +1 for the left of the (a -> b) orientation, -1 for the right
    """
    if cut == 1:
        a, b, oa, ob = E.a1, E.b1, E.a2, E.b2
    else:
        a, b, oa, ob = E.a2, E.b2, E.a1, E.b1
    h = (b - a) / 2
    xi = (2 * s - a - b) / (b - a)
    val = I_UNIT / 2 * h * sqrt(1 - xi) * sqrt(1 + xi) * pair_sqrt(s, oa, ob)
    return val if side > 0 else -val


# ---------------------------------------------------------------------------
# series data at infinity (tails of period and phase integrals)


def series_inv_q_half(E, order=12):
    """Coefficients c_j with 1/Q^(1/2)(z) = sum_j c_j z^(-j), j >= 2,
    valid for |z| > max |branch point|."""
    return _half_power_series(E, +1, order)


def series_q_half_residual(E, order=12):
    """Coefficients r_j with Q^(1/2)(z) = z^2/2 * sum_j s_j z^(-j); returned
    as the full list s_j including s_0 = 1."""
    return _half_power_series(E, -1, order)


def _half_power_series(E, sign, order):
    # prod (1 - e_i/z)^(-sign/2) = exp( sign/2 * sum_k p_k z^-k / k )
    roots = E.as_tuple()
    p = [fsum(r ** k for r in roots) for k in range(1, order + 1)]
    a = [mpf(0)] + [mpf(sign) / 2 * p[k - 1] / k for k in range(1, order + 1)]
    e = [mpc(1)] + [mpc(0)] * order
    for n in range(1, order + 1):
        e[n] = fsum(k * a[k] * e[n - k] for k in range(1, n + 1)) / n
    return e


def q_half_tail_integral(z, E, order=12):
    """Integral of Q^(1/2) - (s^2 - t)/2 - 1/s from z to infinity along the
    outgoing ray, by the convergent series at infinity."""
    s = series_q_half_residual(E, order)
    # Q^(1/2) = z^2/2 (s_0 + s_1/z + ...) ; subtract z^2/2 - t/2... the
    # exact subtraction (s^2-t)/2 + 1/s corresponds to removing the terms
    # through 1/z, so the remainder starts at 1/z^2.
    coeffs = [s[j] / 2 for j in range(len(s))]  # coefficient of z^(2-j)
    # remainder coefficients of z^(2-j) for j >= 4
    out = mpc(0)
    zp = z ** -1
    for j in range(4, len(coeffs)):
        k = j - 2  # power of 1/z is k >= 2
        out += coeffs[j] / (k - 1) * zp ** (k - 1)
    return out


def inv_q_half_tail_integral(z, E, order=12):
    """Integral of 1/Q^(1/2) from z to infinity along the outgoing ray."""
    c = series_inv_q_half(E, order)
    out = mpc(0)
    for j in range(len(c)):
        k = j + 2  # 1/w = sum 2*c_j z^-(2+j)
        out += 2 * c[j] / (k - 1) * z ** (-(k - 1))
    return out


# ---------------------------------------------------------------------------
# one-cut branch data


def _track_cubic_root(t_target, ctx=CTX64, steps=32):
    """Analytic continuation of the root x(0) = e^{2 pi i/3} of
    x^3 - t x - 1 = 0 along the straight segment [0, t_target]."""
    with ctx.workdps():
        t_target = mpc(t_target)
        x = exp(2 * pi * I_UNIT / 3)
        sq = exp(pi * I_UNIT / 3)  # continuation of sqrt(x)
        k = 0
        step_count = steps
        while k < step_count:
            k += 1
            t = t_target * mpf(k) / step_count
            roots = polyroots([1, 0, -t, -1], maxsteps=200, extraprec=60)
            dists = sorted(((abs(r - x), i) for i, r in enumerate(roots)), key=lambda q: q[0])
            if dists[0][0] > 0.5 * dists[1][0] and step_count < 4096:
                # ambiguous match: restart with finer stepping
                step_count *= 2
                k = 0
                x = exp(2 * pi * I_UNIT / 3)
                sq = exp(pi * I_UNIT / 3)
                continue
            x = roots[dists[0][1]]
            s = sqrt(x)
            sq = s if abs(s - sq) <= abs(-s - sq) else -s
        return x, sq


def endpoints_one_cut(t, ctx=CTX64, region_hint="main"):
    """Branch data (a, b, c, x) in the one-cut phase.

    region_hint selects the analytic piece of x(t):
      'main'    : region reachable from t = 0  (default)
      'birth_a' : sliver between the rotated ray e^{2 pi i/3}(t_cr, oo) and
                  the a-side birth curve
      'birth_b' : sliver between the real ray (t_cr, oo) and the b-side
                  birth curve
    The sliver pieces are obtained from the main piece through the exact
    symmetries of the root family.
    """
    with ctx.workdps():
        t = mpc(t)
        if region_hint == "main":
            x, sq = _track_cubic_root(t, ctx)
        elif region_hint == "birth_b":
            xm, sqm = _track_cubic_root(t.conjugate(), ctx)
            x = xm.conjugate()
            sq = sqm.conjugate()
        elif region_hint == "birth_a":
            rot = exp(-2 * pi * I_UNIT / 3)
            xm, _ = _track_cubic_root(t * rot, ctx)
            x = exp(4 * pi * I_UNIT / 3) * xm
            s = sqrt(x)
            # re-anchor sqrt continuity through the rotation symmetry
            sq = s if (s * exp(-2 * pi * I_UNIT / 3)).real > 0 else -s
        else:
            raise ValueError(f"unknown region hint {region_hint!r}")
        resid = abs(x ** 3 - t * x - 1)
        if resid > ctx.tol * max(1, abs(x)) ** 3 * 100:
            raise WrongPhase(f"cubic residual {nstr(resid, 3)} too large")
        a = x - I_UNIT * sqrt(mpf(2)) / sq
        b = x + I_UNIT * sqrt(mpf(2)) / sq
        return OneCutTriple(a=a, b=b, c=-x, x=x, t=t)


# ---------------------------------------------------------------------------
# the 8-real endpoint system


# fixed rule for the endpoint-system period integrals; 96 nodes leave a
# truncation far below the 1e-12 residual target even with the geometric
# safety factor of moderately close cuts
_GJ_NODES = 96


def _period_f4(E, dps_nodes=None):
    """Integral over the [a1, b1] cut of the left trace of Q^(1/2)."""
    a, b = E.a1, E.b1
    mid, h = (a + b) / 2, (b - a) / 2
    nodes, weights = gauss_jacobi_nodes(_GJ_NODES, "0.5", "0.5", mp.dps)
    tot = fsum(w * pair_sqrt(mid + h * x, E.a2, E.b2) for x, w in zip(nodes, weights))
    return tot * I_UNIT / 2 * h ** 2


def _period_f5(E):
    """Integral over the connector [a2, b1] of Q^(1/2) (single valued)."""
    a, b = E.a2, E.b1
    mid, h = (a + b) / 2, (b - a) / 2
    habs = abs(h)
    nodes, weights = gauss_jacobi_nodes(_GJ_NODES, "0.5", "0.5", mp.dps)
    tot = fsum(
        w
        * q_half(mid + h * x, E)
        / ((habs * (1 - x)) ** mpf("0.5") * (habs * (1 + x)) ** mpf("0.5"))
        for x, w in zip(nodes, weights)
    )
    return tot * h * habs


def _vector_to_endpoints(v, t):
    return EndpointSet(
        a1=mpc(v[0], v[1]),
        b1=mpc(v[2], v[3]),
        a2=mpc(v[4], v[5]),
        b2=mpc(v[6], v[7]),
        t=mpc(t),
    )


def endpoint_residual(v, t):
    """The eight real residuals, ordered as
    (Re e1, Im e1, Re(e2+2t), Im(e2+2t), Re(e3+4), Im(e3+4), Re f4, Re f5).
    The ordering fixes the sign of the Jacobian determinant, which must be
    positive at every genuine two-cut solution."""
    E = _vector_to_endpoints(v, t)
    e1, e2, e3, _ = E.elementary_symmetric()
    f4 = _period_f4(E)
    f5 = _period_f5(E)
    r2 = e2 + 2 * mpc(t)
    r3 = e3 + 4
    return [e1.real, e1.imag, r2.real, r2.imag, r3.real, r3.imag, f4.real, f5.real]


def _reflect(z):
    # reflection across the line arg z = 2 pi/3 (fixes it pointwise)
    return exp(4 * pi * I_UNIT / 3) * z.conjugate()


def _symmetric_seed(rho):
    """Heuristic endpoints at t = rho e^{i pi/3}: cuts of half-length
    ~ sqrt(2)/rho^(1/4) across the saddles +- sqrt(t)."""
    t = rho * exp(I_UNIT * pi / 3)
    s1 = -sqrt(t)
    if s1.real > 0:
        s1 = -s1
    r = sqrt(mpf(2)) / rho ** mpf("0.25")
    d = r * exp(I_UNIT * pi / 6)
    a1, b1 = s1 - d, s1 + d
    return a1, b1, _reflect(b1), _reflect(a1), t


def solve_reference(rho=4, ctx=CTX64):
    """Reference two-cut solution at the symmetric point t = rho e^{i pi/3},
    via the 4-real-unknown reflection-reduced system, then polished on the
    full 8-real system."""
    with ctx.workdps():
        a1g, b1g, a2g, b2g, t = _symmetric_seed(mpf(rho))

        def reduced(u):
            a1 = mpc(u[0], u[1])
            b1 = mpc(u[2], u[3])
            v = [
                a1.real,
                a1.imag,
                b1.real,
                b1.imag,
                _reflect(b1).real,
                _reflect(b1).imag,
                _reflect(a1).real,
                _reflect(a1).imag,
            ]
            r = endpoint_residual(v, t)
            E = _vector_to_endpoints(v, t)
            e1, e2, e3, _ = E.elementary_symmetric()
            # components along the symmetry-fixed directions
            s1 = (e1 * exp(-2 * pi * I_UNIT / 3)).real
            s2 = ((e2 + 2 * t) * exp(-pi * I_UNIT / 3)).real
            return [s1, s2, (e3 + 4).real, r[6]]

        u0 = [a1g.real, a1g.imag, b1g.real, b1g.imag]
        coarse = PrecisionContext(ctx.working_digits, 1e-20, ctx.max_iterations)
        u, _ = newton_solve(reduced, u0, coarse)
        a1 = mpc(u[0], u[1])
        b1 = mpc(u[2], u[3])
        v0 = [
            a1.real,
            a1.imag,
            b1.real,
            b1.imag,
            _reflect(b1).real,
            _reflect(b1).imag,
            _reflect(a1).real,
            _reflect(a1).imag,
        ]
        return _polish(v0, t, ctx)


def _polish(v0, t, ctx, reuse_jacobian=False, tol=None):
    if tol is None:
        tol = min(mpf("1e-13"), ctx.tol * mpf(10) ** 10)
    solver_ctx = PrecisionContext(ctx.working_digits, tol, ctx.max_iterations)
    v, trace = newton_solve(
        lambda w: endpoint_residual(w, t), v0, solver_ctx, reuse_jacobian=reuse_jacobian
    )
    E = _vector_to_endpoints(v, t)
    E.residual_inf_norm = max(abs(x) for x in endpoint_residual(v, t))
    return E


def _relabel_like(E, prev):
    """Match labels of E to the nearest endpoints of prev (continuation)."""
    vals = list(E.as_tuple())
    out = []
    for target in prev.as_tuple():
        dists = sorted((abs(v - target), i) for i, v in enumerate(vals) if v is not None)
        if len(dists) > 1 and dists[0][0] > 0.6 * dists[1][0]:
            raise LabelAmbiguity("endpoint labels ambiguous during continuation")
        i = dists[0][1]
        out.append(vals[i])
        vals[i] = None
    return EndpointSet(
        a1=out[0], b1=out[1], a2=out[2], b2=out[3], t=E.t,
        residual_inf_norm=E.residual_inf_norm,
    )


class EndpointSolver:
    """Continuation-based solver for the two-cut endpoint system.

    One reference solution (symmetric t) is computed lazily; targets are then
    reached along a radial-then-angular path inside the two-cut wedge, with
    adaptive stepping and label tracking.  Solutions are cached by t.
    """

    def __init__(self, ctx=CTX64, reference_rho=4, solve_tol=None):
        self.ctx = ctx
        self.reference_rho = mpf(reference_rho)
        self.solve_tol = solve_tol  # None: as deep as the context allows
        self._cache = {}
        self._reference = None

    def reference(self):
        if self._reference is None:
            self._reference = solve_reference(self.reference_rho, self.ctx)
            self._validate_reference_labels(self._reference)
        return self._reference

    def _validate_reference_labels(self, E):
        # a1 carries the orthogonal trajectory escaping toward arg z = pi;
        # cheap proxy at the reference: a1 is the leftmost endpoint and the
        # chain a1 -> b1 -> a2 -> b2 is ordered along the contour
        pts = sorted(E.as_tuple(), key=lambda z: z.real)
        if abs(pts[0] - E.a1) > 1e-12 * E.scale or abs(pts[-1] - E.b2) > 1e-12 * E.scale:
            raise LabelAmbiguity("reference labeling violated the chain order")

    def solve(self, t, seed=None):
        with self.ctx.workdps():
            t = mpc(t)
            key = nstr(t, self.ctx.working_digits - 4)
            if key in self._cache:
                return self._cache[key]
            if seed is not None:
                E = _polish(
                    _endpoints_to_vector(seed),
                    t,
                    self.ctx,
                    reuse_jacobian=True,
                    tol=self.solve_tol,
                )
                E = _relabel_like(E, seed)
            else:
                E = self._continue_to(t)
            self._cache[key] = E
            return E

    def _path_points(self, t):
        """Radial leg along arg = pi/3, then angular leg at |t| = const."""
        t_ref = self.reference_rho * exp(I_UNIT * pi / 3)
        r, th = abs(t), arg(t)
        mid = r * exp(I_UNIT * pi / 3)
        return [(t_ref, mid), (mid, t)]

    def _continue_to(self, t):
        E = self.reference()
        for leg_start, leg_end in self._path_points(t):
            if abs(leg_end - leg_start) < mpf("1e-30"):
                continue
            E = self._walk(E, leg_start, leg_end)
        return E

    def _walk(self, E, t_from, t_to):
        total = abs(t_to - t_from)
        pos = mpf(0)
        step = min(mpf(1), mpf("0.5") / max(total, mpf("0.1")))
        fails = 0
        while pos < 1:
            nxt = min(mpf(1), pos + step)
            t_try = t_from + (t_to - t_from) * nxt
            try:
                En = _polish(_endpoints_to_vector(E), t_try, self.ctx, reuse_jacobian=True)
                En = _relabel_like(En, E)
                _reject_collision(En)
            except Exception:
                fails += 1
                step /= 2
                if step < mpf("1e-6"):
                    raise ContinuationStall(
                        f"continuation stalled near t = {nstr(t_from + (t_to - t_from) * pos, 8)}"
                    )
                continue
            E, pos = En, nxt
            fails = 0
            step = min(step * 2, mpf("0.25"))
        return E


def _reject_collision(E, rel=1e-5):
    pts = E.as_tuple()
    scale = E.scale
    for i in range(4):
        for j in range(i + 1, 4):
            if abs(pts[i] - pts[j]) < rel * scale:
                raise BoundaryTooClose("branch points nearly collide (phase boundary)")


def _endpoints_to_vector(E):
    return [
        E.a1.real, E.a1.imag, E.b1.real, E.b1.imag,
        E.a2.real, E.a2.imag, E.b2.real, E.b2.imag,
    ]


def solve_endpoints_two_cut(t, seed=None, solver=None, ctx=CTX64, with_jacobian=False):
    """Solve the two-cut endpoint system at t (continuation from the stored
    reference when no seed is given).  With with_jacobian=True the numerical
    Jacobian determinant of the 8-real system is attached for the positivity
    diagnostic."""
    solver = solver or EndpointSolver(ctx)
    E = solver.solve(t, seed=seed)
    if with_jacobian:
        from mpmath import det

        with ctx.workdps():
            J = fd_jacobian(
                lambda v: endpoint_residual(v, mpc(t)), _endpoints_to_vector(E), ctx
            )
            E.jacobian_det = det(J)
    return E


# ---------------------------------------------------------------------------
# level function U and geometry built on it


def u_function(z, cuts, ctx=CTX64):
    """U(z) = Re( 2 * integral from b2 to z of Q^(1/2) ), path independent
    because all cut periods of Q^(1/2) are purely imaginary.  Paths are
    routed around the cuts so no jump bookkeeping is needed."""
    E = cuts.endpoints
    with ctx.workdps():
        z = mpc(z)
        val = phase_integral(z, cuts, ctx)
        return 2 * val.real


def graded_path_integral(f, vertices, E, ctx):
    """Integral of f along a polyline, with each leg subdivided so that no
    piece is much longer than its distance to the nearest branch point.
    Keeps plain Gauss-Legendre spectrally convergent on every piece even
    when the path skirts a square-root singularity."""
    from .geometry import point_segment_distance

    special = E.as_tuple()
    total = mpc(0)
    for a, b in zip(vertices, vertices[1:]):
        stack = [(mpc(a), mpc(b), 0)]
        while stack:
            u, v, depth = stack.pop()
            L = abs(v - u)
            d = min(point_segment_distance(p, u, v) for p in special)
            if depth < 14 and L > 3 * max(d, L / 4096):
                mid = (u + v) / 2
                stack.append((u, mid, depth + 1))
                stack.append((mid, v, depth + 1))
            else:
                total += integrate_segment(f, u, v, ctx)
    return total


def phase_integral(z, cuts, ctx=CTX64, waypoint_hint=None):
    """Integral of Q^(1/2) from b2 to z along a cut-avoiding polyline."""
    E = cuts.endpoints
    scale = E.scale
    margin = mpf("1e-3") * scale
    z = mpc(z)
    if abs(z - E.b2) < mpf("1e-25") * scale:
        return mpc(0)
    start_dir = (E.b2 - E.a2) / abs(E.b2 - E.a2)
    w0 = E.b2 + min(mpf("0.3") * scale, abs(z - E.b2) / 2) * start_dir
    pts = [w0] if waypoint_hint is None else [w0] + list(waypoint_hint)
    f = lambda s: q_half(s, E)
    total = integrate_segment(f, E.b2, w0, ctx, left_exp=0.5)
    standoff = near_cut_standoff(z, cuts)
    if standoff is not None:
        path = _routed(pts[-1], standoff, cuts, margin) + [z]
    else:
        path = _routed(pts[-1], z, cuts, margin)
    total += graded_path_integral(f, pts + path[1:], E, ctx)
    return total


def _routed(a, b, cuts, margin):
    obstacles = cuts.obstacles()
    return route_around(a, b, obstacles, margin)


def branch_exit_direction(e, cuts):
    """Unit direction leaving the branch point e away from every incident
    cut arc (bisector of the complement)."""
    tangents = []
    for obs in cuts.obstacles():
        if abs(obs.vertices[0] - e) < mpf("1e-20"):
            t = obs.vertices[1] - e
        elif abs(obs.vertices[-1] - e) < mpf("1e-20"):
            t = obs.vertices[-2] - e
        else:
            continue
        tangents.append(t / abs(t))
    if not tangents:
        return mpc(1)
    total = fsum(tangents)
    if abs(total) > mpf("0.3"):
        return -total / abs(total)
    # nearly opposite incident arcs: leave sideways
    side = I_UNIT * tangents[0]
    return side / abs(side)


def endpoint_target_path(z_to, cuts, margin):
    """(waypoint, branch_point) for integration paths that terminate at a
    branch point: the last leg [waypoint -> branch point] is integrated
    with the square-root endpoint rule, everything before it is routed."""
    E = cuts.endpoints
    scale = E.scale
    for e in E.as_tuple():
        if abs(z_to - e) < mpf("1e-9") * scale:
            d = branch_exit_direction(e, cuts)
            w1 = e + mpf("0.25") * scale * d
            return w1, e
    return None, None


def near_cut_standoff(z, cuts, clearance=None):
    """For a target hugging a cut (one-sided trace evaluation), return a
    standoff point on the same side at routing-safe distance, or None when
    the target is in the open.  The final descent [standoff -> z] stays on
    one side of the cut, so it never crosses it."""
    from .geometry import point_segment_distance

    E = cuts.endpoints
    scale = E.scale
    clearance = clearance if clearance is not None else mpf("0.08") * scale
    z = mpc(z)
    best = None
    for obs in cuts.obstacles():
        for a, b in obs.segments():
            d = point_segment_distance(z, a, b)
            if best is None or d < best[0]:
                best = (d, a, b)
    d, a, b = best
    if d > clearance / 2:
        return None
    tdir = (b - a) / abs(b - a)
    nrm = I_UNIT * tdir
    side = 1 if ((z - a) / tdir).imag >= 0 else -1
    # project onto the segment, stand off perpendicular on z's side
    tproj = ((z - a).real * tdir.real + (z - a).imag * tdir.imag)
    base = a + tproj * tdir
    return base + side * clearance * nrm


def critical_graph(E, escape_radius=None, ctx=CTX32, tol=2e-13):
    """Critical trajectories of -Q dz^2 from each branch point.

    Returns (short, unbounded, hit_errors):
      short      : dict mapping ordered label pairs to traced arcs
      unbounded  : list of (label, escape angle, arc)
      hit_errors : dict mapping label pairs to the terminal distance
    Raises TopologyMismatch unless exactly the three short trajectories
    (a1,b1), (b1,a2), (a2,b2) are found.

    A transverse tracing error eps turns into a miss of order eps^(2/3)
    near the target zero (the local coordinate there is (z-e)^(3/2)), so
    the capture radius is set well above that amplified error but still
    an order below the 1e-6 * scale acceptance bound.
    """
    with ctx.workdps():
        labels = ("a1", "b1", "a2", "b2")
        pts = dict(zip(labels, E.as_tuple()))
        scale = E.scale
        if escape_radius is None:
            escape_radius = 12 * scale
        Q = lambda z: _q_poly(z, E)
        capture = mpf("2e-7") * scale
        offset = mpf("1e-6") * scale
        field = trajectory_field(Q)
        short, unbounded, hit_errors = {}, [], {}
        for lab in labels:
            e = pts[lab]
            qp = _q_poly_prime(e, E)
            for theta in critical_directions(qp):
                z0 = e + offset * exp(I_UNIT * theta)
                others = [(l, p) for l, p in pts.items() if l != lab]

                def stop(z, _others=others):
                    return any(abs(z - p) < capture for _, p in _others) or abs(z) > escape_radius

                try:
                    arc_t = trace_ode(
                        field,
                        z0,
                        stop,
                        step=offset * 4,
                        initial_direction=exp(I_UNIT * theta),
                        escape_radius=escape_radius * 2,
                        tol=tol,
                        ctx=ctx,
                    )
                except Exception as exc:
                    raise TopologyMismatch(f"trace from {lab} failed: {exc}") from exc
                zf = arc_t.end
                if abs(zf) > escape_radius * mpf("0.9"):
                    unbounded.append((lab, arg(zf), arc_t))
                    continue
                hit = min(((abs(zf - p), l) for l, p in others), key=lambda q: q[0])
                err, lab2 = hit
                pair = tuple(sorted((lab, lab2)))
                if pair not in short or err < hit_errors[pair]:
                    arc_t.vertices.insert(0, pts[lab])
                    arc_t.vertices.append(pts[lab2])
                    arc_t.endpoint_tags = (lab, lab2)
                    arc_t.kind = "traj"
                    short[pair] = arc_t
                    hit_errors[pair] = err
        expected = {("a1", "b1"), ("a2", "b1"), ("a2", "b2")}
        if set(short.keys()) != expected:
            raise TopologyMismatch(
                f"short trajectories found: {sorted(short.keys())}, expected {sorted(expected)}"
            )
        if len(unbounded) != 6:
            raise TopologyMismatch(f"{len(unbounded)} unbounded trajectories, expected 6")
        return short, unbounded, hit_errors


def _q_poly(z, E):
    a1, b1, a2, b2 = E.as_tuple()
    return (z - a1) * (z - b1) * (z - a2) * (z - b2) / 4


def _q_poly_prime(e, E):
    others = [p for p in E.as_tuple() if p != e]
    return (e - others[0]) * (e - others[1]) * (e - others[2]) / 4


def orthogonal_escape_labels(E, ctx=CTX32, escape_radius=None):
    """Escape angles of the orthogonal trajectories from each branch point;
    used to validate the chain labeling (a1 owns the arg pi direction, b2
    owns arg pi/3)."""
    with ctx.workdps():
        labels = ("a1", "b1", "a2", "b2")
        pts = dict(zip(labels, E.as_tuple()))
        scale = E.scale
        if escape_radius is None:
            escape_radius = 12 * scale
        Q = lambda z: _q_poly(z, E)
        field = orthogonal_field(Q)
        offset = mpf("1e-6") * scale
        angles = {lab: [] for lab in labels}
        for lab in labels:
            e = pts[lab]
            qp = _q_poly_prime(e, E)
            for theta in critical_directions(qp, orthogonal=True):
                z0 = e + offset * exp(I_UNIT * theta)
                try:
                    arc_t = trace_ode(
                        field,
                        z0,
                        lambda z: abs(z) > escape_radius,
                        step=offset * 4,
                        initial_direction=exp(I_UNIT * theta),
                        escape_radius=escape_radius * 4,
                        tol=1e-9,
                        ctx=ctx,
                    )
                    angles[lab].append(arg(arc_t.end))
                except Exception:
                    angles[lab].append(None)
        return angles


def validate_labels(E, ctx=CTX32):
    """Check that a1 (resp. b2) carries an orthogonal trajectory escaping at
    angle pi (resp. pi/3); raises LabelAmbiguity otherwise."""
    angles = orthogonal_escape_labels(E, ctx)

    def has_dir(lab, target, tol=0.3):
        return any(
            a is not None and abs(_angle_diff(a, target)) < tol for a in angles[lab]
        )

    if not has_dir("a1", pi):
        raise LabelAmbiguity("a1 does not own the arg = pi escape direction")
    if not has_dir("b2", pi / 3):
        raise LabelAmbiguity("b2 does not own the arg = pi/3 escape direction")
    return angles


def _angle_diff(a, b):
    from mpmath import fmod

    d = fmod(a - b + pi, 2 * pi)
    if d < 0:
        d += 2 * pi
    return d - pi


def equilibrium_density(s, E):
    """Density of the equilibrium measure with respect to arclength at an
    interior point of a cut: |Q^(1/2)(s)| / pi (side independent)."""
    a1, b1, a2, b2 = E.as_tuple()
    scale = E.scale
    for e in E.as_tuple():
        if abs(s - e) < mpf("1e-8") * scale:
            raise OnCut("density evaluation too close to a branch point")
    prod = abs(s - a1) * abs(s - b1) * abs(s - a2) * abs(s - b2)
    return sqrt(prod) / (2 * pi)


def cut_masses(E, ctx=CTX64):
    """Equilibrium masses of the two cuts by period integrals over the
    straight representatives: mass_i = -(1/pi i) * integral of the left
    trace of Q^(1/2) over [a_i, b_i]."""
    with ctx.workdps():
        masses = []
        for cut, (a, b) in ((1, (E.a1, E.b1)), (2, (E.a2, E.b2))):
            val = integrate_segment(
                lambda x, cut=cut: q_half_trace(x, E, cut, +1),
                a,
                b,
                ctx,
                left_exp=0.5,
                right_exp=0.5,
            )
            masses.append((-val / (pi * I_UNIT)))
        return masses


def first_moment_density(E, ctx=CTX64):
    """First moment of the equilibrium measure by quadrature over the cuts
    (cross-check against the series value (e4 - t^2)/4)."""
    with ctx.workdps():
        total = mpc(0)
        for cut, (a, b) in ((1, (E.a1, E.b1)), (2, (E.a2, E.b2))):
            total += integrate_segment(
                lambda x, cut=cut: x * q_half_trace(x, E, cut, +1),
                a,
                b,
                ctx,
                left_exp=0.5,
                right_exp=0.5,
            )
        return -total / (pi * I_UNIT)


def s_contour(t, solver=None, ctx=CTX64, trace_ctx=CTX32):
    """Assemble the preferred S-contour through the two-cut geometry.

    Returns a CutSystem whose i_arc is threaded through {U < 0} (orthogonal
    stubs from b1 and a2 joined by a straight segment) and whose gamma is
    the full contour from e^{i pi} infinity to e^{i pi/3} infinity.
    """
    E = solve_endpoints_two_cut(t, solver=solver, ctx=ctx)
    cuts = CutSystem(E)
    short, unbounded, _ = critical_graph(E, ctx=trace_ctx)
    scale = E.scale
    escape = 12 * scale

    with trace_ctx.workdps():
        tail1 = _orthogonal_escape_arc(E, "a1", pi, escape, trace_ctx)
        tail2 = _orthogonal_escape_arc(E, "b2", pi / 3, escape, trace_ctx)
        i_arc = _thread_i_arc(E, cuts, trace_ctx)

    def oriented(arc, start_pt):
        if abs(arc.vertices[0] - start_pt) <= abs(arc.vertices[-1] - start_pt):
            return list(arc.vertices)
        return list(reversed(arc.vertices))

    trim = mpf("3e-6") * scale

    def trimmed(vertices, start_pt, end_pt):
        # drop tracer zigzags inside the junction disks and pin the exact
        # branch points, so consecutive pieces join cleanly
        core = [v for v in vertices if abs(v - start_pt) > trim and abs(v - end_pt) > trim]
        return [start_pt] + core + [end_pt]

    j1 = short[("a1", "b1")]
    j2 = short[("a2", "b2")]
    tail1_rev = list(reversed(tail1.vertices))
    gamma_vertices = (
        trimmed(tail1_rev, tail1_rev[0], E.a1)
        + trimmed(oriented(j1, E.a1), E.a1, E.b1)
        + trimmed(oriented(i_arc, E.b1), E.b1, E.a2)
        + trimmed(oriented(j2, E.a2), E.a2, E.b2)
        + trimmed(tail2.vertices, E.b2, tail2.vertices[-1])
    )
    gamma = ContourArc(
        _dedupe(gamma_vertices), endpoint_tags=("inf(pi)", "inf(pi/3)"), kind="contour"
    )
    return CutSystem(
        endpoints=E,
        straight_cuts=cuts.straight_cuts,
        i_arc=i_arc,
        j1=j1,
        j2=j2,
        gamma=gamma,
    )


def _dedupe(vertices, tol=1e-25):
    out = [vertices[0]]
    for v in vertices[1:]:
        if abs(v - out[-1]) > tol:
            out.append(v)
    return out


def _orthogonal_escape_arc(E, label, target_angle, escape, ctx):
    pts = dict(zip(("a1", "b1", "a2", "b2"), E.as_tuple()))
    e = pts[label]
    qp = _q_poly_prime(e, E)
    Q = lambda z: _q_poly(z, E)
    field = orthogonal_field(Q)
    offset = mpf("1e-6") * E.scale
    best = None
    for theta in critical_directions(qp, orthogonal=True):
        z0 = e + offset * exp(I_UNIT * theta)
        try:
            arc_t = trace_ode(
                field,
                z0,
                lambda z: abs(z) > escape,
                step=offset * 4,
                initial_direction=exp(I_UNIT * theta),
                escape_radius=escape * 4,
                tol=1e-9,
                ctx=ctx,
            )
        except Exception:
            continue
        d = abs(_angle_diff(arg(arc_t.end), target_angle))
        if best is None or d < best[0]:
            best = (d, arc_t)
    if best is None or best[0] > 0.3:
        raise ArcConstructionFailure(
            f"no orthogonal trajectory from {label} escapes near angle {nstr(target_angle, 5)}"
        )
    arc_t = best[1]
    arc_t.vertices.insert(0, e)
    arc_t.endpoint_tags = (label, f"inf({nstr(target_angle, 3)})")
    arc_t.kind = "orth"
    return arc_t


def _thread_i_arc(E, cuts, ctx, chunks=10):
    """Connector from b1 to a2 through {U < 0}: orthogonal stubs from both
    ends grown in chunks until the straight joint between their tips stays
    strictly inside the valley."""
    Q = lambda z: _q_poly(z, E)
    field = orthogonal_field(Q)
    scale = E.scale
    offset = mpf("1e-6") * scale
    valley_dir = exp(-I_UNIT * pi / 3)

    stubs = {}
    for label, e in (("b1", E.b1), ("a2", E.a2)):
        qp = _q_poly_prime(e, E)
        cands = []
        for theta in critical_directions(qp, orthogonal=True):
            d = exp(I_UNIT * theta)
            z_probe = e + offset * 100 * d
            u_probe = _u_quick(z_probe, E, cuts, ctx)
            score = (d * valley_dir.conjugate()).real
            cands.append((u_probe < 0, score, theta))
        cands.sort(key=lambda c: (not c[0], -c[1]))
        ok, _, theta = cands[0]
        if not ok:
            raise ArcConstructionFailure(f"no descending orthogonal direction at {label}")
        stubs[label] = (e, theta)

    max_len = 2 * abs(E.a2 - E.b1)
    step_len = max_len / chunks
    arcs = {}
    for label, (e, theta) in stubs.items():
        z0 = e + offset * exp(I_UNIT * theta)
        traced = [e, z0]
        arcs[label] = traced
    tips = {lab: arcs[lab][-1] for lab in arcs}
    state = {lab: exp(I_UNIT * stubs[lab][1]) for lab in arcs}
    for _ in range(chunks):
        for lab in arcs:
            start = arcs[lab][-1]
            budget = [mpf(0)]

            def stop(z, b=budget, s=start):
                b[0] = abs(z - s)
                return b[0] >= step_len

            arc_t = trace_ode(
                field,
                start,
                stop,
                step=step_len / 8,
                initial_direction=state[lab],
                escape_radius=1e6,
                tol=1e-9,
                ctx=ctx,
            )
            arcs[lab].extend(arc_t.vertices[1:])
            state[lab] = arcs[lab][-1] - arcs[lab][-2]
        tip1, tip2 = arcs["b1"][-1], arcs["a2"][-1]
        line = [tip1 + (tip2 - tip1) * mpf(k) / 8 for k in range(1, 8)]
        if all(_u_quick(z, E, cuts, ctx) < 0 for z in line):
            verts = arcs["b1"] + list(line) + list(reversed(arcs["a2"]))
            return ContourArc(_dedupe(verts), endpoint_tags=("b1", "a2"), kind="cut")
    raise ArcConstructionFailure("could not thread the connector through {U<0}")


def _u_quick(z, E, cuts, ctx):
    quick = PrecisionContext(ctx.working_digits, 1e-12, ctx.max_iterations)
    return u_function(z, cuts, quick)
