"""Genus-1 surface w^2 = Q(z): homology, periods, Abel map, inversion.

The two sheets are copies of the cut plane glued along the straight
quadrature cuts; sheet 0 carries the branch Q^(1/2) ~ +z^2/2.  The homology
basis is realized concretely:

  * alpha = lift of the connector I (b1 -> a2), oriented toward b1 on
    sheet 0, so that loop integrals of odd functions reduce to -2 x the
    plain integral over I;
  * beta  = lift of the cut [a1, b1], oriented so that its loop integrals
    reduce to +2 x the integral of the left trace over the cut.

With these choices the normalized period B = Im-positive, the cut masses
omega lie in (0, 1), and tau, omega come out real; the constructor checks
all of it and flips cycle orientations if a different branch-point layout
ever makes that necessary.

Abel-map paths are polylines routed around all three cuts.  Off the cuts
the plane is simply connected, so no jump bookkeeping is needed; values on
the other sheet are obtained through the involution a(z*) = -a(z).
Mod-lattice reductions land in the centered cell {x + B y : x, y in
[-1/2, 1/2)}, which is exactly the Abel image of the dissected surface
(its corners are the half-period images of b1).
"""

from dataclasses import dataclass, field

from mpmath import mp, mpf, mpc, sqrt, exp, pi, arg, nstr, nint, fsum

from .errors import (
    RealityViolation,
    NonConvergent,
    OnCycle,
    MissingPrerequisite,
)
from .precision import PrecisionContext, CTX64
from .geometry import ContourArc, point_segment_distance
from .quadrature import integrate_segment
from .curve import (
    CutSystem,
    EndpointSet,
    q_half,
    q_half_trace,
    pair_sqrt,
    phase_integral,
    series_inv_q_half,
    inv_q_half_tail_integral,
    _routed,
    I_UNIT,
)


@dataclass(frozen=True)
class SurfacePoint:
    """Point on the surface: base-plane coordinate plus sheet index.

    Sheet 0 is the sheet where w matches the branch with +z^2/2 behavior.
    """

    z: mpc
    sheet: int = 0

    def involution(self):
        return SurfacePoint(self.z, 1 - self.sheet)


@dataclass
class SurfaceConstants:
    """Everything t-dependent but index-independent on the surface."""

    cuts: CutSystem
    d0: mpc = None
    d1: mpc = None
    d2: mpc = None
    varsigma: mpc = None
    b_period: mpc = None  # B, the normalized beta period, Im > 0
    tau: mpf = None
    omega: mpf = None
    alpha_period: mpc = None  # loop integral of dz/w over alpha
    a_inf0: mpc = None  # Abel map of infinity on sheet 0
    p: mpc = None
    p_sheet_zero: int = 0
    abel_p0: mpc = None  # reduced Abel value of p^(0)
    abel_p1: mpc = None
    lattice_tol: float = 1e-10
    flipped_alpha: bool = False
    flipped_beta: bool = False
    far_radius: mpf = None
    abel_branch: dict = field(default_factory=dict)
    working_digits: int = 64
    _seed_grid: list = field(default_factory=list, repr=False)

    @property
    def endpoints(self):
        return self.cuts.endpoints

    @property
    def t(self):
        return self.cuts.endpoints.t

    def lattice_reduce(self, v):
        """Representative of [v] in the centered cell, plus the integer
        lattice coordinates that were removed: v = rep + j + B*m."""
        from mpmath import workdps

        with workdps(self.working_digits):
            v = mpc(v)
            y = v.imag / self.b_period.imag
            x = v.real - y * self.b_period.real
            jx, my = nint(x), nint(y)
            xm, ym = x - jx, y - my
            # nint rounds half to even; fold the right/top edges back
            if xm >= mpf("0.5"):
                xm -= 1
                jx += 1
            if ym >= mpf("0.5"):
                ym -= 1
                my += 1
            return xm + self.b_period * ym, int(jx), int(my)

    def lattice_distance(self, v):
        from mpmath import workdps

        with workdps(self.working_digits):
            rep, _, _ = self.lattice_reduce(v)
            # distance to the nearest lattice point; the reduced value may
            # still be closer to a corner of the cell than to 0
            best = abs(rep)
            for dj in (-1, 0, 1):
                for dm in (-1, 0, 1):
                    best = min(best, abs(rep + dj + self.b_period * dm))
            return best


def compute_constants(cuts, ctx=CTX64, lattice_tol=1e-10):
    """Populate SurfaceConstants from a CutSystem (straight-cut data)."""
    E = cuts.endpoints
    with ctx.workdps():
        sc = SurfaceConstants(cuts=cuts, lattice_tol=lattice_tol)
        b1, a2 = E.b1, E.a2
        d = []
        for i in range(3):
            d.append(
                integrate_segment(
                    lambda s, i=i: s ** i / q_half(s, E),
                    b1,
                    a2,
                    ctx,
                    left_exp=-0.5,
                    right_exp=-0.5,
                )
            )
        sc.d0, sc.d1, sc.d2 = d
        sc.varsigma = 2 * E.t / (3 * sc.d0)

        alpha_per = -2 * sc.d0  # alpha oriented a2 -> b1 on sheet 0
        beta_per = 2 * integrate_segment(
            lambda s: 1 / q_half_trace(s, E, 1, +1),
            E.a1,
            E.b1,
            ctx,
            left_exp=-0.5,
            right_exp=-0.5,
        )
        omega_val = -(1 / (pi * I_UNIT)) * integrate_segment(
            lambda s: q_half_trace(s, E, 1, +1),
            E.a1,
            E.b1,
            ctx,
            left_exp=0.5,
            right_exp=0.5,
        )
        tau_val = -(1 / (pi * I_UNIT)) * integrate_segment(
            lambda s: q_half(s, E), b1, a2, ctx, left_exp=0.5, right_exp=0.5
        )

        b_ratio = beta_per / alpha_per
        flip_alpha = flip_beta = False
        if b_ratio.imag < 0 and not (0 < omega_val.real < 1):
            flip_beta = True
        elif b_ratio.imag < 0:
            flip_alpha = True
        elif not (0 < omega_val.real < 1):
            flip_alpha = flip_beta = True
        if flip_beta:
            beta_per, omega_val = -beta_per, -omega_val
        if flip_alpha:
            alpha_per, tau_val = -alpha_per, -tau_val
        sc.flipped_alpha, sc.flipped_beta = flip_alpha, flip_beta
        sc.alpha_period = alpha_per
        sc.b_period = beta_per / alpha_per

        if abs(tau_val.imag) > lattice_tol or abs(omega_val.imag) > lattice_tol:
            raise RealityViolation(
                f"Im tau = {nstr(tau_val.imag, 3)}, Im omega = {nstr(omega_val.imag, 3)}"
            )
        if sc.b_period.imag <= 0:
            raise RealityViolation("Im B <= 0 after orientation fixing")
        if not (0 < omega_val.real < 1):
            raise RealityViolation(f"omega = {nstr(omega_val.real, 8)} outside (0,1)")
        sc.tau = tau_val.real
        sc.omega = omega_val.real

        sc.far_radius = 25 * E.scale
        sc.a_inf0 = _abel_infinity(sc, ctx)

        sc.p = (E.b1 * E.b2 - E.a1 * E.a2) / E.s_k(1)
        gp = gamma_quartic(sc.p, E)
        sc.p_sheet_zero = 0 if abs(gp ** 2 - 1) < abs(gp ** 2 + 1) else 1
        a_plane = abel_map_plane(sc.p, sc, ctx)
        a_p0 = a_plane if sc.p_sheet_zero == 0 else -a_plane
        sc.abel_p0, _, _ = sc.lattice_reduce(a_p0)
        sc.abel_p1, _, _ = sc.lattice_reduce(-a_p0)
        sc.working_digits = ctx.working_digits
        for label, e in zip(("a1", "b1", "a2", "b2"), E.as_tuple()):
            val = _abel_path_integral(E.b2, e, sc, ctx, from_branch_point=True)
            sc.abel_branch[label], _, _ = sc.lattice_reduce(val)
        return sc


def gamma_quartic(z, E):
    """The quartic-root ratio ((z-b2)(z-b1)/((z-a2)(z-a1)))^(1/4), branch
    cut on the two cuts, value 1 at infinity."""
    z = mpc(z)
    f1 = ((z - E.b2) / (z - E.a2)) ** mpf("0.25")
    f2 = ((z - E.b1) / (z - E.a1)) ** mpf("0.25")
    return f1 * f2


def _abel_infinity(sc, ctx):
    """Abel map of infinity on sheet 0: routed ray integral from b2 plus
    the convergent series tail beyond far_radius."""
    E = sc.endpoints
    u = E.b2 / abs(E.b2) if abs(E.b2) > 0 else mpc(1)
    z_far = sc.far_radius * u
    val = _abel_path_integral(E.b2, z_far, sc, ctx, from_branch_point=True)
    return val + inv_q_half_tail_integral(z_far, E, order=20) / sc.alpha_period


def _abel_path_integral(z_from, z_to, sc, ctx, from_branch_point=False):
    """Integral of the normalized differential along a routed polyline on
    sheet 0 (value in units of the normalized differential)."""
    from .curve import graded_path_integral

    E = sc.endpoints
    scale = E.scale
    margin = mpf("1e-3") * scale
    f = lambda s: 1 / (q_half(s, E) * sc.alpha_period)
    if from_branch_point:
        if abs(z_to - z_from) < mpf("1e-25") * scale:
            return mpc(0)
        # leave the base point b2 along the outward continuation of its own
        # cut, which by construction does not cross anything nearby
        udir = (E.b2 - E.a2) / abs(E.b2 - E.a2)
        w0 = z_from + min(mpf("0.3") * scale, max(abs(z_to - z_from) / 2, mpf("0.05") * scale)) * udir
        total = integrate_segment(f, z_from, w0, ctx, left_exp=-0.5)
        start = w0
    else:
        total = mpc(0)
        start = z_from
    from .curve import endpoint_target_path, near_cut_standoff

    w1, e_target = endpoint_target_path(z_to, sc.cuts, margin)
    if e_target is not None:
        path = _routed(start, w1, sc.cuts, margin)
        total += graded_path_integral(f, path, E, ctx)
        return total + integrate_segment(f, w1, z_to, ctx, right_exp=-0.5)
    standoff = near_cut_standoff(z_to, sc.cuts)
    if standoff is not None:
        path = _routed(start, standoff, sc.cuts, margin) + [z_to]
    else:
        path = _routed(start, z_to, sc.cuts, margin)
    return total + graded_path_integral(f, path, E, ctx)


def abel_map(P, sc, ctx=CTX64):
    """Abel map of a surface point, base point b2 on sheet 0.

    The path is restricted to the dissected surface; the returned value is
    the honest (unreduced) integral for sheet-0 paths, with the involution
    symmetry supplying sheet 1.  Points within lattice_tol of the cycles
    raise OnCycle (the caller must pick a side).
    """
    E = sc.endpoints
    with ctx.workdps():
        if isinstance(P, SurfacePoint):
            z, sheet = mpc(P.z), P.sheet
        else:
            z, sheet = mpc(P), 0
        # only an exactly-on-cut point is ambiguous; deliberate one-sided
        # traces at tiny offsets are legitimate and handled by the router
        guard = mpf("1e-20") * E.scale
        for obs in sc.cuts.obstacles():
            if obs.distance_to(z) < guard and min(
                abs(z - e) for e in E.as_tuple()
            ) > guard:
                raise OnCycle("point lies on a homology cut; offset to one side")
        if abs(z) > sc.far_radius:
            val = sc.a_inf0 - inv_q_half_tail_integral(z, E, order=20) / sc.alpha_period
        else:
            val = _abel_path_integral(E.b2, z, sc, ctx, from_branch_point=True)
        return val if sheet == 0 else -val


def abel_map_plane(z, sc, ctx=CTX64):
    """Sheet-0 Abel map of a plane point (no cycle guard)."""
    E = sc.endpoints
    with ctx.workdps():
        z = mpc(z)
        if abs(z) > sc.far_radius:
            return sc.a_inf0 - inv_q_half_tail_integral(z, E, order=20) / sc.alpha_period
        return _abel_path_integral(E.b2, z, sc, ctx, from_branch_point=True)


def _seed_grid(sc, ctx):
    if sc._seed_grid:
        return sc._seed_grid
    E = sc.endpoints
    scale = E.scale
    seeds = []
    for r_mul in ("0.7", "1.35", "2.4"):
        for k in range(10):
            zs = mpf(r_mul) * scale * exp(I_UNIT * (2 * pi * k / 10 + mpf("0.13")))
            try:
                a0 = abel_map_plane(zs, sc, ctx)
            except Exception:
                continue
            seeds.append((zs, 0, a0))
            seeds.append((zs, 1, -a0))
    sc._seed_grid.extend(seeds)
    return sc._seed_grid


def jacobi_invert(s_value, sc, ctx=CTX64):
    """The unique surface point whose Abel image is [s_value].

    Newton iteration on each sheet from a cached grid of seeds; the
    derivative of the Abel map is 1/(w * alpha_period), so the update is
    dz = -(a(z) - s) * w(z) * alpha_period * (-1)^sheet.
    """
    with ctx.workdps():
        target, _, _ = sc.lattice_reduce(mpc(s_value))
        E = sc.endpoints
        tol = mpf(sc.lattice_tol) / 100

        # branch points are half-period images where the Abel map is not a
        # diffeomorphism; match them directly
        pts = dict(zip(("a1", "b1", "a2", "b2"), E.as_tuple()))
        for label, a_e in sc.abel_branch.items():
            if sc.lattice_distance(target - a_e) < mpf(sc.lattice_tol):
                return SurfacePoint(pts[label], 0)

        # fast path: target near the Abel images of the two infinities
        for sheet, a_inf in ((0, sc.a_inf0), (1, -sc.a_inf0)):
            if sc.lattice_distance(target - a_inf) < mpf("0.2"):
                pt = _invert_near_infinity(target, sheet, sc, ctx)
                if pt is not None:
                    return pt

        seeds = sorted(
            _seed_grid(sc, ctx),
            key=lambda sd: sc.lattice_distance(target - sd[2]),
        )
        for z0, sheet, a0 in seeds[:8]:
            z, a_cur = mpc(z0), a0 if sheet == 0 else -a0  # sheet-0 value
            sign = 1 if sheet == 0 else -1
            ok = True
            for _ in range(60):
                diff, _, _ = sc.lattice_reduce(sign * a_cur - target)
                if abs(diff) < tol:
                    break
                dz = -diff * q_half(z, E) * sc.alpha_period * sign
                # damp large steps; re-route the Abel increment
                if abs(dz) > E.scale:
                    dz *= E.scale / abs(dz)
                z_new = z + dz
                try:
                    inc = _abel_increment(z, z_new, sc, ctx)
                except Exception:
                    ok = False
                    break
                a_cur += inc
                z = z_new
            else:
                ok = False
            if ok and abs(diff) < tol:
                return SurfacePoint(z, sheet)
        raise NonConvergent("Jacobi inversion failed from all seeds")


def _invert_near_infinity(target, sheet, sc, ctx):
    E = sc.endpoints
    sign = 1 if sheet == 0 else -1
    u, _, _ = sc.lattice_reduce(sign * target - sc.a_inf0)
    if abs(u) < mpf(sc.lattice_tol):
        return None  # the target is an infinity itself; caller handles
    z = -2 / (sc.alpha_period * u)
    if abs(z) < sc.far_radius:
        return None
    for _ in range(40):
        a0 = sc.a_inf0 - inv_q_half_tail_integral(z, E, order=20) / sc.alpha_period
        diff, _, _ = sc.lattice_reduce(sign * a0 - target)
        if abs(diff) < mpf(sc.lattice_tol) / 100:
            return SurfacePoint(z, sheet)
        z = z - diff * q_half(z, E) * sc.alpha_period * sign
    return None


def _abel_increment(z_a, z_b, sc, ctx):
    """Abel-map increment between nearby plane points, routing around cuts
    when the straight segment would cross one."""
    from .geometry import segment_crosses_arc
    from .curve import graded_path_integral

    E = sc.endpoints
    f = lambda s: 1 / (q_half(s, E) * sc.alpha_period)
    margin = mpf("1e-3") * E.scale
    crosses = any(
        segment_crosses_arc(z_a, z_b, obs, margin / 8) for obs in sc.cuts.obstacles()
    )
    if not crosses:
        return graded_path_integral(f, [z_a, z_b], E, ctx)
    path = _routed(z_a, z_b, sc.cuts, margin)
    return graded_path_integral(f, path, E, ctx)


@dataclass
class IndexPoints:
    """Solution data of the Jacobi inversion problem for one index n."""

    n: int
    N_n: int
    s_raw_1: mpc = None
    s_raw_0: mpc = None
    abel_zn1: mpc = None  # reduced representative (the tilde-a value)
    abel_zn0: mpc = None
    j1: int = 0
    m1: int = 0
    j0: int = 0
    m0: int = 0
    z_n1: SurfacePoint = None
    z_n0: SurfacePoint = None


def index_points(n, N_n, sc, ctx=CTX64, invert=True):
    """Lattice data z_{n,k} driving the theta ratios for index n.

    The raw right-hand sides are a(p^(k)) + (n - N_n) varsigma +
    (omega + B tau) n; their reduced representatives are the tilde-a values
    of the inversion solutions, and the removed lattice coordinates are the
    unique integers of the jump bookkeeping.
    """
    with ctx.workdps():
        shift = (n - N_n) * sc.varsigma + (sc.omega + sc.b_period * sc.tau) * n
        out = IndexPoints(n=n, N_n=N_n)
        out.s_raw_1 = sc.abel_p1 + shift
        out.s_raw_0 = sc.abel_p0 + shift
        out.abel_zn1, jx1, my1 = sc.lattice_reduce(out.s_raw_1)
        out.abel_zn0, jx0, my0 = sc.lattice_reduce(out.s_raw_0)
        # (reduced) = raw + j + B m
        out.j1, out.m1 = -jx1, -my1
        out.j0, out.m0 = -jx0, -my0
        if invert:
            out.z_n1 = jacobi_invert(out.abel_zn1, sc, ctx)
            out.z_n0 = jacobi_invert(out.abel_zn0, sc, ctx)
        return out
