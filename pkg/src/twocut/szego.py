"""Szego function, exponential phase, outer functions, and ell*.

The Szego factor solves the multiplicative jump problem D+ D- = e^V on the
cuts; it is assembled from the Cauchy transform of 1/Q^(1/2) over the
connector arc.  The phase function is the primitive of Q^(1/2) from b2; its
exponential carries the geometric growth e^{n Q} of the orthogonal
polynomials.  The normalization constant ell* is computed along two fully
independent routes,

  * directly, by matching exp((V - ell*)/2 + Q) ~ z at large |z|, and
  * in closed form through theta values at varsigma + omega + B tau,

and the module refuses to hand out a PhasePack when the two disagree: this
is the master integration check of the whole constants layer.
"""

from dataclasses import dataclass

from mpmath import mp, mpf, mpc, exp, pi, log, sqrt, fsum, nstr, nint, matrix, lu_solve

from .errors import OnContour, CrossCheckFailure
from .precision import PrecisionContext, CTX64
from .geometry import point_segment_distance
from .quadrature import integrate_segment
from .curve import (
    q_half,
    q_half_trace,
    phase_integral,
    q_half_tail_integral,
    potential,
    I_UNIT,
)
from .surface import gamma_quartic
from .theta import theta


@dataclass
class PhasePack:
    """ell* by both routes plus the Szego normalization data."""

    D_inf: mpc
    ell_star_direct: mpc
    ell_star_theta: mpc
    mu1: mpc
    D1: mpc
    cross_residual: mpf

    @property
    def ell_star(self):
        return self.ell_star_theta


class SzegoPhase:
    """Evaluator bound to one set of surface constants."""

    def __init__(self, sc, ctx=CTX64):
        self.sc = sc
        self.ctx = ctx
        self._far_anchor = None  # (z_R, Q(z_R))

    # -- outer functions -----------------------------------------------------

    def gamma(self, z):
        return gamma_quartic(z, self.sc.endpoints)

    def ab_outer(self, z):
        """A = (gamma + 1/gamma)/2 and B = (gamma - 1/gamma)/(-2i); A has
        value 1 and B value 0 at infinity, A^2 + B^2 = 1 identically."""
        E = self.sc.endpoints
        guard = mpf("1e-12") * E.scale
        for cut in self.sc.cuts.straight_cuts:
            if cut.distance_to(z) < guard:
                raise OnContour("outer functions need a one-sided trace on cuts")
        g = self.gamma(z)
        return (g + 1 / g) / 2, (g - 1 / g) / (-2 * I_UNIT)

    # -- Szego function --------------------------------------------------------

    def _cauchy_over_connector(self, z):
        """C(z) = integral over I of ds / ((s - z) Q^(1/2)(s)), with the
        logarithmic part split off analytically when z is close to I."""
        E = self.sc.endpoints
        b1, a2 = E.b1, E.a2
        dist = point_segment_distance(z, b1, a2)
        scale = E.scale
        if dist < mpf("1e-15") * scale:
            raise OnContour("Szego function evaluated on the connector")
        if dist > mpf("0.05") * scale:
            return integrate_segment(
                lambda s: 1 / ((s - z) * q_half(s, E)),
                b1,
                a2,
                self.ctx,
                left_exp=-0.5,
                right_exp=-0.5,
            )
        # near the connector: the integrand's only segment-local
        # singularity is the Cauchy pole (1/Q^(1/2) is analytic across the
        # connector), so bulge the path to the side away from z; no pole is
        # crossed and the value is unchanged
        d = a2 - b1
        tdir = d / abs(d)
        nrm = mpc(0, 1) * tdir
        side = 1 if ((z - b1) / tdir).imag >= 0 else -1
        bulge = -side * mpf("0.15") * scale * nrm
        mid1 = b1 + d / 4 + bulge
        mid2 = b1 + 3 * d / 4 + bulge
        from .quadrature import QuadratureSpec, integrate_arc
        from .geometry import ContourArc

        arc = ContourArc([b1, mid1, mid2, a2])
        spec = QuadratureSpec("gauss_jacobi", -0.5, -0.5, 1)
        return integrate_arc(
            lambda s: 1 / ((s - z) * q_half(s, E)), arc, spec, self.ctx
        )

    def szego_D(self, z, normalized=False):
        """The Szego factor; normalized=True divides by its value at
        infinity."""
        sc = self.sc
        E = sc.endpoints
        with self.ctx.workdps():
            z = mpc(z)
            val = exp(
                potential(z, E.t) / 2
                + (z + 3 * sc.varsigma * self._cauchy_over_connector(z))
                * q_half(z, E)
                / 3
            )
            return val / self.D_inf() if normalized else val

    def D_inf(self):
        sc = self.sc
        return exp((1 - sc.t * sc.d1 / sc.d0) / 3)

    # -- phase function ---------------------------------------------------------

    def q_phase(self, z):
        """Q(z) = integral of Q^(1/2) from b2, cut-avoiding branch.  Large
        arguments switch to the exact primitive plus a convergent tail."""
        sc = self.sc
        E = sc.endpoints
        with self.ctx.workdps():
            z = mpc(z)
            if abs(z) <= sc.far_radius:
                return phase_integral(z, sc.cuts, self.ctx)
            zr, q_zr = self._anchor()
            # ray alignment: integrate the exact part along |z| with the
            # remainder supplied by the series tail
            main = (z ** 3 / 6 - E.t * z / 2) - (zr ** 3 / 6 - E.t * zr / 2)
            main += log(z / zr)
            main += q_half_tail_integral(zr, E, order=20) - q_half_tail_integral(
                z, E, order=20
            )
            return q_zr + main

    def _anchor(self):
        if self._far_anchor is None:
            sc = self.sc
            E = sc.endpoints
            u = E.b2 / abs(E.b2)
            zr = sc.far_radius * u
            self._far_anchor = (zr, phase_integral(zr, sc.cuts, self.ctx))
        return self._far_anchor

    def u_level(self, z):
        return 2 * self.q_phase(z).real

    # -- ell* -------------------------------------------------------------------

    def ell_star_direct(self, radii=(1000, 3000, 10000)):
        """Match exp((V - ell*)/2 + Q) -> z along a far ray: sample
        l(z) = V + 2Q - 2 log z at three radii and eliminate the 1/z and
        1/z^2 corrections."""
        sc = self.sc
        E = sc.endpoints
        with self.ctx.workdps():
            u = E.b2 / abs(E.b2)
            samples = []
            for r in radii:
                z = mpf(r) * u
                lz = potential(z, E.t) + 2 * self.q_phase(z) - 2 * log(z)
                samples.append((z, lz))
            M = matrix(3, 3)
            rhs = matrix(3, 1)
            for i, (z, l) in enumerate(samples):
                M[i, 0], M[i, 1], M[i, 2] = 1, 1 / z, 1 / z ** 2
                rhs[i] = l
            sol = lu_solve(M, rhs)
            return sol[0]

    def ell_star_theta(self):
        """Closed form from the theta function at varsigma + omega + B tau."""
        sc = self.sc
        with self.ctx.workdps():
            s_star = sc.varsigma + sc.omega + sc.b_period * sc.tau
            s1 = sc.endpoints.s_k(1)
            val = (
                4
                * self.D_inf()
                * exp(pi * I_UNIT * sc.tau * s_star)
                / s1
                * theta(s_star, sc.b_period, self.ctx)
                / theta(mpc(0), sc.b_period, self.ctx)
            )
            return 2 * log(val)

    def ell_star(self, cross_tol=1e-8):
        """PhasePack with both ell* routes; raises CrossCheckFailure when
        they disagree beyond cross_tol (mod 2 pi i, which the direct route's
        log branch cannot fix)."""
        sc = self.sc
        E = sc.endpoints
        with self.ctx.workdps():
            direct = self.ell_star_direct()
            via_theta = self.ell_star_theta()
            k = nint((direct.imag - via_theta.imag) / (2 * pi))
            via_theta = via_theta + 2 * pi * I_UNIT * k
            resid = abs(direct - via_theta)
            if resid > mpf(cross_tol):
                raise CrossCheckFailure(
                    f"ell* routes disagree by {nstr(resid, 4)} "
                    "(orientation or branch bug upstream)"
                )
            mu1 = E.mu1
            D1 = E.t ** 2 + mu1 - 3 * sc.varsigma * sc.d2 / 2
            return PhasePack(
                D_inf=self.D_inf(),
                ell_star_direct=direct,
                ell_star_theta=via_theta,
                mu1=mu1,
                D1=D1,
                cross_residual=resid,
            )
