"""Riemann theta function and the index-dependent ratio functions.

For a period B with Im B > 0,

    theta(u) = sum_k exp(pi i B k^2 + 2 pi i u k),

truncated where the Gaussian tail falls below the working tolerance.  The
ratio functions attached to an index n are built from two theta factors
shifted by the Abel values of the inversion points z_{n,k} and of the
distinguished finite point p; a simple exponential prefactor fixed by the
lattice integers of the inversion makes their multiplicative jumps across
the homology cuts exactly the ones the asymptotic formulas need.

All evaluators take Abel values (complex numbers) produced by the surface
module, so the quasi-periodicity bookkeeping lives in one place.
"""

from dataclasses import dataclass, field

from mpmath import mp, mpf, mpc, exp, pi, sqrt, fsum, nstr

from .errors import SlowConvergence, DegenerateIndex, MissingPrerequisite
from .precision import PrecisionContext, CTX64
from .surface import SurfacePoint, abel_map, index_points, jacobi_invert
from .curve import I_UNIT


def theta(u, b_period, ctx=CTX64):
    """Riemann theta value at u for the period b_period (Im > 0)."""
    with ctx.workdps():
        u = mpc(u)
        b = mpc(b_period)
        if b.imag < mpf("1e-3"):
            raise SlowConvergence(
                f"Im B = {nstr(b.imag, 5)} too small for a direct theta sum"
            )
        # |term_k| = exp(-pi Im(B) k^2 - 2 pi k Im u); bound the tail by the
        # digit budget plus a safety margin
        digits = mp.dps + 10
        shift = abs(u.imag) / b.imag
        K = int(shift + sqrt(shift ** 2 + digits * mp.log(10) / (pi * b.imag))) + 3
        return fsum(
            exp(pi * I_UNIT * b * k * k + 2 * pi * I_UNIT * u * k)
            for k in range(-K, K + 1)
        )


@dataclass
class ThetaData:
    """Everything the asymptotic formulas need for one index n."""

    n: int
    N_n: int
    j: int = 0
    m: int = 0
    z_n1: SurfacePoint = None
    degenerate: bool = False
    theta_n_inf: mpc = None  # Theta_{n,1} at infinity on sheet 0
    theta_star_inf: mpc = None  # normalized ratio on sheet 1 at infinity
    theta_tilde_inf: mpc = None  # companion ratio for gamma^2
    index_data: object = None
    _engine: object = None

    def theta_n_at(self, z, sheet=0):
        """Normalized ratio (value 1 at infinity on sheet 0)."""
        if self._engine is None:
            raise MissingPrerequisite("evaluator not attached")
        return self._engine.ratio(self.n, self.N_n, z, sheet=sheet, which=1) / self.theta_n_inf


class ThetaEngine:
    """Evaluator for the ratio functions on a fixed surface."""

    def __init__(self, sc, ctx=CTX64):
        self.sc = sc
        self.ctx = ctx
        self._ip_cache = {}

    # -- plumbing ----------------------------------------------------------

    def half_period(self):
        return (1 + self.sc.b_period) / 2

    def theta(self, u):
        return theta(u, self.sc.b_period, self.ctx)

    def indices(self, n, N_n, invert=False):
        key = (n, N_n)
        cached = self._ip_cache.get(key)
        if cached is None or (invert and cached.z_n1 is None):
            cached = index_points(n, N_n, self.sc, self.ctx, invert=invert)
            self._ip_cache[key] = cached
        return cached

    def abel_of(self, z, sheet=0):
        if isinstance(z, SurfacePoint):
            return abel_map(z, self.sc, self.ctx)
        if z is None:  # infinity
            return self.sc.a_inf0 if sheet == 0 else -self.sc.a_inf0
        return abel_map(SurfacePoint(mpc(z), sheet), self.sc, self.ctx)

    # -- ratio functions ----------------------------------------------------

    def ratio_at_abel(self, n, N_n, k, u):
        """Theta_{n,k} evaluated at a point with Abel value u."""
        sc = self.sc
        ip = self.indices(n, N_n)
        abel_zn = ip.abel_zn1 if k == 1 else ip.abel_zn0
        abel_p = sc.abel_p1 if k == 1 else sc.abel_p0
        m_int = ip.m1 if k == 1 else ip.m0
        c = exp(-2 * pi * I_UNIT * (m_int + sc.tau * n) * u)
        h = self.half_period()
        return c * self.theta(u - abel_zn - h) / self.theta(u - abel_p - h)

    def ratio(self, n, N_n, z, sheet=0, which=1):
        """Theta_{n,which} pulled back to the plane from the given sheet;
        z = None evaluates at infinity.  Evaluation close to the pole at
        the distinguished point p is reported with a warning."""
        if z is not None:
            sc = self.sc
            p_sheet = sc.p_sheet_zero if which == 0 else 1 - sc.p_sheet_zero
            if sheet == p_sheet and abs(mpc(z) - sc.p) < mpf("1e-6") * sc.endpoints.scale:
                import warnings

                from .errors import NearPoleWarning

                warnings.warn(
                    "ratio evaluated within 1e-6*scale of its pole",
                    NearPoleWarning,
                    stacklevel=2,
                )
        u = self.abel_of(z, sheet)
        return self.ratio_at_abel(n, N_n, which, u)

    def capital_theta_at_abel(self, u):
        """The fixed ratio with divisor p^(1) - p^(0) (used by the
        alternative recurrence formula and the ell* identity)."""
        sc = self.sc
        diff = sc.abel_p1 - sc.abel_p0 - (sc.varsigma + sc.omega + sc.b_period * sc.tau)
        y = diff.imag / sc.b_period.imag
        x = diff.real - y * sc.b_period.real
        from mpmath import nint

        m_int = int(nint(y))
        if abs(x - nint(x)) > 100 * mpf(sc.lattice_tol) or abs(y - m_int) > 100 * mpf(
            sc.lattice_tol
        ):
            raise MissingPrerequisite(
                "Abel values of p do not satisfy the divisor congruence"
            )
        h = self.half_period()
        c = exp(-2 * pi * I_UNIT * (m_int + sc.tau) * u)
        return c * self.theta(u - sc.abel_p1 - h) / self.theta(u - sc.abel_p0 - h)

    # -- degeneracy ----------------------------------------------------------

    def degeneracy_check(self, n, N_n, eps=0.1):
        """True when the zero z_{n,1} sits on sheet 0 beyond radius 1/eps,
        i.e. inside the excluded neighborhood of infinity where the leading
        term of the asymptotics degenerates."""
        sc = self.sc
        ip = self.indices(n, N_n)
        near0 = sc.lattice_distance(ip.abel_zn1 - sc.a_inf0)
        # |a(z) - a(inf0)| ~ 2/(|alpha_period| |z|) near infinity on sheet 0
        thresh = 3 * mpf(eps) / abs(sc.alpha_period)
        if near0 > thresh:
            return False
        pt = jacobi_invert(ip.abel_zn1, sc, self.ctx)
        return pt.sheet == 0 and abs(pt.z) >= 1 / mpf(eps)

    # -- assembled data -------------------------------------------------------

    def normalized_ratios(self, n, N_n, eval_points=(), eps=0.1, allow_degenerate=False):
        """ThetaData with the three normalized infinity values and an
        evaluator handle; raises DegenerateIndex for flagged indices unless
        allow_degenerate (callers that report flags pass True)."""
        with self.ctx.workdps():
            sc = self.sc
            ip = self.indices(n, N_n)
            degen = self.degeneracy_check(n, N_n, eps)
            if degen and not allow_degenerate:
                raise DegenerateIndex(f"index {n} outside the admissible set")
            u0, u1 = sc.a_inf0, -sc.a_inf0
            th0 = self.ratio_at_abel(n, N_n, 1, u0)
            th1 = self.ratio_at_abel(n, N_n, 1, u1)
            th0_0 = self.ratio_at_abel(n, N_n, 0, u0)
            th1_0 = self.ratio_at_abel(n, N_n, 0, u1)
            data = ThetaData(
                n=n,
                N_n=N_n,
                j=ip.j1,
                m=ip.m1,
                z_n1=ip.z_n1,
                degenerate=degen,
                theta_n_inf=th0,
                theta_star_inf=th1 / th0,
                theta_tilde_inf=th0_0 / th1_0,
                index_data=ip,
                _engine=self,
            )
            data.values = {}
            for z in eval_points:
                data.values[z] = self.ratio(n, N_n, z, sheet=0, which=1) / th0
            return data

    # -- derivative data at infinity -----------------------------------------

    def log_derivative_at_infinity(self, n, N_n, which=1, sheet=0, radius=1e-2, points=16):
        """d/dz of Theta_{n,which}^{(sheet)}(1/z) at z = 0 by a trapezoidal
        Cauchy integral on |z| = radius, together with the value at z = 0.

        Returns (value_at_infinity, derivative).  The ring maps to the
        circle |w| = 1/radius in the plane, far outside the cuts, where the
        series form of the Abel map applies."""
        with self.ctx.workdps():
            r = mpf(radius)
            vals = []
            for k in range(points):
                zeta = r * exp(2 * pi * I_UNIT * k / points)
                w = 1 / zeta
                u = self.abel_of(w, sheet)
                vals.append(self.ratio_at_abel(n, N_n, which, u))
            f0 = self.ratio_at_abel(
                n, N_n, which, self.sc.a_inf0 if sheet == 0 else -self.sc.a_inf0
            )
            deriv = fsum(
                v / (r * exp(2 * pi * I_UNIT * k / points))
                for k, v in enumerate(vals)
            ) / points
            return f0, deriv
