"""Leading-order asymptotic predictions for the orthogonal polynomials and
their recurrence coefficients in the two-cut phase.

Off the cuts the wave functions psi_n = P_n e^{-n(V - ell*)/2} follow

    psi_n ~ (A * vartheta_n * D^{N_n - n}) e^{n Q},

with the outer function A, the normalized index ratio vartheta_n, the
normalized Szego factor D, and the phase Q; on the open cuts the two
one-sided boundary values add (genuinely oscillatory two-term asymptotics).
The norms and recurrence coefficients take closed leading forms in terms of
the ratio values at infinity; gamma_n^2 also has an equivalent product form
(used as a cross-check) coming from the shifted-index identity.

All magnitudes are carried as complex logarithms: e^{n Q} alone spans
thousands of orders of magnitude at moderate n.
"""

from dataclasses import dataclass, field

from mpmath import mp, mpf, mpc, exp, log, pi, nstr

from .errors import DegenerateIndex, OnCut
from .precision import PrecisionContext, CTX64
from .curve import I_UNIT
from .theta import ThetaEngine
from .szego import SzegoPhase


@dataclass
class AsymptoticPrediction:
    """Leading terms for one index n (values None when not requested)."""

    n: int
    N_n: int
    degenerate: bool
    h_n: mpc = None
    gamma2_n: mpc = None
    gamma2_alt: mpc = None
    beta_n: mpc = None
    beta_conditioning: bool = True  # False when |theta*_inf| is tiny
    S1: mpc = None
    S2: mpc = None
    theta_star_inf: mpc = None
    theta_tilde_inf: mpc = None


class Predictor:
    """Assembled pipeline: surface constants -> theta engine -> Szego/phase
    -> closed-form leading terms."""

    def __init__(self, sc, ctx=CTX64, eps=0.1, cross_tol=1e-8):
        self.sc = sc
        self.ctx = ctx
        self.eps = eps
        self.engine = ThetaEngine(sc, ctx)
        self.szego = SzegoPhase(sc, ctx)
        self.pack = self.szego.ell_star(cross_tol=cross_tol)
        with ctx.workdps():
            E = sc.endpoints
            self.S1 = E.s_k(1)
            self.S2 = E.s_k(2)

    # -- wave function ---------------------------------------------------------

    def log_psi(self, n, N_n, z):
        """log of the off-cut leading term (A vartheta_n D^{N_n-n}) e^{nQ}."""
        with self.ctx.workdps():
            z = mpc(z)
            td = self.engine.normalized_ratios(n, N_n, eps=self.eps, allow_degenerate=True)
            a_val, _ = self.szego.ab_outer(z)
            th = td.theta_n_at(z)
            d_pow = mpc(0)
            if N_n != n:
                d_pow = (N_n - n) * log(self.szego.szego_D(z, normalized=True))
            q = self.szego.q_phase(z)
            return log(a_val * th) + d_pow + n * q, td.degenerate

    def psi_oncut_terms(self, n, N_n, s, normal, offset=1e-8):
        """The two one-sided leading terms at a cut point s; normal is a
        unit vector off the cut (the plus side is s + i*0*normal side).

        Returns (H_plus, H_minus) as complex logarithms."""
        with self.ctx.workdps():
            s = mpc(s)
            normal = mpc(normal)
            normal /= abs(normal)
            eps_off = mpf(offset) * self.sc.endpoints.scale
            out = []
            for side in (+1, -1):
                z = s + side * eps_off * normal
                val, _ = self.log_psi(n, N_n, z)
                out.append(val)
            return out[0], out[1]

    # -- norms and recurrence coefficients ---------------------------------------

    def predict_hn(self, n, N_n, allow_degenerate=True):
        with self.ctx.workdps():
            td = self.engine.normalized_ratios(n, N_n, eps=self.eps, allow_degenerate=True)
            if td.degenerate and not allow_degenerate:
                raise DegenerateIndex(f"index {n} is degenerate at this t")
            pack = self.pack
            val = (
                pi
                / 2
                * exp(-n * pack.ell_star)
                * self.S1
                * pack.D_inf ** (2 * (n - N_n))
                * td.theta_star_inf
            )
            return val, td

    def predict_gamma2(self, n, N_n, allow_degenerate=True):
        with self.ctx.workdps():
            td = self.engine.normalized_ratios(n, N_n, eps=self.eps, allow_degenerate=True)
            if td.degenerate and not allow_degenerate:
                raise DegenerateIndex(f"index {n} is degenerate at this t")
            main = self.S1 ** 2 / 16 * td.theta_star_inf * td.theta_tilde_inf
            # alternative product form via the shifted-index ratio: the
            # companion factor is Theta_{n-1,1} built with N_{n-1} := N_n
            u0, u1 = self.sc.a_inf0, -self.sc.a_inf0
            sh0 = self.engine.ratio_at_abel(n - 1, N_n, 1, u0)
            sh1 = self.engine.ratio_at_abel(n - 1, N_n, 1, u1)
            alt = (
                exp(-self.pack.ell_star)
                * self.pack.D_inf ** 2
                * td.theta_star_inf
                * (sh0 / sh1)
            )
            return main, alt, td

    def predict_beta(self, n, N_n, allow_degenerate=True):
        """Leading term of beta_n, including the log-derivative data of the
        ratio functions at infinity (contour extraction on |1/z| = 1e-2)."""
        with self.ctx.workdps():
            td = self.engine.normalized_ratios(n, N_n, eps=self.eps, allow_degenerate=True)
            if td.degenerate and not allow_degenerate:
                raise DegenerateIndex(f"index {n} is degenerate at this t")
            f0_0, d0 = self.engine.log_derivative_at_infinity(n, N_n, which=1, sheet=0)
            f0_1, d1 = self.engine.log_derivative_at_infinity(n, N_n, which=1, sheet=1)
            # numerator: theta*(S2/(2S1) + dlog theta + dlog theta*), with
            # theta* dlog theta* read as (d/dz Theta^(1)(1/z))/Theta^(0)(inf)
            # so it stays finite when theta*(inf) vanishes
            th_star = f0_1 / f0_0
            conditioning = abs(th_star) > 10 * mpf(self.ctx.target_tol)
            num = th_star * (self.S2 / (2 * self.S1) + d0 / f0_0) + d1 / f0_0
            val = num / th_star if th_star != 0 else mpc("inf")
            return val, bool(conditioning), td

    def prediction(self, n, N_n):
        """Full AsymptoticPrediction record for one index."""
        h, td = self.predict_hn(n, N_n)
        g2, g2_alt, _ = self.predict_gamma2(n, N_n)
        beta, cond, _ = self.predict_beta(n, N_n)
        out = AsymptoticPrediction(
            n=n,
            N_n=N_n,
            degenerate=td.degenerate,
            h_n=h,
            gamma2_n=g2,
            gamma2_alt=g2_alt,
            beta_n=beta,
            beta_conditioning=cond,
            S1=self.S1,
            S2=self.S2,
            theta_star_inf=td.theta_star_inf,
            theta_tilde_inf=td.theta_tilde_inf,
        )
        out.log_psi_at = lambda z: self.log_psi(n, N_n, z)[0]
        return out
