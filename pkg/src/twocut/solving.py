"""Damped Newton iteration for small real systems.

Used for the 8-real-unknown branch-point system and its 4-unknown symmetric
reduction.  Jacobians are finite-difference (central, step ~ tol^(1/3) scaled
by variable magnitude); the systems are tiny, so dense LU at working
precision is never the bottleneck.
"""

from dataclasses import dataclass, field

from mpmath import mp, mpf, matrix, lu_solve, norm, mnorm

from .errors import SingularJacobian, MaxIterations
from .precision import PrecisionContext


@dataclass
class NewtonTrace:
    """Iteration diagnostics: residual inf-norms and damping factors."""

    residual_norms: list = field(default_factory=list)
    damping: list = field(default_factory=list)
    jacobian_det: object = None

    @property
    def iterations(self):
        return len(self.residual_norms)


def _inf_norm(v):
    return max(abs(x) for x in v)


def fd_jacobian(residual, x, ctx, f0=None, one_sided=False):
    """Finite-difference Jacobian of residual at x (central by default;
    one-sided halves the evaluation count for sign-level diagnostics)."""
    k = len(x)
    h = [ctx.tol ** (mpf(1) / 3) * max(mpf(1), abs(xi)) for xi in x]
    J = matrix(k, k)
    if one_sided:
        f0 = f0 if f0 is not None else residual(x)
        for j in range(k):
            xp = list(x)
            xp[j] += h[j]
            fp = residual(xp)
            for i in range(k):
                J[i, j] = (fp[i] - f0[i]) / h[j]
        return J
    for j in range(k):
        xp = list(x)
        xm = list(x)
        xp[j] += h[j]
        xm[j] -= h[j]
        fp = residual(xp)
        fm = residual(xm)
        for i in range(k):
            J[i, j] = (fp[i] - fm[i]) / (2 * h[j])
    return J


def newton_solve(residual, x0, ctx, jacobian=None, trace=None, reuse_jacobian=False):
    """Solve residual(x) = 0 for k real unknowns starting from x0.

    residual       : callable list[k] -> list[k] of mpf
    jacobian       : optional callable list[k] -> mpmath matrix
    reuse_jacobian : with a good initial guess (continuation), keep the first
                     Jacobian for subsequent (chord) iterations until damping
                     indicates it went stale

    Returns (solution list, NewtonTrace).  Raises SingularJacobian when the
    condition estimate exceeds 1/target_tol and MaxIterations when the
    iteration budget runs out.
    """
    with ctx.workdps():
        x = [mpf(v) for v in x0]
        tr = trace if trace is not None else NewtonTrace()
        fx = residual(x)
        rnorm = _inf_norm(fx)
        J = None
        for _ in range(ctx.max_iterations):
            tr.residual_norms.append(rnorm)
            if rnorm < ctx.tol:
                return x, tr
            if J is None or not reuse_jacobian:
                J = jacobian(x) if jacobian else fd_jacobian(residual, x, ctx, fx)
                _check_conditioning(J, ctx)
            try:
                step = lu_solve(J, matrix([-f for f in fx]))
            except ZeroDivisionError as exc:
                raise SingularJacobian("LU factorization broke down") from exc
            lam = mpf(1)
            for _ in range(40):
                xn = [xi + lam * si for xi, si in zip(x, step)]
                fn = residual(xn)
                nn = _inf_norm(fn)
                if nn < rnorm or nn < ctx.tol:
                    break
                lam /= 2
            else:
                if reuse_jacobian and J is not None:
                    # stale chord Jacobian: rebuild once before giving up
                    J = jacobian(x) if jacobian else fd_jacobian(residual, x, ctx, fx)
                    _check_conditioning(J, ctx)
                    continue
                raise MaxIterations("line search failed to reduce the residual")
            if reuse_jacobian and lam < mpf(1) / 4:
                J = None  # force a rebuild next iteration
            tr.damping.append(lam)
            x, fx, rnorm = xn, fn, nn
        raise MaxIterations(f"no convergence in {ctx.max_iterations} iterations")


def _check_conditioning(J, ctx):
    k = J.rows
    nJ = mnorm(J, 1)
    try:
        cols = []
        for j in range(k):
            e = matrix([mpf(1) if i == j else mpf(0) for i in range(k)])
            cols.append(lu_solve(J, e))
    except ZeroDivisionError as exc:
        raise SingularJacobian("Jacobian is numerically singular") from exc
    nInv = max(sum(abs(c[i]) for i in range(k)) for c in cols)
    if nJ * nInv > 1 / ctx.tol:
        raise SingularJacobian(f"condition estimate {mp.nstr(nJ * nInv, 5)} too large")


def jacobian_determinant(residual, x, ctx):
    """Determinant of the finite-difference Jacobian at x (diagnostic)."""
    from mpmath import det

    with ctx.workdps():
        J = fd_jacobian(residual, [mpf(v) for v in x], ctx)
        return det(J)
