"""Extended-precision quadrature on polyline arcs.

Two rule families cover everything the package integrates:

  * composite Gauss-Legendre for smooth integrands, and
  * Gauss-Jacobi rules that factor endpoint behavior (z-e)^q with q > -1
    analytically into the weight, so square-root zeros / singularities at
    branch points never have to be resolved by refinement.

All period and moment integrals in the two-cut geometry have exponents in
{-1/2, 0, +1/2}, for which the Jacobi rules reduce to closed trigonometric
(Chebyshev-type) formulas; the general (alpha, beta) case is kept for
completeness and computed by Newton iteration on the Jacobi polynomial with
float64 eigenvalue seeds.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from mpmath import mp, mpf, mpc, pi, cos, sin, gamma, factorial, fsum, workdps

from .errors import NonConvergent, SingularInterior
from .precision import PrecisionContext, is_finite
from .geometry import ContourArc


# ---------------------------------------------------------------------------
# node/weight tables (cached per precision)


_GL_CACHE = {}  # n -> (dps, nodes, weights); grown by precision ladder


def _legendre_newton(n, x, dps):
    """Polish one Legendre root by Newton at dps digits; returns (x, dP)."""
    for _ in range(60):
        p0, p1 = mpf(1), x
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = n * (x * p1 - p0) / (x * x - 1)
        dx = p1 / dp
        x -= dx
        if abs(dx) < mpf(10) ** (-dps - 5):
            break
    p0, p1 = mpf(1), x
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = n * (x * p1 - p0) / (x * x - 1)
    return x, dp


def gauss_legendre_nodes(n, dps):
    """Gauss-Legendre nodes/weights on [-1, 1] at dps digits.

    Cached per node count; a request above the cached precision polishes
    the stored roots by a few Newton steps instead of restarting from
    float seeds, so climbing to several hundred digits stays cheap.
    """
    cached = _GL_CACHE.get(n)
    if cached is not None and cached[0] >= dps:
        return cached[1], cached[2]
    if cached is None and dps > 40:
        gauss_legendre_nodes(n, max(30, dps // 2))  # climb the ladder
        cached = _GL_CACHE.get(n)
    with workdps(dps + 10):
        if cached is None:
            seeds = [mpf(np.cos(np.pi * (k - 0.25) / (n + 0.5))) for k in range(1, n + 1)]
        else:
            seeds = list(cached[1])
        nodes, weights = [], []
        for x in seeds:
            x, dp = _legendre_newton(n, x, dps)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    result = (dps, tuple(nodes), tuple(weights))
    _GL_CACHE[n] = result
    return result[1], result[2]


def _jacobi_poly(n, a, b, x):
    """Jacobi polynomial P_n^(a,b)(x) by three-term recurrence."""
    if n == 0:
        return mpf(1)
    p0 = mpf(1)
    p1 = (a - b) / 2 + (1 + (a + b) / 2) * x
    for k in range(2, n + 1):
        c1 = 2 * k * (k + a + b) * (2 * k + a + b - 2)
        c2 = (2 * k + a + b - 1) * (a * a - b * b)
        c3 = (2 * k + a + b - 2) * (2 * k + a + b - 1) * (2 * k + a + b)
        c4 = 2 * (k + a - 1) * (k + b - 1) * (2 * k + a + b)
        p0, p1 = p1, ((c2 + c3 * x) * p1 - c4 * p0) / c1
    return p1


@lru_cache(maxsize=None)
def gauss_jacobi_nodes(n, alpha, beta, dps):
    """Gauss-Jacobi nodes/weights for weight (1-x)^alpha (1+x)^beta.

    alpha, beta are passed as strings ('0.5', '-0.5', ...) so the cache key
    stays exact.  Chebyshev-family exponents use closed forms; the general
    case polishes float64 Golub-Welsch seeds by Newton iteration.
    """
    a, b = mpf(alpha), mpf(beta)
    half = mpf(1) / 2
    with workdps(dps + 10):
        if a == -half and b == -half:
            nodes = [cos((2 * k - 1) * pi / (2 * n)) for k in range(1, n + 1)]
            weights = [pi / n] * n
        elif a == half and b == half:
            nodes = [cos(k * pi / (n + 1)) for k in range(1, n + 1)]
            weights = [pi / (n + 1) * sin(k * pi / (n + 1)) ** 2 for k in range(1, n + 1)]
        elif a == half and b == -half:
            th = [2 * k * pi / (2 * n + 1) for k in range(1, n + 1)]
            nodes = [cos(t) for t in th]
            weights = [2 * pi / (2 * n + 1) * (1 - cos(t)) for t in th]
        elif a == -half and b == half:
            th = [(2 * k - 1) * pi / (2 * n + 1) for k in range(1, n + 1)]
            nodes = [cos(t) for t in th]
            weights = [2 * pi / (2 * n + 1) * (1 + cos(t)) for t in th]
        else:
            nodes, weights = _general_jacobi(n, a, b, dps)
    return tuple(nodes), tuple(weights)


def _general_jacobi(n, a, b, dps):
    # float64 seeds from the symmetric Jacobi matrix (Golub-Welsch)
    af, bf = float(a), float(b)
    diag, off = [], []
    for k in range(n):
        den = (2 * k + af + bf) * (2 * k + af + bf + 2)
        diag.append((bf * bf - af * af) / den if den != 0 else 0.0)
    for k in range(1, n):
        num = 4 * k * (k + af) * (k + bf) * (k + af + bf)
        den = (2 * k + af + bf) ** 2 * (2 * k + af + bf + 1) * (2 * k + af + bf - 1)
        off.append(np.sqrt(num / den))
    m = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    seeds = np.sort(np.linalg.eigvalsh(m))
    const = (
        mpf(2) ** (a + b + 1)
        * gamma(n + a + 1)
        * gamma(n + b + 1)
        / (factorial(n) * gamma(n + a + b + 1))
    )
    nodes, weights = [], []
    for s in seeds:
        x = mpf(s)
        for _ in range(100):
            p = _jacobi_poly(n, a, b, x)
            dp = (n + a + b + 1) / 2 * _jacobi_poly(n - 1, a + 1, b + 1, x)
            dx = p / dp
            x -= dx
            if abs(dx) < mpf(10) ** (-dps - 5):
                break
        dp = (n + a + b + 1) / 2 * _jacobi_poly(n - 1, a + 1, b + 1, x)
        nodes.append(x)
        weights.append(const / ((1 - x * x) * dp * dp))
    return nodes, weights


# ---------------------------------------------------------------------------
# rule specification and the arc integrator


@dataclass(frozen=True)
class QuadratureSpec:
    """Which rule to use on an arc and which endpoint exponents to factor.

    rule_kind      : 'gauss_legendre_composite' or 'gauss_jacobi'
    left_exponent  : exponent q of |z - start|^q behavior at the arc start
    right_exponent : exponent at the arc end
    panel_count    : starting number of panels (composite GL) or a node-count
                     scale (Gauss-Jacobi); the integrator doubles it until
                     two successive refinements agree
    """

    rule_kind: str = "gauss_legendre_composite"
    left_exponent: float = 0.0
    right_exponent: float = 0.0
    panel_count: int = 1

    def __post_init__(self):
        if self.rule_kind not in ("gauss_legendre_composite", "gauss_jacobi"):
            raise ValueError(f"unknown rule kind {self.rule_kind!r}")
        if self.left_exponent <= -1 or self.right_exponent <= -1:
            raise ValueError("endpoint exponents must exceed -1")
        if self.panel_count < 1:
            raise ValueError("panel_count must be at least 1")


GL_NODES_PER_PANEL = 24


def integrate_arc(f, arc, spec, ctx):
    """Integral of f along the arc in its orientation.

    Adaptive: the panel/node count is doubled until two successive
    evaluations agree to ctx.target_tol relative to the running scale.
    Raises NonConvergent if the refinement budget is exhausted and
    SingularInterior if the integrand is non-finite at an interior node.
    """
    if isinstance(arc, ContourArc):
        vertices = arc.vertices if arc.orientation else list(reversed(arc.vertices))
    else:
        vertices = [mpc(v) for v in arc]
    with ctx.workdps():
        prev, prev_diff = None, None
        count = spec.panel_count
        stalls = 0
        for _ in range(14):
            val = _evaluate(f, vertices, spec, count, ctx)
            if prev is not None:
                scale = max(mpf(1), abs(val))
                diff = abs(val - prev)
                if diff < ctx.tol * scale:
                    return val
                # refinement that stops reducing the difference will never
                # reach the tolerance; fail fast instead of doubling forever
                if prev_diff is not None and diff > prev_diff / 4:
                    stalls += 1
                    if stalls >= 2:
                        raise NonConvergent("arc integral refinement stagnated")
                else:
                    stalls = 0
                prev_diff = diff
            prev = val
            count *= 2
        raise NonConvergent("arc integral did not stabilize under refinement")


def _evaluate(f, vertices, spec, count, ctx):
    if spec.rule_kind == "gauss_legendre_composite":
        return _composite_gl(f, vertices, count, ctx)
    return _jacobi_arc(f, vertices, spec, count, ctx)


def _node_value(f, z):
    try:
        v = f(z)
    except ZeroDivisionError as exc:
        raise SingularInterior(f"integrand diverged at interior node {z}") from exc
    if not is_finite(v):
        raise SingularInterior(f"integrand not finite at interior node {z}")
    return mpc(v)


def _composite_gl(f, vertices, panels, ctx):
    # distribute panels over segments proportionally to arclength
    segs = list(zip(vertices, vertices[1:]))
    lengths = [abs(b - a) for a, b in segs]
    total = fsum(lengths)
    nodes, weights = gauss_legendre_nodes(GL_NODES_PER_PANEL, mp.dps)
    acc = []
    for (a, b), L in zip(segs, lengths):
        k = max(1, int(round(panels * L / total)))
        for j in range(k):
            u0 = a + (b - a) * mpf(j) / k
            u1 = a + (b - a) * mpf(j + 1) / k
            mid, half = (u0 + u1) / 2, (u1 - u0) / 2
            acc.append(half * fsum(w * _node_value(f, mid + half * x) for x, w in zip(nodes, weights)))
    return fsum(acc)


def _jacobi_arc(f, vertices, spec, count, ctx):
    """Gauss-Jacobi on a polyline: singular rules on the end segments,
    plain GL panels on interior segments."""
    a_exp = mpf(spec.right_exponent)  # weight (1-x)^alpha acts at the arc END
    b_exp = mpf(spec.left_exponent)
    n_nodes = 16 * count
    segs = list(zip(vertices, vertices[1:]))
    if len(segs) == 1:
        return _jacobi_segment(f, segs[0][0], segs[0][1], b_exp, a_exp, n_nodes)
    acc = [_jacobi_segment(f, segs[0][0], segs[0][1], b_exp, mpf(0), n_nodes)]
    for a, b in segs[1:-1]:
        acc.append(_jacobi_segment(f, a, b, mpf(0), mpf(0), n_nodes))
    acc.append(_jacobi_segment(f, segs[-1][0], segs[-1][1], mpf(0), a_exp, n_nodes))
    return fsum(acc)


def _jacobi_segment(f, a, b, left_exp, right_exp, n_nodes):
    """One straight segment with weight |z-a|^left_exp |z-b|^right_exp.

    The factored weight is divided back out of f at each node, so f is the
    full integrand (weights are never assumed split by the caller).  When
    only one endpoint carries a half-integer exponent, the square root is
    removed by the substitution s = e + (o - e) u^2 instead, which clusters
    Gauss-Legendre nodes at the singular end and avoids one-sided Jacobi
    weights entirely.
    """
    a, b = mpc(a), mpc(b)
    half_set = (mpf(-1) / 2, mpf(1) / 2)
    if left_exp == 0 and right_exp in half_set:
        return _sqrt_end_segment(f, b, a, n_nodes, -1)
    if right_exp == 0 and left_exp in half_set:
        return _sqrt_end_segment(f, a, b, n_nodes, +1)
    mid, half = (a + b) / 2, (b - a) / 2
    alpha, beta = right_exp, left_exp  # (1-x)^alpha at x=+1 maps to the b end
    nodes, weights = gauss_jacobi_nodes(n_nodes, str(alpha), str(beta), mp.dps)
    habs = abs(half)
    total = []
    for x, w in zip(nodes, weights):
        z = mid + half * x
        g = _node_value(f, z)
        # divide out the weight in arclength variables: |z-a| = habs*(1+x) etc.
        g /= (habs * (1 - x)) ** alpha * (habs * (1 + x)) ** beta
        total.append(w * g)
    return fsum(total) * half * (habs ** (alpha + beta))


def _sqrt_end_segment(f, e, o, n_nodes, sign):
    """Integral over the segment with a sqrt endpoint at e, regular end o.

    Substitutes s = e + (o - e) u^2 so f(s) * ds is analytic in u on [0, 1];
    sign +1 integrates e -> o, sign -1 integrates o -> e.
    """
    e, o = mpc(e), mpc(o)
    d = o - e
    nodes, weights = gauss_legendre_nodes(n_nodes, mp.dps)
    total = []
    for x, w in zip(nodes, weights):
        u = (x + 1) / 2  # map [-1,1] -> [0,1]
        s = e + d * u * u
        total.append(w * _node_value(f, s) * u)
    val = fsum(total) * d  # du jacobian: 2*d*u, times the 1/2 interval map
    return val if sign > 0 else -val


def integrate_segment(f, a, b, ctx, left_exp=0, right_exp=0, start_nodes=24):
    """Adaptive integral over one straight segment with endpoint exponents."""
    a, b = mpc(a), mpc(b)
    with ctx.workdps():
        le, re = mpf(left_exp), mpf(right_exp)
        prev = None
        n = start_nodes
        for _ in range(12):
            if le == 0 and re == 0:
                nodes, weights = gauss_legendre_nodes(n, mp.dps)
                mid, half = (a + b) / 2, (b - a) / 2
                val = half * fsum(
                    w * _node_value(f, mid + half * x) for x, w in zip(nodes, weights)
                )
            else:
                val = _jacobi_segment(f, a, b, le, re, n)
            if prev is not None and abs(val - prev) < ctx.tol * max(mpf(1), abs(val)):
                return val
            prev = val
            n *= 2
        raise NonConvergent("segment integral did not stabilize")
