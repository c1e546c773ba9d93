"""Theta function and the index ratio machinery."""

import random

import pytest
from mpmath import mp, mpf, mpc, exp, pi, workdps

from twocut.precision import PrecisionContext
from twocut.theta import theta, ThetaEngine
from twocut.surface import SurfacePoint, jacobi_invert
from twocut.errors import SlowConvergence

CTX = PrecisionContext(64, 1e-40)


@pytest.fixture(scope="module")
def engine(constants_ref):
    return ThetaEngine(constants_ref, CTX)


def test_quasi_periodicity(constants_ref):
    b = constants_ref.b_period
    rng = random.Random(3)
    with workdps(64):
        for _ in range(100):
            u = mpc(rng.uniform(-2, 2), rng.uniform(-1, 1))
            j, m = rng.randint(-2, 2), rng.randint(-2, 2)
            lhs = theta(u + j + b * m, b, CTX)
            rhs = exp(-pi * mpc(0, 1) * b * m * m - 2 * pi * mpc(0, 1) * u * m) * theta(u, b, CTX)
            scale = max(abs(lhs), abs(rhs), mpf(1))
            assert abs(lhs - rhs) / scale < mpf("1e-12")


def test_theta_zero_at_half_period(constants_ref):
    b = constants_ref.b_period
    with workdps(64):
        assert abs(theta((1 + b) / 2, b, CTX)) < mpf("1e-12")


def test_zero_locus_unique_in_cell(constants_ref):
    # coarse scan of the fundamental cell: the minimum of |theta| sits at
    # the half period
    b = constants_ref.b_period
    with workdps(40):
        best = None
        for ix in range(9):
            for iy in range(9):
                u = (mpf(ix) / 9 - mpf("0.5")) + b * (mpf(iy) / 9 - mpf("0.5"))
                v = abs(theta(u + (1 + b) / 2, b, CTX))
                if best is None or v < best[0]:
                    best = (v, ix, iy)
        # the smallest sample is the one nearest the lattice point
        _, ix, iy = best
        assert abs(ix / 9 - 0.5) < 0.2 and abs(iy / 9 - 0.5) < 0.2


def test_slow_convergence_guard():
    with pytest.raises(SlowConvergence):
        theta(mpc(0), mpc(1, 1e-4), CTX)


def test_alpha_jump_of_ratio(engine, constants_ref):
    """Across the connector the ratio functions jump by the index phase
    exp(-2 pi i (omega n + (n - N_n) varsigma))."""
    sc = constants_ref
    E = sc.endpoints
    n, N_n = 9, 7
    with workdps(64):
        s = (E.b1 + E.a2) / 2
        nrm = mpc(0, 1) * (E.a2 - E.b1) / abs(E.a2 - E.b1)

        def one_sided(side):
            # Richardson-extrapolated boundary value (kills the O(eps) term)
            eps = mpf("1e-8") * E.scale
            v1 = engine.ratio(n, N_n, s + side * eps * nrm, sheet=0)
            v2 = engine.ratio(n, N_n, s + side * eps / 2 * nrm, sheet=0)
            return 2 * v2 - v1

        jump = one_sided(+1) / one_sided(-1)
        expect = exp(-2 * pi * mpc(0, 1) * (sc.omega * n + (n - N_n) * sc.varsigma))
        alt = 1 / expect  # orientation of the crossing fixes which side is +
        assert min(abs(jump / expect - 1), abs(jump / alt - 1)) < mpf("1e-9")


def test_ratio_vanishes_linearly_at_inversion_point(engine, constants_ref):
    sc = constants_ref
    n = 11
    ip = engine.indices(n, n, invert=True)
    z1 = ip.z_n1
    with workdps(64):
        base = abs(engine.ratio(n, n, z1.z, sheet=z1.sheet))
        assert base < mpf("1e-8")
        vals = []
        for d in (mpf("1e-3"), mpf("2e-3")):
            vals.append(abs(engine.ratio(n, n, z1.z + d, sheet=z1.sheet)))
        # linear vanishing: doubling the offset doubles the value
        assert 1.5 < float(vals[1] / vals[0]) < 2.5


def test_product_identity_ratio_constant(engine, constants_ref):
    """Theta_{n,0} is a constant multiple of Theta * Theta_{n-1,1}(.; N_n):
    the ratio is constant across sample points (here the constant is 1 by
    the shared normalization of the factors)."""
    sc = constants_ref
    n, N_n = 10, 10
    rng = random.Random(17)
    with workdps(64):
        vals = []
        for _ in range(10):
            u = mpc(rng.uniform(-0.4, 0.4), rng.uniform(-0.2, 0.2))
            th_n0 = engine.ratio_at_abel(n, N_n, 0, u)
            cap = engine.capital_theta_at_abel(u)
            shifted = engine.ratio_at_abel(n - 1, N_n, 1, u)
            vals.append(th_n0 / (cap * shifted))
        spread = max(abs(v / vals[0] - 1) for v in vals)
        assert spread < mpf("1e-9")


def test_bounded_product_with_outer_function(engine, predictor_ref, constants_ref):
    """|A(z) Theta_n(z)| stays bounded on the delta-excised plane."""
    sc = constants_ref
    E = sc.endpoints
    sp = predictor_ref.szego
    rng = random.Random(23)
    n = 12
    with workdps(64):
        td = engine.normalized_ratios(n, n)
        vals = []
        tried = 0
        while len(vals) < 100 and tried < 400:
            tried += 1
            z = mpc(rng.uniform(-6, 6), rng.uniform(-6, 6))
            if min(abs(z - e) for e in E.as_tuple()) < mpf("0.3"):
                continue
            try:
                a_val, _ = sp.ab_outer(z)
                th = engine.ratio(n, n, z, sheet=0) # un-normalized Theta_n
            except Exception:
                continue
            vals.append(abs(a_val * th))
        assert len(vals) == 100
        assert max(vals) < 100  # C(delta) exists at this excision scale


def test_degeneracy_dual_and_scan(engine, constants_ref):
    """z_{n,1} on sheet 1 implies non-degenerate; the admissible set over
    n = 1..200 is nonempty; the dual location check links z_{n,1} near
    inf^(0) with z_{n,0} near inf^(1)."""
    sc = constants_ref
    with workdps(64):
        degen = []
        for n in range(1, 201):
            flag = engine.degeneracy_check(n, n, eps=0.1)
            degen.append(flag)
            if flag:
                ip = engine.indices(n, n)
                d0 = sc.lattice_distance(ip.abel_zn1 - sc.a_inf0)
                d1 = sc.lattice_distance(ip.abel_zn0 + sc.a_inf0)
                assert d1 < 3 * d0 + mpf("1e-6")
        assert sum(degen) < len(degen)  # non-degenerate indices exist


def test_degenerate_index_raises_by_default(engine):
    # n = 21 is the degenerate index of the reference scan; asking for its
    # normalized ratios without opting in must fail loudly
    from twocut.errors import DegenerateIndex

    with workdps(64):
        degen_n = next(n for n in range(1, 60) if engine.degeneracy_check(n, n))
        with pytest.raises(DegenerateIndex):
            engine.normalized_ratios(degen_n, degen_n)
        td = engine.normalized_ratios(degen_n, degen_n, allow_degenerate=True)
        assert td.degenerate


def test_adjacent_index_non_degenerate(engine, constants_ref):
    """With N_n = n the difference N_{n+1} - N_n = 1, so at least one of
    n, n+1 is admissible for small excluded neighborhoods."""
    with workdps(64):
        for n in range(1, 60):
            assert not (
                engine.degeneracy_check(n, n, eps=0.1)
                and engine.degeneracy_check(n + 1, n + 1, eps=0.1)
            )
