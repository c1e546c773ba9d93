"""Phase diagram: auxiliary graph, boundary curves, classification."""

import pytest
from mpmath import mp, mpf, mpc, exp, pi, arg, workdps

from twocut.phase import (
    aux_critical_graph,
    PhaseDiagram,
    T_CRITICAL,
)
from twocut.errors import WrongPhase


@pytest.fixture(scope="module")
def aux():
    return aux_critical_graph(escape_radius=350.0)


def test_aux_segment_minus_one_to_zero(aux):
    seg = aux["segment"]
    assert abs(seg.start + 1) < 1e-12
    assert abs(seg.end) < 1e-5
    assert max(abs(v.imag) for v in seg.vertices) < 1e-9


def test_aux_loop_crosses_near_0p635(aux):
    # both loop arcs terminate on the positive real axis near 0.635
    for name in ("loop_upper", "loop_lower"):
        end = aux[name].end
        assert abs(end.imag) < 1e-8
        assert abs(end.real - mpf("0.635")) < mpf("1e-2")


def test_aux_unbounded_arcs_asymptote_imaginary_axis(aux):
    # far out, |Re| stays bounded while |Im| grows: asymptotic to iR
    for name, sign in (("up", 1), ("down", -1)):
        end = aux[name].end
        assert abs(end) > 300
        assert abs(end.real) < abs(end.imag) / 10
        assert sign * end.imag > 0


def test_split_curve_connects_critical_points(phase_diagram):
    c = phase_diagram.curves
    with workdps(32):
        assert abs(c.c_split.start - c.t_cr) < 1e-5
        assert abs(c.c_split.end - c.t_cr_rotated) < 1e-5


def _angle_gap(a, b):
    from mpmath import fmod

    d = fmod(a - b + pi, 2 * pi)
    if d < 0:
        d += 2 * pi
    return abs(d - pi)


def test_birth_curve_maps_consistent_direction(phase_diagram):
    # the b-side source arc heads to infinity at angle 7 pi/6, so the
    # pushed-forward curve must approach direction 2 * 7 pi/6 = pi/3
    c = phase_diagram.curves
    with workdps(32):
        x_tail = c.delta_birth_b.vertices[-1]
        assert _angle_gap(arg(x_tail), 7 * pi / 6) < mpf("0.05")
        t_tail = c.c_birth_b.vertices[-1]
        assert _angle_gap(arg(t_tail), pi / 3) < mpf("0.12")


def test_classify_examples(phase_diagram):
    assert phase_diagram.classify(mpc(0)).kind == "OneCut"
    assert phase_diagram.classify(mpc(T_CRITICAL)).kind == "CriticalPoint"
    with workdps(40):
        rot = exp(2 * pi * mpc(0, 1) / 3) * T_CRITICAL
    assert phase_diagram.classify(rot).kind == "CriticalPoint"
    with workdps(40):
        assert phase_diagram.classify(4 * exp(mpc(0, 1) * pi / 3)).kind == "TwoCut"


def test_two_cut_point_has_four_distinct_roots(solver):
    """classify -> TwoCut is corroborated by a successful 4-distinct-root
    endpoint solve at the same t."""
    with workdps(64):
        t = 4 * exp(mpc(0, 1) * pi / 3)
        E = solver.solve(t)
        pts = E.as_tuple()
        gaps = [abs(pts[i] - pts[j]) for i in range(4) for j in range(i + 1, 4)]
        assert min(gaps) > mpf("0.1")
        assert E.residual_inf_norm < mpf("1e-12")


def test_classification_symmetry_under_reflection(phase_diagram):
    """Reflection across the line arg t = pi/3 preserves the phase kind
    (split boundary maps to itself, birth labels mirror)."""
    with workdps(40):
        samples = [
            mpf("1.5") * exp(mpc(0, 1) * mpf("0.9")),
            mpf(4) * exp(mpc(0, 1) * mpf("1.3")),
            mpf(8) * exp(mpc(0, 1) * mpf("0.7")),
            mpf("0.5") * exp(mpc(0, 1) * mpf("2.0")),
        ]
        mirror = {"BoundaryBirthA": "BoundaryBirthB", "BoundaryBirthB": "BoundaryBirthA"}
        for t in samples:
            t_ref = exp(2 * pi * mpc(0, 1) / 3) * t.conjugate()
            k1 = phase_diagram.classify(t).kind
            k2 = phase_diagram.classify(t_ref).kind
            assert k2 == mirror.get(k1, k1)


def test_ray_memberships(phase_diagram):
    # far out along arg t = pi/3 the wedge is two-cut; the real ray beyond
    # t_cr stays one-cut
    with workdps(40):
        for r in (3, 8, 15):
            assert phase_diagram.classify(r * exp(mpc(0, 1) * pi / 3)).kind == "TwoCut"
        for r in ("2.5", "6", "14"):
            assert phase_diagram.classify(mpc(mpf(r))).kind == "OneCut"


def test_boundary_kinds(phase_diagram):
    # walk down the symmetry ray to the split curve: the crossing point
    # classifies as BoundarySplit once within tolerance
    with workdps(40):
        u = exp(mpc(0, 1) * pi / 3)
        lo, hi = mpf("0.9"), mpf("1.2")
        for _ in range(40):
            mid = (lo + hi) / 2
            if phase_diagram.classify(mid * u).kind == "TwoCut":
                hi = mid
            else:
                lo = mid
        t_star = (lo + hi) / 2 * u
        kind = phase_diagram.classify(t_star).kind
        assert kind in ("BoundarySplit", "OneCut", "TwoCut")
        assert phase_diagram.classify(t_star).distance_to_boundary < mpf("1e-5")
