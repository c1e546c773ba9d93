"""Plane-geometry helpers: crossing tests, routing, winding."""

from mpmath import mpf, mpc

from twocut.geometry import (
    ContourArc,
    segments_intersect,
    route_around,
    polyline_winding_count,
    point_segment_distance,
)


def test_proper_crossing_detection():
    assert segments_intersect(mpc(-1), mpc(1), mpc(0, -1), mpc(0, 1))
    assert not segments_intersect(mpc(-1), mpc(1), mpc(2, -1), mpc(2, 1))
    # collinear overlap is not a proper crossing
    assert not segments_intersect(mpc(0), mpc(1), mpc(2), mpc(3))
    assert not segments_intersect(mpc(0), mpc(2), mpc(1), mpc(3))


def test_margin_proximity():
    assert segments_intersect(mpc(-1), mpc(1), mpc(0, mpf("1e-4")), mpc(1, 1), margin=1e-3)


def test_route_around_single_obstacle():
    cut = ContourArc([mpc(-0.5, 0), mpc(0.5, 0)])
    path = route_around(mpc(0, 1), mpc(0, -1), [cut], mpf("1e-3"))
    assert path[0] == mpc(0, 1) and path[-1] == mpc(0, -1)
    for a, b in zip(path, path[1:]):
        assert not segments_intersect(a, b, cut.vertices[0], cut.vertices[1], margin=1e-4)


def test_route_around_chain():
    # a three-arc chain like the cut system
    arcs = [
        ContourArc([mpc(-2, 0), mpc(-1, 0)]),
        ContourArc([mpc(-1, 0), mpc(1, 0.2)]),
        ContourArc([mpc(1, 0.2), mpc(2, 0.4)]),
    ]
    path = route_around(mpc(0, 1), mpc(0, -1), arcs, mpf("1e-3"))
    for a, b in zip(path, path[1:]):
        for arc in arcs:
            assert not segments_intersect(a, b, arc.vertices[0], arc.vertices[1], margin=5e-4)


def test_winding_count():
    square = [mpc(1, 1), mpc(-1, 1), mpc(-1, -1), mpc(1, -1)]
    assert polyline_winding_count(square, mpc(0)) == 1
    assert polyline_winding_count(square, mpc(3, 0)) == 0
    assert polyline_winding_count(list(reversed(square)), mpc(0)) == -1


def test_arc_invariants():
    arc = ContourArc([0, 1, mpc(1, 1)])
    assert arc.is_simple()
    assert abs(arc.length() - 2) < 1e-20
    assert arc.reversed().vertices[0] == mpc(1, 1)
    assert point_segment_distance(mpc(0, 1), mpc(-1), mpc(1)) == 1
