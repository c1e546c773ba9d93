"""Oriented polylines and plane-geometry helpers.

ContourArc is the one shared representation for every curve in the package:
branch cuts, critical trajectories, quadrature paths, and phase-boundary
curves.  Vertices are mpmath complex numbers; an arc is a piecewise-linear
approximation of the underlying smooth curve, fine enough that downstream
consumers only ever need segment-level queries (length, distance, crossing).
"""

from dataclasses import dataclass, field

from mpmath import mpc, mpf, fsum

from .errors import TwoCutError


@dataclass
class ContourArc:
    """Oriented polyline with optional endpoint labels.

    vertices      : ordered complex points (at least two, consecutive distinct)
    orientation   : True if traversed vertices[0] -> vertices[-1]
    endpoint_tags : optional labels such as 'a1', 'b1', 'inf(pi/3)'
    kind          : free-form tag ('traj', 'orth', 'cut', 'contour', ...)
    """

    vertices: list
    orientation: bool = True
    endpoint_tags: tuple = (None, None)
    kind: str = ""

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise TwoCutError("ContourArc needs at least 2 vertices")
        self.vertices = [mpc(v) for v in self.vertices]
        for u, v in zip(self.vertices, self.vertices[1:]):
            if u == v:
                raise TwoCutError("consecutive ContourArc vertices must differ")

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def reversed(self):
        return ContourArc(
            list(reversed(self.vertices)),
            self.orientation,
            (self.endpoint_tags[1], self.endpoint_tags[0]),
            self.kind,
        )

    def length(self):
        return fsum(abs(v - u) for u, v in zip(self.vertices, self.vertices[1:]))

    def segments(self):
        return list(zip(self.vertices, self.vertices[1:]))

    def distance_to(self, z):
        """Euclidean distance from z to the polyline."""
        z = mpc(z)
        return min(point_segment_distance(z, u, v) for u, v in self.segments())

    def is_simple(self, resolution=1e-12):
        """True if the polyline does not cross itself (within resolution)."""
        segs = self.segments()
        n = len(segs)
        for i in range(n):
            for j in range(i + 2, n):
                # consecutive segments share a vertex; skip that pair
                if i == 0 and j == n - 1 and self.vertices[0] == self.vertices[-1]:
                    continue
                if segments_intersect(*segs[i], *segs[j], margin=resolution):
                    return False
        return True


def point_segment_distance(z, a, b):
    z, a, b = mpc(z), mpc(a), mpc(b)
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0:
        return abs(z - a)
    t = ((z - a).real * d.real + (z - a).imag * d.imag) / L2
    t = max(mpf(0), min(mpf(1), t))
    return abs(z - (a + t * d))


def _orient(a, b, c):
    v = (b - a).real * (c - a).imag - (b - a).imag * (c - a).real
    return v


def segments_intersect(p1, p2, q1, q2, margin=0):
    """True if segments [p1,p2] and [q1,q2] properly cross (or pass within
    margin).  Near-collinear configurations are not crossings: the straddle
    test requires the orientation values to clear a relative epsilon."""
    p1, p2, q1, q2 = mpc(p1), mpc(p2), mpc(q1), mpc(q2)
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    span = max(abs(p2 - p1), abs(q2 - q1), mpf("1e-30"))
    eps = mpf("1e-25") * span * span

    def straddles(a, b):
        return (a > eps and b < -eps) or (a < -eps and b > eps)

    if straddles(d1, d2) and straddles(d3, d4):
        return True
    if margin > 0:
        return (
            point_segment_distance(p1, q1, q2) < margin
            or point_segment_distance(p2, q1, q2) < margin
            or point_segment_distance(q1, p1, p2) < margin
            or point_segment_distance(q2, p1, p2) < margin
        )
    return False


def segment_crosses_arc(a, b, arc, margin=0):
    return any(segments_intersect(a, b, u, v, margin) for u, v in arc.segments())


def route_around(start, end, obstacles, margin, max_detours=24):
    """Polyline from start to end avoiding a list of ContourArc obstacles.

    Tries a greedy endpoint-detour first (cheap, covers the common case of
    a single offending cut); falls back to a small visibility graph over
    offset nodes placed around the obstacle endpoints, searched by
    Dijkstra.  Raises TwoCutError when no clear path exists at this margin.
    """
    start, end = mpc(start), mpc(end)
    path = [start, end]
    for _ in range(max_detours):
        changed = False
        i = 0
        while i < len(path) - 1:
            a, b = path[i], path[i + 1]
            hit = None
            for obs in obstacles:
                if segment_crosses_arc(a, b, obs, margin):
                    hit = obs
                    break
            if hit is None:
                i += 1
                continue
            wp = _detour_waypoint(a, b, hit, margin)
            if any(abs(wp - p) < margin / 4 for p in path):
                return _route_visibility(start, end, obstacles, margin)
            path.insert(i + 1, wp)
            changed = True
            if len(path) > max_detours:
                return _route_visibility(start, end, obstacles, margin)
        if not changed:
            return path
    return _route_visibility(start, end, obstacles, margin)


def _route_visibility(start, end, obstacles, margin):
    """Shortest obstacle-avoiding polyline through offset nodes placed on
    rings around every obstacle endpoint.  The search itself runs in float
    arithmetic (clearances are far above float resolution); the returned
    waypoints are re-checked against the obstacles at full precision.
    """
    import cmath
    import heapq

    segs = []
    ends = []
    scale = 1.0
    for obs in obstacles:
        ends.extend([complex(obs.vertices[0]), complex(obs.vertices[-1])])
        scale = max(scale, float(obs.length()))
        segs.extend([(complex(u), complex(v)) for u, v in obs.segments()])
    fm = float(margin)
    nodes = [complex(start), complex(end)]
    for e in ends:
        for radius in (scale / 4, scale / 2):
            for k in range(8):
                nodes.append(e + radius * cmath.exp(1j * (0.785398 * k + 0.19)))
    n = len(nodes)

    def fdist(z, a, b):
        d = b - a
        L2 = abs(d) ** 2
        if L2 == 0:
            return abs(z - a)
        tt = max(0.0, min(1.0, ((z - a).real * d.real + (z - a).imag * d.imag) / L2))
        return abs(z - (a + tt * d))

    def fcross(p1, p2, q1, q2):
        def orient(a, b, c):
            return (b - a).real * (c - a).imag - (b - a).imag * (c - a).real

        d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
        d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
        if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
            return True
        return (
            fdist(p1, q1, q2) < fm
            or fdist(p2, q1, q2) < fm
            or fdist(q1, p1, p2) < fm
            or fdist(q2, p1, p2) < fm
        )

    def clear(a, b):
        return not any(fcross(a, b, u, v) for u, v in segs)

    dist = [None] * n
    prev = [None] * n
    dist[0] = 0.0
    heap = [(0.0, 0)]
    seen = set()
    while heap:
        d, i = heapq.heappop(heap)
        if i in seen:
            continue
        seen.add(i)
        if i == 1:
            break
        for j in range(n):
            if j in seen or j == i:
                continue
            if not clear(nodes[i], nodes[j]):
                continue
            nd = d + abs(nodes[j] - nodes[i])
            if dist[j] is None or nd < dist[j]:
                dist[j] = nd
                prev[j] = i
                heapq.heappush(heap, (nd, j))
    if 1 not in seen:
        raise TwoCutError("no obstacle-avoiding path found at this margin")
    out = [1]
    while out[-1] != 0:
        out.append(prev[out[-1]])
    chain = list(reversed(out))
    path = [start] + [mpc(nodes[i]) for i in chain[1:-1]] + [end]
    for a, b in zip(path, path[1:]):
        for obs in obstacles:
            if segment_crosses_arc(a, b, obs, margin / 2):
                raise TwoCutError("visibility route failed full-precision check")
    return path


def _detour_waypoint(a, b, arc, margin):
    """Waypoint just beyond the nearer end of the obstructing arc."""
    # pick the arc endpoint closer to the segment [a, b]
    cands = []
    for e_idx in (0, -1):
        e = arc.vertices[e_idx]
        nb = arc.vertices[1] if e_idx == 0 else arc.vertices[-2]
        tang = (e - nb) / abs(e - nb)  # outward tangent at that end
        cands.append((point_segment_distance(e, a, b), e, tang))
    cands.sort(key=lambda c: c[0])
    _, e, tang = cands[0]
    # step past the endpoint along the outward tangent, offset sideways;
    # the step must clear the obstacle, so it scales with the arc itself
    side = 1 if _orient(a, b, e) > 0 else -1
    normal = mpc(0, 1) * tang * side
    step = max(margin * 8, arc.length() / 5)
    return e + (tang + normal) * step


def polyline_winding_count(path_vertices, z):
    """Number of times the closed polyline winds around z (signed)."""
    z = mpc(z)
    total = 0
    n = len(path_vertices)
    for i in range(n):
        a = path_vertices[i] - z
        b = path_vertices[(i + 1) % n] - z
        cross = a.real * b.imag - a.imag * b.real
        dot = a.real * b.real + a.imag * b.imag
        from mpmath import atan2

        total += atan2(cross, dot)
    from mpmath import pi

    return int(round(float(total / (2 * pi))))
