"""Phase diagram in the t-plane: boundary curves and classification.

The boundary between the one-cut and two-cut regions is the image of
critical trajectories of the auxiliary quadratic differential
-(1 + 1/s)^3 ds^2 under the two-step map s = 2 x^3, t = (x^3 - 1)/x.  Five
critical trajectories leave s = -1 at angles 2 pi k / 5: the real segment
(-1, 0), a loop through the positive axis (crossing near 0.635), and two
arcs escaping to infinity along the imaginary axis.  The loop maps to the
bounded split curve joining t_cr = 3 * 2^(-2/3) to its rotation by
e^{2 pi i/3}; the unbounded arcs map to the two birth curves, which flank
the two-cut wedge opening toward arg t = pi/3.
"""

from dataclasses import dataclass

from mpmath import mp, mpf, mpc, exp, pi, arg, sqrt, nstr

from .errors import TraceFailure, Indeterminate, PhaseError
from .precision import PrecisionContext, CTX32
from .geometry import ContourArc, polyline_winding_count
from .tracing import trace_ode, trajectory_field

I_UNIT = mpc(0, 1)

T_CRITICAL = 3 * mpf(2) ** (-mpf(2) / 3)


@dataclass
class PhaseRegion:
    kind: str  # OneCut | TwoCut | BoundarySplit | BoundaryBirthA | BoundaryBirthB | CriticalPoint
    distance_to_boundary: mpf


def _aux_poly(s):
    return (1 + 1 / s) ** 3


def aux_critical_graph(escape_radius=350.0, ctx=CTX32, tol=1e-9):
    """The five critical trajectories of -(1 + 1/s)^3 ds^2 from s = -1.

    Returns a dict: 'segment' (the arc (-1,0)), 'loop_upper'/'loop_lower'
    (ending on the positive real axis), 'up'/'down' (escaping along the
    imaginary axis), each a ContourArc starting at -1.
    """
    with ctx.workdps():
        field = trajectory_field(_aux_poly)
        offset = mpf("1e-7")
        out = {}
        spec = [
            ("segment", 0, lambda z: abs(z) < mpf("1e-6")),
            ("loop_upper", 1, lambda z: z.imag <= 0 and z.real > mpf("0.1")),
            ("up", 2, lambda z: abs(z) > escape_radius),
            ("down", 3, lambda z: abs(z) > escape_radius),
            ("loop_lower", 4, lambda z: z.imag >= 0 and z.real > mpf("0.1")),
        ]
        for name, k, stop in spec:
            theta = 2 * pi * k / 5
            z0 = mpc(-1) + offset * exp(I_UNIT * theta)
            try:
                arc = trace_ode(
                    field,
                    z0,
                    stop,
                    step=offset * 10,
                    initial_direction=exp(I_UNIT * theta),
                    escape_radius=escape_radius * 4,
                    tol=tol,
                    ctx=ctx,
                    max_steps=400000,
                )
            except Exception as exc:
                raise TraceFailure(f"auxiliary trajectory {name} failed: {exc}") from exc
            arc.vertices.insert(0, mpc(-1))
            arc.kind = "aux"
            out[name] = arc
        return out


@dataclass
class BoundaryCurves:
    """Phase-boundary curves in the t-plane plus their x-plane sources."""

    c_split: ContourArc
    c_birth_a: ContourArc
    c_birth_b: ContourArc
    delta_split: ContourArc
    delta_birth_a: ContourArc
    delta_birth_b: ContourArc
    t_cr: mpc
    t_cr_rotated: mpc
    radius: mpf
    aux: dict

    def all_curves(self):
        return (
            ("split", self.c_split),
            ("birth_a", self.c_birth_a),
            ("birth_b", self.c_birth_b),
        )


def _unwrapped_args(vertices, start_arg):
    """Continuously unwrapped arguments along a polyline."""
    out = [mpf(start_arg)]
    prev = out[0]
    for v in vertices[1:]:
        a = arg(v)
        while a - prev > pi:
            a -= 2 * pi
        while a - prev < -pi:
            a += 2 * pi
        out.append(a)
        prev = a
    return out


def _map_to_delta(vertices, start_arg, branch_shift):
    """x = (c/2)^(1/3) along an aux-graph arc, cube-root branch tracked
    continuously from the arc's start with the given total phase shift."""
    args = _unwrapped_args(vertices, start_arg)
    out = []
    for c, th in zip(vertices, args):
        r = abs(c / 2) ** (mpf(1) / 3)
        out.append(r * exp(I_UNIT * (th + branch_shift) / 3))
    return out


def _t_of_x(x):
    return (x ** 3 - 1) / x


def boundary_curves(escape_radius=None, t_radius=30.0, ctx=CTX32):
    """Trace the auxiliary graph and push it forward to the t-plane."""
    with ctx.workdps():
        t_radius = mpf(t_radius)
        if escape_radius is None:
            escape_radius = float(2.2 * t_radius ** mpf("1.5"))
        aux = aux_critical_graph(escape_radius, ctx)

        # split curve: full loop from -1 through ~0.635 back to -1, cube
        # root started at arg(-1) = +pi (value -2^{-1/3})
        loop = list(aux["loop_upper"].vertices) + list(
            reversed(aux["loop_lower"].vertices)
        )[1:]
        args_up = _unwrapped_args(aux["loop_upper"].vertices, pi)
        args_down = _unwrapped_args(aux["loop_lower"].vertices, -pi)
        xs = [
            abs(c / 2) ** (mpf(1) / 3) * exp(I_UNIT * (th + 2 * pi) / 3)
            for c, th in zip(aux["loop_upper"].vertices, args_up)
        ]
        xs += [
            abs(c / 2) ** (mpf(1) / 3) * exp(I_UNIT * (th + 2 * pi) / 3)
            for c, th in zip(list(reversed(aux["loop_lower"].vertices))[1:], _reverse_args(args_down)[1:])
        ]
        delta_split = ContourArc(_tidy(xs), kind="delta")
        # birth a: upper unbounded arc, branch k = 0 (x-direction pi/6)
        xs_a = _map_to_delta(aux["up"].vertices, pi, 0)
        delta_birth_a = ContourArc(_tidy(xs_a), kind="delta")
        # birth b: lower unbounded arc, branch shift +4 pi (x-direction 7 pi/6)
        xs_b = _map_to_delta(aux["down"].vertices, -pi, 4 * pi)
        delta_birth_b = ContourArc(_tidy(xs_b), kind="delta")

        def push(delta_arc):
            ts = [_t_of_x(x) for x in delta_arc.vertices]
            ts = [t for t in ts if abs(t) <= t_radius * mpf("1.05")]
            return ContourArc(_tidy(ts), kind="boundary")

        curves = BoundaryCurves(
            c_split=push(delta_split),
            c_birth_a=push(delta_birth_a),
            c_birth_b=push(delta_birth_b),
            delta_split=delta_split,
            delta_birth_a=delta_birth_a,
            delta_birth_b=delta_birth_b,
            t_cr=mpc(T_CRITICAL),
            t_cr_rotated=exp(2 * pi * I_UNIT / 3) * T_CRITICAL,
            radius=t_radius,
            aux=aux,
        )
        return curves


def _reverse_args(args):
    return list(reversed(args))


def _tidy(vertices, tol=1e-20):
    out = [vertices[0]]
    for v in vertices[1:]:
        if abs(v - out[-1]) > tol:
            out.append(v)
    return out


def _two_cut_polygon(curves):
    """Closed polygon bounding the two-cut wedge: birth-b curve (reversed),
    split curve, birth-a curve, and a far arc closing the wedge."""
    far_b = curves.c_birth_b.vertices[-1]
    far_a = curves.c_birth_a.vertices[-1]
    poly = list(reversed(curves.c_birth_b.vertices))
    poly += curves.c_split.vertices
    poly += curves.c_birth_a.vertices
    # close across the wedge at large radius through the symmetry ray
    r = (abs(far_a) + abs(far_b)) / 2
    th_a, th_b = arg(far_a), arg(far_b)
    steps = 8
    for k in range(1, steps):
        th = th_a + (th_b - th_a) * mpf(k) / steps
        poly.append(r * exp(I_UNIT * th))
    return poly


class PhaseDiagram:
    """Classification of t-plane points against traced boundary curves."""

    def __init__(self, curves=None, boundary_tol=1e-8, ctx=CTX32):
        self.ctx = ctx
        self.boundary_tol = mpf(boundary_tol)
        self.curves = curves or boundary_curves(ctx=ctx)
        self._polygon = _two_cut_polygon(self.curves)

    def ensure_radius(self, r):
        if r > self.curves.radius * mpf("0.6"):
            self.curves = boundary_curves(t_radius=float(2.5 * r), ctx=self.ctx)
            self._polygon = _two_cut_polygon(self.curves)

    def classify(self, t):
        """PhaseRegion for a parameter t."""
        with self.ctx.workdps():
            t = mpc(t)
            self.ensure_radius(abs(t))
            c = self.curves
            d_cr = min(abs(t - c.t_cr), abs(t - c.t_cr_rotated))
            dists = {name: arc.distance_to(t) for name, arc in c.all_curves()}
            d_min = min(dists.values())
            if d_cr < self.boundary_tol:
                return PhaseRegion("CriticalPoint", d_cr)
            if d_min < self.boundary_tol:
                near = sorted(dists.items(), key=lambda q: q[1])
                if len(near) > 1 and near[1][1] < self.boundary_tol and d_cr > 100 * self.boundary_tol:
                    raise Indeterminate("t is near a junction of boundary curves")
                kind = {
                    "split": "BoundarySplit",
                    "birth_a": "BoundaryBirthA",
                    "birth_b": "BoundaryBirthB",
                }[near[0][0]]
                return PhaseRegion(kind, d_min)
            wind = polyline_winding_count(self._polygon, t)
            kind = "TwoCut" if wind != 0 else "OneCut"
            return PhaseRegion(kind, min(d_min, d_cr))

    def one_cut_region_hint(self, t):
        """Which analytic piece of the one-cut branch data applies at t:
        'main', 'birth_a' (sliver above the rotated ray), or 'birth_b'
        (sliver above the real ray)."""
        with self.ctx.workdps():
            t = mpc(t)
            kind = self.classify(t).kind
            if kind not in ("OneCut", "BoundarySplit", "BoundaryBirthA", "BoundaryBirthB", "CriticalPoint"):
                raise PhaseError("region hint requested for a two-cut point")
            th = arg(t)
            if abs(t) <= T_CRITICAL or not (0 < th < 2 * pi / 3):
                return "main"
            # inside the sector: main region lies inside the split curve
            wind = polyline_winding_count(self._polygon, t)
            if wind != 0:
                raise PhaseError("t is in the two-cut wedge")
            # sliver membership: between the real ray and birth-b curve the
            # argument is below the birth-b curve's argument at |t|
            for name, hint in (("birth_b", "birth_b"), ("birth_a", "birth_a")):
                arcv = dict(self.curves.all_curves())[name].vertices
                best = min(arcv, key=lambda v: abs(abs(v) - abs(t)))
                if name == "birth_b" and th < arg(best):
                    return "birth_b"
                if name == "birth_a" and th > arg(best):
                    return "birth_a"
            return "main"
