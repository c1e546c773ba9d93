"""Comparison harness: asymptotic predictions against the moment oracle.

run_compare builds the geometric pipeline once per t, then for each index n
builds a fresh oracle at N = N_n and reports relative errors of h_n,
gamma_n^2, beta_n plus wave-function errors off and on the cuts.  Errors
are formed in the log domain (the raw quantities span hundreds of orders of
magnitude) and trend statistics exclude degenerate indices.
"""

import csv
import json
from dataclasses import dataclass, field, asdict

from mpmath import mp, mpf, mpc, exp, log, pi, nstr, nint, workdps

from .errors import WrongPhase
from .precision import PrecisionContext, CTX64
from .curve import EndpointSolver, CutSystem, solve_endpoints_two_cut
from .surface import compute_constants
from .predict import Predictor
from .oracle import moment_table, recurrence_from_moments
from .phase import PhaseDiagram


@dataclass
class CompareRow:
    n: int
    N_n: int
    degenerate: bool
    h_rel_err: float = None
    gamma2_rel_err: float = None
    beta_rel_err: float = None
    beta_conditioning: bool = True
    gamma2_alt_rel: float = None
    psi_err_offcut: float = None
    psi_err_oncut: float = None
    oncut_single_term_err: float = None
    theta_star_abs: float = None  # |theta*_n(inf)|: conditioning of the row


@dataclass
class ComparisonReport:
    t: str
    n_min: int
    n_max: int
    N_rule: str
    digits: int
    rows: list = field(default_factory=list)
    trend: dict = field(default_factory=dict)

    def non_degenerate_rows(self):
        return [r for r in self.rows if not r.degenerate]

    def compute_trends(self):
        """Decay statistics over the non-degenerate rows.

        Two monotone-decay fractions are reported: raw consecutive pairs,
        and pairs at stride 2.  The conditioning of the ratio functions at
        infinity alternates with the parity of n (the inversion points hop
        between the neighborhoods of the two infinities), so consecutive
        errors compare indices from two differently-conditioned families;
        the stride-2 statistic compares like with like and is the faithful
        surrogate for the 1/n error class.
        """
        rows = self.non_degenerate_rows()
        self.trend = {}
        for attr in ("h_rel_err", "gamma2_rel_err", "psi_err_offcut", "psi_err_oncut"):
            vals = [(r.n, getattr(r, attr)) for r in rows if getattr(r, attr) is not None]
            if len(vals) < 3:
                continue
            decays = sum(1 for (n1, e1), (n2, e2) in zip(vals, vals[1:]) if e2 < e1)
            stride = [
                (a, b)
                for a, b in zip(vals, vals[2:])
            ]
            stride_decays = sum(1 for (n1, e1), (n2, e2) in stride if e2 < e1)
            self.trend[attr] = {
                "monotone_decay_fraction": decays / (len(vals) - 1),
                "stride2_decay_fraction": stride_decays / max(len(stride), 1),
                "max_n_err": max(n * e for n, e in vals),
            }
        return self.trend

    def to_json(self, path):
        data = {
            "t": self.t,
            "n_min": self.n_min,
            "n_max": self.n_max,
            "N_rule": self.N_rule,
            "digits": self.digits,
            "rows": [asdict(r) for r in self.rows],
            "trend": self.trend,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=1)

    def to_csv(self, path):
        cols = [
            "n",
            "N_n",
            "degenerate",
            "h_rel_err",
            "gamma2_rel_err",
            "beta_rel_err",
            "beta_conditioning",
            "gamma2_alt_rel",
            "psi_err_offcut",
            "psi_err_oncut",
            "oncut_single_term_err",
        ]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.rows:
                w.writerow([getattr(r, c) for c in cols])


def _log_rel_err(pred_log, oracle_log):
    """|exp(pred_log - oracle_log) - 1| with the phase aligned mod 2 pi."""
    d = pred_log - oracle_log
    d -= 2 * pi * mpc(0, 1) * nint(d.imag / (2 * pi))
    return abs(exp(d) - 1)


def build_pipeline(t, ctx=CTX64, solver=None, eps=0.1, cross_tol=1e-8, check_phase=True):
    """classify -> endpoints -> constants -> predictor, shared by the CLI."""
    if check_phase:
        pd = PhaseDiagram()
        kind = pd.classify(t).kind
        if kind != "TwoCut":
            raise WrongPhase(f"t classifies as {kind}; the pipeline needs TwoCut")
    E = solve_endpoints_two_cut(t, solver=solver, ctx=ctx)
    sc = compute_constants(CutSystem(E), ctx)
    return Predictor(sc, ctx, eps=eps, cross_tol=cross_tol)


def pick_offcut_point(E, factor=2.0):
    """A test point on the circle |z| = factor * scale maximizing distance
    to the cut chain (deterministic)."""
    with workdps(40):
        cuts = CutSystem(E)
        best = None
        for k in range(24):
            z = mpf(factor) * E.scale * exp(2 * pi * mpc(0, 1) * k / 24 + mpc(0, 1) * mpf("0.07"))
            d = min(obs.distance_to(z) for obs in cuts.obstacles())
            if best is None or d > best[0]:
                best = (d, z)
        return best[1]


def run_compare(
    t,
    n_min=10,
    n_max=30,
    N_rule="equal",
    digits=200,
    ctx=CTX64,
    eps=0.1,
    check_phase=True,
    progress=None,
):
    """Full pipeline + oracle comparison over an index range.

    N_rule is 'equal' (N_n = n) or 'offset:k' (N_n = n + k).
    """
    offset = 0
    if isinstance(N_rule, str) and N_rule.startswith("offset"):
        offset = int(N_rule.split(":", 1)[1]) if ":" in N_rule else 0
    pred = build_pipeline(t, ctx=ctx, eps=eps, check_phase=check_phase)
    E = pred.sc.endpoints
    report = ComparisonReport(
        t=nstr(mpc(t), 17),
        n_min=n_min,
        n_max=n_max,
        N_rule=str(N_rule),
        digits=digits,
    )
    with ctx.workdps():
        z_off = pick_offcut_point(E)
        s_mid = (E.a2 + E.b2) / 2
        normal = mpc(0, 1) * (E.b2 - E.a2) / abs(E.b2 - E.a2)
    for n in range(n_min, n_max + 1):
        N_n = n + offset
        row = CompareRow(n=n, N_n=N_n, degenerate=False)
        table = moment_table(mpc(t), N_n, 2 * (n + 2) + 2, digits)
        res = recurrence_from_moments(table, n + 1)
        p = pred.prediction(n, N_n)
        row.degenerate = p.degenerate
        with ctx.workdps():
            h_or, g2_or, b_or = res.h[n], res.gamma2[n], res.beta[n]
            row.theta_star_abs = float(abs(p.theta_star_inf))
            row.h_rel_err = float(abs(p.h_n / h_or - 1))
            row.gamma2_rel_err = float(abs(p.gamma2_n / g2_or - 1))
            row.beta_conditioning = p.beta_conditioning
            if p.beta_conditioning:
                row.beta_rel_err = float(abs(p.beta_n - b_or) / max(abs(b_or), mpf(1)))
            row.gamma2_alt_rel = float(abs(p.gamma2_alt / p.gamma2_n - 1))
            lp, _ = pred.log_psi(n, N_n, z_off)
            lo = res.psi_log(n, z_off, pred.pack.ell_star)
            row.psi_err_offcut = float(_log_rel_err(lp, lo))
            hp, hm = pred.psi_oncut_terms(n, N_n, s_mid, normal)
            psi_or = exp(res.psi_log(n, s_mid, pred.pack.ell_star))
            two_term = exp(hp) + exp(hm)
            envelope = abs(exp(hp)) + abs(exp(hm))
            row.psi_err_oncut = float(abs(psi_or - two_term) / envelope)
            row.oncut_single_term_err = float(abs(psi_or - exp(hp)) / envelope)
        report.rows.append(row)
        if progress:
            progress(row)
    report.compute_trends()
    return report


# ---------------------------------------------------------------------------
# figure data export


def _resample_graded(arc, count):
    """Resample a traced polyline at cosine-graded arclength (nodes cluster
    at the endpoints, where the density vanishes like a square root, so a
    trapezoid over the samples keeps full accuracy)."""
    from mpmath import cos, fsum

    verts = arc.vertices
    seg_len = [abs(b - a) for a, b in zip(verts, verts[1:])]
    total = fsum(seg_len)
    cum = [mpf(0)]
    for L in seg_len:
        cum.append(cum[-1] + L)
    out = []
    j = 0
    for k in range(count + 1):
        s = total * (1 - cos(pi * mpf(k) / count)) / 2
        while j < len(seg_len) - 1 and cum[j + 1] < s:
            j += 1
        frac = (s - cum[j]) / seg_len[j] if seg_len[j] > 0 else mpf(0)
        out.append(verts[j] + (verts[j + 1] - verts[j]) * frac)
    # endpoints themselves carry zero density; keep strictly interior nodes
    return out[1:-1]


def emit_figure_data(kind, out_path, t=None, ctx=CTX64, t_radius=30.0):
    """CSV data behind the standard pictures; deterministic row order."""
    if kind == "phase_diagram":
        pd = PhaseDiagram()
        pd.ensure_radius(mpf(t_radius) / mpf("2.5"))
        rows = [("curve_id", "re_t", "im_t")]
        for name, arc in pd.curves.all_curves():
            for v in arc.vertices:
                rows.append((name, nstr(v.real, 17), nstr(v.imag, 17)))
        for name, val in (("t_cr", pd.curves.t_cr), ("t_cr_rotated", pd.curves.t_cr_rotated)):
            rows.append((name, nstr(mpc(val).real, 17), nstr(mpc(val).imag, 17)))
    elif kind == "critical_graph":
        if t is None:
            raise ValueError("critical_graph export needs --t")
        from .curve import critical_graph

        E = solve_endpoints_two_cut(t, ctx=ctx)
        short, unbounded, _ = critical_graph(E)
        rows = [("arc_id", "kind", "re", "im")]
        for (la, lb), arc in sorted(short.items()):
            for v in arc.vertices:
                rows.append((f"{la}-{lb}", "traj", nstr(v.real, 17), nstr(v.imag, 17)))
        for i, (lab, ang, arc) in enumerate(unbounded):
            for v in arc.vertices:
                rows.append((f"unbounded-{lab}-{i}", "traj", nstr(v.real, 17), nstr(v.imag, 17)))
    elif kind == "density":
        if t is None:
            raise ValueError("density export needs --t")
        from .curve import critical_graph, equilibrium_density

        E = solve_endpoints_two_cut(t, ctx=ctx)
        short, _, _ = critical_graph(E)
        rows = [("arc_id", "re", "im", "density")]
        with ctx.workdps():
            for pair in (("a1", "b1"), ("a2", "b2")):
                arc = short[tuple(sorted(pair))]
                for v in _resample_graded(arc, 800):
                    rows.append(
                        (
                            f"{pair[0]}-{pair[1]}",
                            nstr(v.real, 17),
                            nstr(v.imag, 17),
                            nstr(equilibrium_density(v, E), 17),
                        )
                    )
    elif kind == "contour":
        if t is None:
            raise ValueError("contour export needs --t")
        from .curve import s_contour

        cs = s_contour(t, ctx=ctx)
        rows = [("arc_id", "kind", "re", "im")]
        for v in cs.gamma.vertices:
            rows.append(("gamma", "contour", nstr(v.real, 17), nstr(v.imag, 17)))
        for v in cs.i_arc.vertices:
            rows.append(("i_arc", "cut", nstr(v.real, 17), nstr(v.imag, 17)))
    else:
        raise ValueError(f"unknown figure kind {kind!r}")
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        for row in rows:
            w.writerow(row)
    return out_path
