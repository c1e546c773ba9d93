"""Two-cut phase of the complex cubic ensemble: geometry, theta machinery,
strong asymptotics of the orthogonal polynomials, and an independent
extended-precision moment oracle to verify every formula against.
"""

__version__ = "0.1.0"

from .precision import PrecisionContext, CTX64, CTX32
from .geometry import ContourArc
from .quadrature import QuadratureSpec, integrate_arc, integrate_segment
from .solving import newton_solve
from .tracing import trace_ode, trajectory_field, orthogonal_field
from .phase import PhaseDiagram, PhaseRegion, boundary_curves, aux_critical_graph
from .curve import (
    EndpointSet,
    OneCutTriple,
    CutSystem,
    EndpointSolver,
    endpoints_one_cut,
    solve_endpoints_two_cut,
    q_half,
    u_function,
    critical_graph,
    equilibrium_density,
    cut_masses,
    s_contour,
)
from .surface import (
    SurfacePoint,
    SurfaceConstants,
    compute_constants,
    abel_map,
    jacobi_invert,
    index_points,
)
from .theta import theta, ThetaEngine, ThetaData
from .szego import SzegoPhase, PhasePack
from .predict import Predictor, AsymptoticPrediction
from .oracle import (
    MomentTable,
    OracleResult,
    moment_seed,
    moment_table,
    recurrence_from_moments,
    partition_and_toda,
)
from .report import run_compare, emit_figure_data, ComparisonReport
