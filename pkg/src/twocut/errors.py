"""Exception hierarchy shared by all modules.

Every failure mode that callers are expected to handle gets its own class so
that the CLI can map families of errors onto stable exit codes:

  * ``PhaseError``       -> exit code 2 (wrong phase / precondition not met)
  * ``ConvergenceError`` -> exit code 3 (numerics did not converge)
  * ``CrossCheckError``  -> exit code 4 (two independent routes disagree)
"""


class TwoCutError(Exception):
    """Base class for all package errors."""


# ---------------------------------------------------------------------------
# precondition / phase errors (exit code 2)


class PhaseError(TwoCutError):
    pass


class WrongPhase(PhaseError):
    """Operation requires a different phase region for t."""


class Indeterminate(PhaseError):
    """t is too close to a junction of boundary curves to classify."""


class BoundaryTooClose(PhaseError):
    """t is inside the guard radius around the phase boundary."""


class MissingPrerequisite(PhaseError):
    """A pipeline stage was requested before its inputs were computed."""


class DegenerateIndex(PhaseError):
    """Index n lies outside the admissible set N(t, eps)."""


class OnCut(PhaseError):
    """Evaluation point lies on a branch cut; request a one-sided trace."""


class OnContour(OnCut):
    pass


class OnCycle(OnCut):
    pass


# ---------------------------------------------------------------------------
# convergence errors (exit code 3)


class ConvergenceError(TwoCutError):
    pass


class NonConvergent(ConvergenceError):
    """Adaptive refinement stalled above the tolerance budget."""


class SingularInterior(ConvergenceError):
    """Integrand overflowed at an interior quadrature node."""


class SingularJacobian(ConvergenceError):
    """Jacobian condition estimate exceeds 1/target_tol."""


class MaxIterations(ConvergenceError):
    pass


class StepUnderflow(ConvergenceError):
    """ODE tracer step size collapsed near an unexpected critical point."""


class Runaway(ConvergenceError):
    """ODE trace left the escape radius without the stop predicate firing."""


class TraceFailure(ConvergenceError):
    pass


class ContinuationStall(ConvergenceError):
    """Endpoint continuation could not reach the target t."""


class LabelAmbiguity(ConvergenceError):
    """Branch-point labels could not be assigned unambiguously."""


class TopologyMismatch(ConvergenceError):
    """Critical graph does not show the expected number of short trajectories."""


class ArcConstructionFailure(ConvergenceError):
    """Could not thread an arc through the required region."""


class SlowConvergence(ConvergenceError):
    """Theta series would need an unreasonable truncation (Im B too small)."""


class StencilDegenerate(ConvergenceError):
    """A finite-difference stencil point hit a Hankel zero."""


class RecursionDrift(ConvergenceError):
    """Moment recursion disagrees with direct quadrature spot-check."""


class DegenerateHankel(ConvergenceError):
    """A Hankel pivot underflowed the precision budget."""

    def __init__(self, n, message=None):
        self.n = n
        super().__init__(message or f"Hankel pivot h_{n} below precision floor")


# ---------------------------------------------------------------------------
# cross-check errors (exit code 4)


class CrossCheckError(TwoCutError):
    pass


# ---------------------------------------------------------------------------
# warnings (reported, not raised)


class NearPoleWarning(UserWarning):
    """Ratio-function evaluation close to its pole; value is conditioned."""


class IllConditionedWarning(UserWarning):
    """A leading term is reported although its denominator is tiny."""


class SeedMismatch(CrossCheckError):
    """The two independent moment-seed routes disagree."""


class CrossCheckFailure(CrossCheckError):
    """Master integration check failed (orientation or branch bug)."""


class RealityViolation(CrossCheckError):
    """A constant that must be real came out with a large imaginary part."""
