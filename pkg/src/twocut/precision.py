"""Precision contexts and small mpmath helpers.

All numerical work in the package runs through mpmath.  A PrecisionContext
bundles the decimal-digit budget with the relative tolerance used by adaptive
loops; passing it explicitly keeps every operation pure (no module mutates
the global mpmath precision outside a ``with extradps/workdps`` block).
"""

from dataclasses import dataclass

from mpmath import mp, mpf, mpc, workdps


@dataclass(frozen=True)
class PrecisionContext:
    """Digit budget and stopping tolerance for one computation.

    working_digits : decimal digits carried by mpmath
    target_tol     : relative tolerance for adaptive stops; a float, string
                     or mpf (strings/mpf avoid float underflow below 1e-300)
    max_iterations : iteration cap for Newton loops and refinements
    """

    working_digits: int = 64
    target_tol: object = 1e-40
    max_iterations: int = 60

    def __post_init__(self):
        if self.working_digits < 16:
            raise ValueError("working_digits must be at least 16")
        # tolerances below ~10^(4-digits) are not resolvable at this budget
        with workdps(self.working_digits):
            if mpf(self.target_tol) < mpf(10) ** (4 - self.working_digits):
                raise ValueError("target_tol too small for the digit budget")

    def workdps(self):
        """Context manager setting the mpmath working precision."""
        return workdps(self.working_digits)

    @property
    def tol(self):
        return mpf(self.target_tol)


# shared defaults: 64 digits for geometry/surface work (Hankel work inside
# the oracle builds its own, much larger, contexts)
CTX64 = PrecisionContext(64, 1e-40, 60)
CTX32 = PrecisionContext(32, 1e-20, 60)


def to_mpc(z):
    return mpc(z)


def cdist(a, b):
    return abs(mpc(a) - mpc(b))


def is_finite(z):
    z = mpc(z)
    return mp.isfinite(z.real) and mp.isfinite(z.imag)
