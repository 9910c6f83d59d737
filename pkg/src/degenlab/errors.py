"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: validation failures exit 2, numerical
failures exit 3, I/O problems exit 4.
"""


class ValidationError(ValueError):
    """A spec, config, or argument fails its preconditions."""


class NumericalError(RuntimeError):
    """A numerical procedure could not produce a trustworthy result."""


class NonIntegrableError(NumericalError):
    """The requested density has no finite normalizing constant."""


class DivergenceError(NumericalError):
    """A quadrature diverges at an endpoint (non-integrable integrand)."""


class NegativeDiscriminantError(NumericalError):
    """The implicit near-boundary step has no admissible positive root."""

    def __init__(self, message, particle_index=None, time=None):
        super().__init__(message)
        self.particle_index = particle_index
        self.time = time


class InfeasiblePatchError(NumericalError):
    """The interior Lyapunov patch has an infeasible slope ordering."""
