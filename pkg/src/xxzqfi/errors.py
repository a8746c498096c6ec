"""Exception hierarchy shared by all modules."""


class XXZQFIError(Exception):
    """Base class for errors raised by this package."""


class DomainError(XXZQFIError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(XXZQFIError, ValueError):
    """A problem size exceeds the dense exact-diagonalization cap."""


class GaugeError(XXZQFIError, ArithmeticError):
    """The phase gauge of a parametrized state cannot be fixed reliably."""


class DegeneracyError(XXZQFIError, ArithmeticError):
    """A ground state expected to be unique is (numerically) degenerate."""

    def __init__(self, message, energies=()):
        super().__init__(message)
        self.energies = tuple(energies)


class ComputationError(XXZQFIError, ArithmeticError):
    """A numerical routine failed (singular family, non-convergence, ...)."""


class AnalysisError(XXZQFIError, RuntimeError):
    """Curve analysis failed, e.g. no interior minimum on the grid."""


class VerificationError(XXZQFIError, AssertionError):
    """A numerical cross-check (e.g. of the block ground space) failed."""
