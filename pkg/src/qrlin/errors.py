"""Exception hierarchy shared by all qrlin modules."""


class QrlinError(Exception):
    """Base class for numerical failures raised by qrlin."""


class DomainError(QrlinError, ValueError):
    """Evaluation requested outside the region where the object is defined."""


class BranchPointError(DomainError):
    """Evaluation too close to a declared branch point (or a non-smooth origin)."""


class DegenerateDerivativeError(QrlinError):
    """Wirtinger data violates |f_z| > |f_zbar| (sample is not quasiregular)."""


class WindingError(QrlinError):
    """Argument continuation could not be stabilised by grid refinement."""


class IndexMismatchError(QrlinError):
    """Computed local index disagrees with the declared one."""


class BranchTrackingError(QrlinError):
    """Logarithm branch could not be continued along the lift path."""


class ConvergenceError(QrlinError):
    """An iterative or refining computation did not converge."""


class DomainEscapeError(ConvergenceError):
    """An orbit left the half-plane on which the lift is defined."""


class NonSimpleError(QrlinError):
    """Rescalings do not settle to a single generalized derivative."""


class HypothesisError(QrlinError):
    """A fitted closeness, Hölder or multiplier hypothesis fails.

    ``which`` is one of ``"a"``, ``"b"``, ``"c"`` or ``"threshold"``.
    """

    def __init__(self, which, message):
        super().__init__(f"hypothesis ({which}) failed: {message}")
        self.which = which
