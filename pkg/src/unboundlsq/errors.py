"""Exception hierarchy shared by all modules."""


class UnboundLSQError(Exception):
    """Base class for library errors."""


class DomainError(UnboundLSQError, ValueError):
    """An argument lies outside the natural domain of an operation."""


class CapacityError(UnboundLSQError, OverflowError):
    """A requested object is too large to address."""


class LinAlgError(UnboundLSQError, ArithmeticError):
    pass


class RankDeficiencyError(LinAlgError):
    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class NotPositiveDefiniteError(LinAlgError):
    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class ConvergenceError(LinAlgError):
    def __init__(self, message, off_norm=None):
        super().__init__(message)
        self.off_norm = off_norm


class SampleRejectedError(UnboundLSQError):
    """Model coefficient fell below the ellipticity floor for a parameter draw."""

    def __init__(self, message, y=None, rejection_rate=None):
        super().__init__(message)
        self.y = y
        self.rejection_rate = rejection_rate


class DivergentQoIError(UnboundLSQError, ValueError):
    """The requested quantity of interest is not finite."""


class ReferenceNotConvergedError(UnboundLSQError):
    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values
