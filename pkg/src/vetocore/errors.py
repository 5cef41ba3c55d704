"""Exception hierarchy shared by every vetocore module."""


class VetoError(Exception):
    """Base class for all vetocore errors."""


class BallotParseError(VetoError, ValueError):
    """A ballot file does not follow the ballot format."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.message = message
        self.line = line


class ElectionError(VetoError, ValueError):
    """An election is malformed, or a candidate/voter name is unknown."""


class WeightError(VetoError, ValueError):
    """A weight vector is negative, empty, non-integral where required, or on the wrong domain."""


class MarginalMismatchError(WeightError):
    """Two weight vectors (or a matching and its marginals) disagree on their totals."""


class InvalidMatchingError(VetoError, ValueError):
    """A matching references unknown names, is not integral, or a cycle does not fit it."""


class CertificateError(VetoError, ValueError):
    """A blocking pair or Hall violation does not prove what it claims."""


class VetoOrderError(VetoError, ValueError):
    """A veto order disagrees with the weights it is supposed to realize."""


class SizeLimitError(VetoError, ValueError):
    """An instance is larger than the configured enumeration or LP limit."""


class InvariantViolation(VetoError, RuntimeError):
    """A guaranteed property failed at run time. Always a bug, never an input problem."""
