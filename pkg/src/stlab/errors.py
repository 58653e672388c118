"""Exception hierarchy shared by the library and the command line."""


class StlabError(Exception):
    """Base class for every error raised by stlab."""


class DomainError(StlabError, ValueError):
    """An argument falls outside the range where an operation is defined."""


class CapacityError(DomainError):
    """A request exceeds a configured size limit or the range of a table."""


class BadReductionError(DomainError):
    def __init__(self, p, discriminant):
        super().__init__(f"curve has bad reduction at p={p} (discriminant {discriminant})")
        self.p = p


class DeligneViolation(DomainError):
    def __init__(self, p, a, k):
        super().__init__(f"Deligne bound violated at p={p}: a={a}, a^2 > 4*p^{k - 1}")
        self.p = p
        self.a = a


class FormatError(StlabError):
    """A file on disk is malformed, truncated or fails validation."""


class ReconstructionOverflow(StlabError, ArithmeticError):
    """CRT reconstruction range is too small for the requested coefficients."""
