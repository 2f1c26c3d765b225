"""Exception types shared across the package."""


class LogconfemError(Exception):
    """Base class for all package-specific errors."""


class SpectralRangeError(LogconfemError, ArithmeticError):
    """Matrix exponential overflowed (an eigenvalue argument is too large)."""

    def __init__(self, max_arg):
        self.max_arg = float(max_arg)
        super().__init__(
            f"matrix exponential overflow: largest exponent argument {self.max_arg:.6g}"
        )


class NotSPDError(LogconfemError, ValueError):
    """A matrix that must be symmetric positive definite is not."""

    def __init__(self, eigenvalue, what="matrix"):
        self.eigenvalue = float(eigenvalue)
        super().__init__(
            f"{what} is not SPD: smallest eigenvalue {self.eigenvalue:.6g} <= 0"
        )


class GeometryError(LogconfemError, ValueError):
    """Degenerate or inverted element geometry."""


class MeshFormatError(LogconfemError, ValueError):
    """Mesh file could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MeshInvariantError(LogconfemError, ValueError):
    """A mesh violates a structural invariant (e.g. inverted element)."""

    def __init__(self, message, element=None):
        self.element = element
        if element is not None:
            message = f"element {element}: {message}"
        super().__init__(message)


class ConfigError(LogconfemError, ValueError):
    """Invalid run configuration."""


class SingularSystemError(LogconfemError, RuntimeError):
    """Linear system is (numerically) singular."""

    def __init__(self, message, diagnostic=None):
        self.diagnostic = diagnostic
        if diagnostic:
            message = f"{message} ({diagnostic})"
        super().__init__(message)
