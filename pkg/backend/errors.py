"""
Exception hierarchy shared by the backend and the command line.
Every error carries the process exit code the CLI maps it to.
"""


class CatSimError(Exception):
    """Root of every error raised by catsim."""
    exit_code = 1


class DomainError(CatSimError, ValueError):
    """An input violates a documented precondition (level count, symmetry, rates...)."""
    exit_code = 2


class ConfigError(CatSimError):
    """A scenario file failed to parse or validate."""
    exit_code = 2

    def __init__(self, message: str, lineno: int = None, path: str = None):
        self.lineno = lineno
        self.path = path
        location = ""
        if path is not None:
            location = f"{path}:"
        if lineno is not None:
            location += f"{lineno}:"
        super().__init__(f"{location} {message}" if location else message)


class ValidityError(CatSimError):
    """A parameter set violates a fail-level approximation inequality."""
    exit_code = 3

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class CutoffError(CatSimError):
    """The Fock truncation is too small for the requested state or operator."""
    exit_code = 4


class NumericalGuardError(CatSimError):
    """Norm or trace drift, an empty measurement branch, or a memory guard tripped."""
    exit_code = 4
