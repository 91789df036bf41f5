from __future__ import annotations


class FuzzytuneError(Exception):
    """Base class for every error raised by fuzzytune."""


class ConfigError(FuzzytuneError, ValueError):
    """A run-config file could not be parsed or holds an invalid value."""

    def __init__(self, reason: str, path: str | None = None, line: int | None = None):
        self.reason = reason
        self.path = path
        self.line = line
        where = path or "<config>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {reason}")


class InvalidParams(FuzzytuneError, ValueError):
    """Controller parameters violate an ordering, range or gain invariant."""


class DegenerateDynamics(FuzzytuneError, ArithmeticError):
    """The plant's angular acceleration denominator vanished."""


class NonFiniteState(FuzzytuneError, ArithmeticError):
    """The integrator produced a NaN or infinite state component."""


class MissingColumn(FuzzytuneError, KeyError):
    """A CSV handed to the plotter lacks a requested column."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing column"
