"""Exception types shared by every module.

``DomainError`` maps to CLI exit status 2 and ``ConvergenceError`` to 3.
"""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(RuntimeError):
    """A numerical procedure failed to reach its declared tolerance."""
