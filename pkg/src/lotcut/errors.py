"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class LotcutError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(LotcutError):
    """An array or solution does not match the dimensions of its instance."""

    def __init__(self, what: str, expected, got):
        self.what = what
        self.expected = expected
        self.got = got
        super().__init__(f"{what}: expected shape {expected}, got {got}")


class InvalidInstanceError(LotcutError):
    """Instance data violates a structural invariant (signs, partition, fits)."""


class PatternError(LotcutError):
    """Cutting-pattern enumeration is impossible (no piece fits the object)."""


class ConfigurationError(LotcutError):
    """A build step was asked to run with unusable inputs."""


class SolverError(LotcutError):
    """The linear solver failed even after its numerical fallback."""


class InfeasibleModelError(LotcutError):
    """The assembled model admits no feasible plan."""
