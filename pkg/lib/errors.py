"""
Exception hierarchy for the sharing-equilibrium toolkit.

Verification failures are reported, not raised; these exceptions cover bad
input, enumeration caps, and states the theory says cannot happen.
"""

from typing import Optional


class SharingError(Exception):
    """Base class for every error raised by the toolkit."""


class InputError(SharingError, ValueError):
    """Malformed or inconsistent input (unknown node ids, bad networks, ...)."""


class CapacityError(SharingError):
    """An exhaustive method was asked to run above its size cap."""


class GenerationError(CapacityError):
    """A random generator exhausted its retries."""


class StructuralError(SharingError):
    """The instance violates a model assumption (e.g. an isolated node with D_i > 0)."""


class ConsistencyError(SharingError, RuntimeError):
    """An internal invariant failed on input that was certified correct."""


class DocumentError(InputError):
    """A file could not be parsed; carries the location of the problem."""

    def __init__(self, message: str, path: Optional[str] = None, location: Optional[str] = None):
        self.path = path
        self.location = location
        where = ""
        if path:
            where = f"{path}"
            if location:
                where += f" ({location})"
            where += ": "
        super().__init__(f"{where}{message}")
