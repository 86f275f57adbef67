"""
Error Types for the Decomposition-Space Toolkit

Every failure the library raises on purpose derives from DecompMobiusError,
so the command line can map a whole family to one exit status.

Key features:
- Construction-time invariant violations carry the offending position
- Bound guards are separate from malformed input
- Verification failures are NOT exceptions; they are report entries
"""

from typing import Optional


class DecompMobiusError(Exception):
    """Base class for all toolkit errors."""


class StructureError(DecompMobiusError, ValueError):
    """
    A structure violates its invariants at construction.

    Args:
        message (str): Human readable description
        position (optional): Element, node or path where the problem was found
    """

    def __init__(self, message: str, position: Optional[object] = None):
        if position is not None:
            message = f"{message} (at {position})"
        super().__init__(message)
        self.position = position


class BoundError(DecompMobiusError, ValueError):
    """An enumeration or size guard was exceeded."""


class UnknownClassError(DecompMobiusError, KeyError):
    """A class key is not part of the groupoid it was looked up in."""

    def __str__(self):
        # KeyError quotes its argument; keep the plain message
        return str(self.args[0]) if self.args else "unknown class"


class GroupoidError(DecompMobiusError):
    """A groupoid map lacks the data an operation needs."""


class SquareError(DecompMobiusError):
    """A square handed to the pullback checker does not commute."""


class NotSimplicialError(DecompMobiusError):
    """A map handed to the culf checker breaks a simplicial identity."""


class InputError(DecompMobiusError, ValueError):
    """Malformed JSON or command line input."""
