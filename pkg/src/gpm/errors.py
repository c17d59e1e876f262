"""Exception hierarchy shared by every layer of the toolchain."""

from __future__ import annotations


class GpmError(Exception):
    """Base class for all toolchain errors."""


class ShapeMismatch(GpmError):
    pass


class IncompatibleError(GpmError):
    """Two parallel morphisms cannot be joined."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class ShapeStabilizationFailure(GpmError):
    pass


class BackendUnsupported(GpmError):
    """A primitive has no interpretation in the active backend."""


class NonClassicalIso(GpmError):
    pass


class StuckMatch(GpmError):
    pass


class Undefined(GpmError):
    """A value is too deep to live at the requested stage."""
