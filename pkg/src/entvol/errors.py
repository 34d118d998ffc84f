"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class EntvolError(ValueError):
    """Base class for invalid input to any entvol routine."""


class InvalidDimension(EntvolError):
    pass


class InvalidSplit(EntvolError):
    pass


class InvalidParameter(EntvolError):
    pass


class InvalidState(EntvolError):
    pass


class ZeroNorm(EntvolError):
    pass


class InvalidMixer(EntvolError):
    pass


class InvalidData(EntvolError):
    pass
