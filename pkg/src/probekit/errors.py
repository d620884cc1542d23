"""Exception hierarchy. Every error carries a stable ``code`` string that is
used verbatim in wire-protocol error messages and session error deltas."""

from __future__ import annotations


class ProbekitError(Exception):
    code = "Error"


class DuplicateIdError(ProbekitError):
    code = "DuplicateId"


class NonFiniteCoordinateError(ProbekitError):
    code = "NonFiniteCoordinate"


class UnknownIdError(ProbekitError):
    code = "UnknownId"


class SelfLoopError(ProbekitError):
    code = "SelfLoop"


class DuplicateLinkError(ProbekitError):
    code = "DuplicateLink"


class UnknownLinkError(ProbekitError):
    code = "UnknownLink"


class InvalidAttributeError(ProbekitError):
    code = "InvalidAttribute"


class StaleIndexError(ProbekitError):
    code = "StaleIndex"


class NegativeParameterError(ProbekitError):
    code = "NegativeParameter"


class NonPositiveRadiusError(ProbekitError):
    code = "NonPositiveRadius"


class NotPlacedError(ProbekitError):
    code = "NotPlaced"


class UnknownAttributeError(ProbekitError):
    code = "UnknownAttribute"


class NoActiveProbesError(ProbekitError):
    code = "NoActiveProbes"


class DegenerateDirectionError(ProbekitError):
    code = "DegenerateDirection"


class DegenerateViewError(ProbekitError):
    code = "DegenerateView"


class InconsistentStateError(ProbekitError):
    code = "InconsistentState"


class OutOfOrderError(ProbekitError):
    code = "OutOfOrder"


class MalformedSnapshotError(ProbekitError):
    code = "MalformedSnapshot"


class UnknownProbeError(ProbekitError):
    code = "UnknownProbe"


class NoPendingProbeError(ProbekitError):
    code = "NoPendingProbe"


class InvalidPayloadError(ProbekitError):
    code = "InvalidPayload"


class InvalidSelectionError(ProbekitError):
    code = "InvalidSelection"


class BadGraphFileError(ProbekitError):
    code = "BadGraphFile"


class PortInUseError(ProbekitError):
    code = "PortInUse"
