"""Exception types raised by the index pipelines."""


class MaslovError(Exception):
    """Base class for all package errors."""


class NonRegularValueError(MaslovError):
    """The chosen target value sits on a simplicial boundary; re-randomize."""


class InsufficientRefinementError(MaslovError):
    """Too many degenerate image simplices near the target value."""


class MissedPointSearchError(MaslovError):
    """No point with positive clearance from the image was found."""


class ClearanceViolationError(MaslovError):
    """A contraction path came too close to its missed point."""


class UnitarityError(MaslovError):
    """A matrix family drifted from unitarity beyond tolerance."""


class FrameDegenerateError(MaslovError):
    """A frame lost rank during transport or push-forward."""


class DivisibilityError(MaslovError):
    """A column degree failed the required factorial divisibility."""


class NotNullHomotopicError(MaslovError):
    """The orbit sphere of a family is not contractible; B-type index undefined."""


class UnknownBuiltinError(MaslovError):
    """A scenario referenced a model or family that is not registered."""


class ScenarioFormatError(MaslovError):
    """A scenario document is malformed."""
