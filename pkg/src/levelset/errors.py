"""Level-set exceptions."""


class FrontVanishedError(RuntimeError):
    """Raised when the level set has no sign change left.

    The engine turns this into the ``front_vanished`` termination state.
    """


class InitSpecError(ValueError):
    """Raised for empty, unparsable, or out-of-domain initial contours."""
