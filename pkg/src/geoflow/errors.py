"""Exception hierarchy shared by all geoflow modules."""


class GeoflowError(Exception):
    """Base class for every error raised by the library."""


class TooFewPoints(GeoflowError):
    pass


class DegenerateCurve(GeoflowError):
    pass


class NotArclength(GeoflowError):
    pass


class AllDegenerate(GeoflowError):
    pass


class BadFrame(GeoflowError):
    pass


class OutOfDomain(GeoflowError):
    pass


class InvalidSpec(GeoflowError):
    pass


class DegenerateSpeed(GeoflowError):
    pass


class BlowUp(GeoflowError):
    pass


class StabilityError(GeoflowError):
    """Raised when a time step violates the declared stability bound."""


class TooFewFrames(GeoflowError):
    pass


class InvalidParams(GeoflowError):
    pass


class NoRoot(GeoflowError):
    pass


class DegenerateProfile(GeoflowError):
    pass


class ConfigError(GeoflowError):
    """Bad command-line or config-file input (CLI exit code 2)."""
