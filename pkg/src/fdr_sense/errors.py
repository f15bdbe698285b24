"""Exception types shared across the toolkit.

Everything derives from ToolkitError so the CLI can map any domain failure
to a single exit code.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


# -- geometry / circuit construction -----------------------------------------

class InvalidGeometry(ToolkitError):
    """Microstrip geometry or substrate parameters out of range."""


class InvalidValue(ToolkitError):
    """Component or parameter value out of range."""


class EmptyNetwork(ToolkitError):
    """Series/Parallel composite with no members."""


class NonPositiveFrequency(ToolkitError):
    """Evaluation frequency must be > 0."""


class NoResonanceFound(ToolkitError):
    """No reactance zero or reflection dip in the requested span."""


# -- sweep ingestion ----------------------------------------------------------

class SweepFormatError(ToolkitError):
    """Base for sweep-file parsing failures."""


class MalformedOptionLine(SweepFormatError):
    pass


class NonMonotoneFrequency(SweepFormatError):
    pass


class BadFieldCount(SweepFormatError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class UnsupportedPortCount(SweepFormatError):
    pass


class MissingHeader(SweepFormatError):
    pass


class TooFewPoints(SweepFormatError):
    pass


# -- sweep analysis -----------------------------------------------------------

class NoDipFound(ToolkitError):
    """No local minimum below the detection threshold."""


class EdgeNotInSpan(ToolkitError):
    """Trace never re-crosses the threshold on one side of a dip."""


# -- calibration --------------------------------------------------------------

class DegenerateFit(ToolkitError):
    """All calibration points share the same frequency shift."""


class EqualPermittivities(ToolkitError):
    """Sensitivity is undefined for identical permittivities."""


class NonMonotonePermittivity(ToolkitError):
    """Sensitivity profile needs strictly monotone permittivity readings."""


# -- mode control -------------------------------------------------------------

class UnsupportedState(ToolkitError):
    """Diode configuration not in the measured state table."""


class SensingDenied(ToolkitError):
    """Current mode does not provide the sensing service."""
