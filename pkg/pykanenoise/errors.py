class KaneNoiseError(Exception):
    """Base class of the errors raised by pykanenoise"""

    def __init__(self, message):
        super().__init__(message)
        self.message = message


class DeviceModelError(KaneNoiseError):
    """A device quantity is undefined for the given parameters."""


class UnphysicalStateError(KaneNoiseError):
    """A polarization vector or density operator is not a valid qubit state."""


class PlanError(KaneNoiseError):
    """A simulation plan is invalid."""


class PlanTooLargeError(PlanError):
    """A simulation plan exceeds the configured trajectory-step cap."""


class ToleranceBudgetError(KaneNoiseError):
    """A tolerance budget input is out of range."""


class ConfigError(KaneNoiseError):
    """Represents an error encountered reading a run configuration.

    Parameters
    ----------
    message : str
        Human readable description.
    field : str, optional
        Dotted path of the offending field, e.g. ``simulation.dt``.
    line : int, optional
        Line of a JSON syntax error.
    """

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line

    def __str__(self):
        where = []
        if self.field:
            where.append(f"field '{self.field}'")
        if self.line is not None:
            where.append(f"line {self.line}")
        if where:
            return f"{', '.join(where)}: {self.message}"
        return self.message
