"""Exception hierarchy. The CLI maps these onto exit codes."""


class P2niaError(Exception):
    """Base class for all toolkit errors."""


class DataError(P2niaError, ValueError):
    """Malformed input data, schema, or artifact file."""


class UndefinedMetricError(P2niaError, ValueError):
    """A fairness metric conditions on an empty stratum."""


class MechanismError(P2niaError, ValueError):
    """Invalid privacy-mechanism parameters or release metadata."""


class ProtocolError(MechanismError):
    """The platform rejected an audit request."""
