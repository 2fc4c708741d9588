"""Exception hierarchy shared across the package."""


class TdspecError(Exception):
    """Base class for all package errors."""


class ConfigError(TdspecError):
    """Invalid configuration document or invalid parameter values."""


class DatasetError(TdspecError):
    """Dataset persistence problems (manifest, binary payload, CSV)."""


class SchemaViolation(DatasetError):
    """Manifest or config fails schema validation."""


class ShapeMismatch(DatasetError):
    """Binary payload size does not match the declared shape."""


class DtypeMismatch(DatasetError):
    """Unsupported or inconsistent dtype declaration."""


class UnsupportedVersion(DatasetError):
    """Manifest version is newer than this reader understands."""


class NumericsError(TdspecError):
    """Numerical preconditions violated or a computation failed to converge."""


class SweepPointError(NumericsError):
    """A single sweep point failed; carries the offending drive frequency."""

    def __init__(self, freq_hz: float, cause: Exception):
        self.freq_hz = freq_hz
        self.cause = cause
        super().__init__(f"sweep point at {freq_hz / 1e9:.6f} GHz failed: {cause}")
