"""Exception hierarchy shared across the package.

Every error carries a stable ``code`` string that the HTTP service and the
CLI map onto their own error surfaces, so callers can branch on the code
instead of parsing messages.
"""

from __future__ import annotations


class EnergyVisError(Exception):
    """Base class for all package errors."""

    code = "error"


class DomainError(EnergyVisError):
    """An input value is outside the mathematical domain of an operation."""

    code = "domain"


class InsufficientDataError(EnergyVisError):
    """Not enough recorded data to perform the requested computation."""

    code = "insufficient_data"


class MalformedStreamError(EnergyVisError):
    """A sample stream violates its ordering guarantees."""

    code = "malformed_stream"


class InconsistentCounterError(EnergyVisError):
    """Two counter snapshots cannot be compared (different wrap ranges)."""

    code = "inconsistent_counter"


class TelemetryParseError(EnergyVisError):
    """A telemetry line from a device query tool could not be parsed."""

    code = "telemetry_parse"

    def __init__(self, message: str, line: str = ""):
        super().__init__(message)
        self.line = line


class DeviceUnsupportedError(EnergyVisError):
    """The device exists but does not report the requested quantity."""

    code = "device_unsupported"


class UnknownHardwareError(EnergyVisError):
    """A hardware name did not resolve against the catalog."""

    code = "unknown_hardware"

    def __init__(self, name: str, suggestions: tuple[str, ...] = ()):
        detail = f"unknown hardware {name!r}"
        if suggestions:
            detail += f" (closest: {', '.join(suggestions)})"
        super().__init__(detail)
        self.name = name
        self.suggestions = suggestions


class UnknownRegionError(EnergyVisError):
    """A region code is missing from the intensity table."""

    code = "unknown_region"

    def __init__(self, region_code: str, known: tuple[str, ...] = ()):
        super().__init__(f"unknown region {region_code!r}")
        self.region_code = region_code
        self.known = known


class CatalogValidationError(EnergyVisError):
    """A catalog source file failed row-level validation."""

    code = "catalog_validation"

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class ProfileValidationError(EnergyVisError):
    """A profile document violates the interchange schema.

    ``field_path`` names the offending location, e.g. ``epochs[2].duration_s``.
    """

    code = "validation"

    def __init__(self, field_path: str, reason: str):
        super().__init__(f"{field_path}: {reason}")
        self.field_path = field_path
        self.reason = reason


class UnsupportedVersionError(ProfileValidationError):
    """A profile document declares a schema version we cannot read."""

    code = "unsupported_version"

    def __init__(self, version: object):
        super().__init__("schema_version", f"unsupported version {version!r}")
        self.version = version


class InvalidStateError(EnergyVisError):
    """A session operation is not legal in the session's current state."""

    code = "invalid_state"


class SessionNotFoundError(EnergyVisError):
    """No session or stored profile matches the given id."""

    code = "not_found"
