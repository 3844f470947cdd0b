"""Energy-profile document import/export.

The interchange document is JSON with top-level keys schema_version,
model_name, region_code, pue, hardware, epochs, created_at (RFC 3339) and
live. Unknown top-level keys round-trip untouched via EnergyProfile.extras.
Validation errors name the offending field path, e.g. ``epochs[2].duration_s``.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

from .errors import ProfileValidationError, UnsupportedVersionError
from .types import EnergyProfile, EpochRecord, HardwareSpec

SCHEMA_VERSION = 1

_KNOWN_KEYS = {
    "schema_version",
    "model_name",
    "region_code",
    "pue",
    "hardware",
    "epochs",
    "created_at",
    "live",
}


def parse_rfc3339(text: str, field_path: str = "created_at") -> datetime:
    """Parse an RFC 3339 timestamp (Python 3.10's fromisoformat lacks 'Z')."""
    if not isinstance(text, str):
        raise ProfileValidationError(field_path, f"expected RFC 3339 string, got {type(text).__name__}")
    normalized = text.replace("Z", "+00:00").replace("z", "+00:00")
    try:
        dt = datetime.fromisoformat(normalized)
    except ValueError:
        raise ProfileValidationError(field_path, f"invalid RFC 3339 timestamp {text!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def format_rfc3339(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.isoformat()


def _require(doc: dict, key: str, expected, path: str = ""):
    full = f"{path}{key}"
    if key not in doc:
        raise ProfileValidationError(full, "missing required key")
    value = doc[key]
    if expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ProfileValidationError(full, f"expected number, got {type(value).__name__}")
        return float(value)
    if expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ProfileValidationError(full, f"expected integer, got {type(value).__name__}")
        return value
    if not isinstance(value, expected):
        raise ProfileValidationError(full, f"expected {expected.__name__}, got {type(value).__name__}")
    return value


def profile_from_document(doc: dict) -> EnergyProfile:
    """Validate a parsed document and build the profile.

    Zero-epoch documents are importable (live sessions start empty); the
    analysis operations are what reject them.
    """
    if not isinstance(doc, dict):
        raise ProfileValidationError("$", f"expected object, got {type(doc).__name__}")

    version = _require(doc, "schema_version", int)
    if version != SCHEMA_VERSION:
        raise UnsupportedVersionError(version)

    model_name = _require(doc, "model_name", str)
    region_code = _require(doc, "region_code", str)
    pue = _require(doc, "pue", float)
    live = _require(doc, "live", bool)
    created_at = parse_rfc3339(_require(doc, "created_at", str))

    hardware_raw = _require(doc, "hardware", list)
    hardware = []
    for i, item in enumerate(hardware_raw):
        path = f"hardware[{i}]."
        if not isinstance(item, dict):
            raise ProfileValidationError(f"hardware[{i}]", "expected object")
        key = _require(item, "catalog_key", str, path)
        quantity = _require(item, "quantity", int, path)
        try:
            hardware.append(HardwareSpec(catalog_key=key, quantity=quantity))
        except Exception as exc:
            raise ProfileValidationError(f"hardware[{i}]", str(exc)) from None

    epochs_raw = _require(doc, "epochs", list)
    epochs = []
    for i, item in enumerate(epochs_raw):
        path = f"epochs[{i}]."
        if not isinstance(item, dict):
            raise ProfileValidationError(f"epochs[{i}]", "expected object")
        index = _require(item, "index", int, path)
        duration = _require(item, "duration_s", float, path)
        energy = _require(item, "energy_kwh", float, path)
        degraded = bool(item.get("degraded", False))
        paused = bool(item.get("paused", False))
        try:
            epochs.append(
                EpochRecord(
                    index=index,
                    duration_s=duration,
                    energy_kwh=energy,
                    degraded=degraded,
                    paused=paused,
                )
            )
        except Exception as exc:
            raise ProfileValidationError(f"epochs[{i}]", str(exc)) from None

    extras = {k: doc[k] for k in doc if k not in _KNOWN_KEYS}

    try:
        return EnergyProfile(
            model_name=model_name,
            region_code=region_code,
            pue=pue,
            hardware=tuple(hardware),
            epochs=tuple(epochs),
            created_at=created_at,
            live=live,
            schema_version=version,
            extras=extras,
        )
    except Exception as exc:
        raise ProfileValidationError("$", str(exc)) from None


def profile_to_document(profile: EnergyProfile) -> dict:
    """Serialize to the interchange shape, unknown keys included."""
    epochs = []
    for e in profile.epochs:
        record: dict = {"index": e.index, "duration_s": e.duration_s, "energy_kwh": e.energy_kwh}
        if e.degraded:
            record["degraded"] = True
        if e.paused:
            record["paused"] = True
        epochs.append(record)
    doc = {
        "schema_version": profile.schema_version,
        "model_name": profile.model_name,
        "region_code": profile.region_code,
        "pue": profile.pue,
        "hardware": [
            {"catalog_key": h.catalog_key, "quantity": h.quantity} for h in profile.hardware
        ],
        "epochs": epochs,
        "created_at": format_rfc3339(profile.created_at),
        "live": profile.live,
    }
    doc.update(profile.extras)
    return doc


def load_profile(path: str | Path) -> EnergyProfile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProfileValidationError("$", f"unreadable profile: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileValidationError("$", f"invalid JSON: {exc}") from None
    return profile_from_document(doc)


def save_profile(profile: EnergyProfile, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(profile_to_document(profile), indent=2) + "\n", encoding="utf-8"
    )
