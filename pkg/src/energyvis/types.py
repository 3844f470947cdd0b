"""Domain types for energy profiles, power samples, and what-if inputs.

All types are immutable value objects; validation happens at construction
so no invalid instance can circulate. Energy is stored in kWh, power in
watts, emissions in lbs CO2 (the unit the regional intensity tables use).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from .errors import DomainError


class Metric(str, Enum):
    """Chartable per-epoch quantity."""

    KWH = "kwh"
    CO2_LBS = "co2_lbs"

    @classmethod
    def parse(cls, value: str) -> "Metric":
        """Parse a metric name, accepting the short 'co2' alias."""
        v = value.strip().lower()
        if v == "co2":
            return cls.CO2_LBS
        try:
            return cls(v)
        except ValueError:
            raise DomainError(f"unknown metric {value!r}; expected kwh or co2_lbs") from None


class DeviceKind(str, Enum):
    CPU = "cpu"
    GPU = "gpu"


@dataclass(frozen=True)
class PowerSample:
    """One instantaneous power reading for one device.

    ``timestamp`` is monotonic seconds since the session started, not wall
    clock, so streams survive clock adjustments.
    """

    timestamp: float
    device_id: str
    power_w: float

    def __post_init__(self):
        if not math.isfinite(self.timestamp):
            raise DomainError(f"non-finite sample timestamp {self.timestamp!r}")
        if not math.isfinite(self.power_w) or self.power_w < 0:
            raise DomainError(f"power must be finite and >= 0, got {self.power_w!r}")


@dataclass(frozen=True)
class HardwareSpec:
    """A device reference inside a profile: catalog key plus count."""

    catalog_key: str
    quantity: int = 1

    def __post_init__(self):
        if not self.catalog_key:
            raise DomainError("hardware catalog_key must be non-empty")
        if not isinstance(self.quantity, int) or self.quantity < 1:
            raise DomainError(f"hardware quantity must be an integer >= 1, got {self.quantity!r}")


@dataclass(frozen=True)
class HardwareCatalogEntry:
    """Catalog row: rated power draw and peak theoretical FLOPS.

    The ratio power_draw_w / flops is what hardware counterfactuals rescale
    by, so both must be strictly positive.
    """

    name: str
    power_draw_w: float
    flops: float
    kind: DeviceKind = DeviceKind.GPU

    def __post_init__(self):
        if not self.name:
            raise DomainError("catalog entry name must be non-empty")
        if not math.isfinite(self.power_draw_w) or self.power_draw_w <= 0:
            raise DomainError(f"power_draw_w must be > 0, got {self.power_draw_w!r}")
        if not math.isfinite(self.flops) or self.flops <= 0:
            raise DomainError(f"flops must be > 0, got {self.flops!r}")


@dataclass(frozen=True)
class RegionIntensity:
    """Emission intensity of one region, in lbs CO2 per kWh."""

    region_code: str
    intensity_lbs_per_kwh: float

    def __post_init__(self):
        if not self.region_code:
            raise DomainError("region_code must be non-empty")
        if not math.isfinite(self.intensity_lbs_per_kwh) or self.intensity_lbs_per_kwh < 0:
            raise DomainError(
                f"intensity must be >= 0, got {self.intensity_lbs_per_kwh!r}"
            )


@dataclass(frozen=True)
class EpochRecord:
    """One closed training epoch: how long it ran and what it consumed.

    ``energy_kwh`` already includes the PUE multiplier applied at
    integration time, so a stored profile is self-contained.
    ``degraded`` marks epochs closed without enough samples to integrate;
    ``paused`` marks epochs that contained paused intervals (which are
    excluded from both duration and energy).
    """

    index: int
    duration_s: float
    energy_kwh: float
    degraded: bool = False
    paused: bool = False

    def __post_init__(self):
        if self.index < 0:
            raise DomainError(f"epoch index must be >= 0, got {self.index}")
        # degraded epochs record a broken marking (e.g. an immediate double
        # mark) and are the one place a zero duration is honest
        minimum_ok = self.duration_s >= 0 if self.degraded else self.duration_s > 0
        if not math.isfinite(self.duration_s) or not minimum_ok:
            raise DomainError(f"epoch duration must be > 0, got {self.duration_s!r}")
        if not math.isfinite(self.energy_kwh) or self.energy_kwh < 0:
            raise DomainError(f"epoch energy must be >= 0, got {self.energy_kwh!r}")


@dataclass(frozen=True)
class EnergyProfile:
    """Full record of one tracked training run.

    ``extras`` holds unknown top-level keys from imported documents so an
    export round trip preserves them byte-for-byte (as data, not order).
    """

    model_name: str
    region_code: str
    pue: float
    hardware: tuple[HardwareSpec, ...]
    epochs: tuple[EpochRecord, ...]
    created_at: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc).replace(microsecond=0)
    )
    live: bool = False
    schema_version: int = 1
    extras: dict = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self):
        if not math.isfinite(self.pue) or self.pue < 1.0:
            raise DomainError(f"pue must be >= 1.0, got {self.pue!r}")
        for i, epoch in enumerate(self.epochs):
            if epoch.index != i:
                raise DomainError(
                    f"epoch indices must be consecutive from 0; position {i} has index {epoch.index}"
                )
        if self.live and not self.hardware:
            raise DomainError("live profiles must declare at least one hardware spec")

    @property
    def epoch_energies_kwh(self) -> list[float]:
        return [e.energy_kwh for e in self.epochs]

    @property
    def total_energy_kwh(self) -> float:
        return sum(e.energy_kwh for e in self.epochs)


@dataclass(frozen=True)
class Counterfactual:
    """A hypothetical change of region, hardware, or PUE.

    At least one field must be set; unset fields keep the profile's own
    value.
    """

    alt_region: str | None = None
    alt_hardware: tuple[HardwareSpec, ...] | None = None
    alt_pue: float | None = None

    def __post_init__(self):
        if self.alt_region is None and self.alt_hardware is None and self.alt_pue is None:
            raise DomainError("counterfactual must set at least one of region, hardware, pue")
        if self.alt_pue is not None and (not math.isfinite(self.alt_pue) or self.alt_pue < 1.0):
            raise DomainError(f"alt_pue must be >= 1.0, got {self.alt_pue!r}")
        if self.alt_hardware is not None and len(self.alt_hardware) == 0:
            raise DomainError("alt_hardware, when set, must be non-empty")


@dataclass(frozen=True)
class ProjectionSeries:
    """Per-epoch metric values for charting: recorded plus extrapolated.

    ``fit_slope``/``fit_intercept`` are the least-squares parameters behind
    the extrapolation; both are None when fewer than 2 epochs were
    recorded. ``clamped`` flags that one or more negative predictions were
    clamped to zero.
    """

    metric: Metric
    recorded: tuple[float, ...]
    extrapolated: tuple[float, ...] = ()
    fit_slope: float | None = None
    fit_intercept: float | None = None
    clamped: bool = False

    def __post_init__(self):
        for v in self.recorded + self.extrapolated:
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"series values must be finite and >= 0, got {v!r}")

    @property
    def values(self) -> list[float]:
        """Recorded followed by extrapolated, on one epoch-index axis."""
        return list(self.recorded) + list(self.extrapolated)

    def to_dict(self) -> dict:
        d: dict = {
            "metric": self.metric.value,
            "recorded": list(self.recorded),
            "extrapolated": list(self.extrapolated),
            "clamped": self.clamped,
        }
        if self.fit_slope is not None:
            d["fit_slope"] = self.fit_slope
            d["fit_intercept"] = self.fit_intercept
        return d
