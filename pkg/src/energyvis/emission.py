"""Emission mathematics: power aggregation, energy integration, CO2
conversion, hardware rescaling, counterfactuals, and trend extrapolation.

Everything here is a pure function over immutable values. Power enters in
watts, energy accumulates internally in joules and leaves in kWh, and
emissions come out in lbs CO2 (the unit of the regional intensity tables).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .catalog import HardwareCatalog, IntensityTable
from .errors import DomainError, InsufficientDataError, MalformedStreamError
from .types import (
    Counterfactual,
    EnergyProfile,
    EpochRecord,
    HardwareSpec,
    Metric,
    PowerSample,
    ProjectionSeries,
)

JOULES_PER_KWH = 3.6e6

AGGREGATE_DEVICE_ID = "all"


def instantaneous_power(device_powers: Sequence[float], pue: float) -> float:
    """Total instantaneous draw of all hardware, scaled by datacenter PUE.

    An empty reading list is a valid zero, not an error.
    """
    if pue < 1.0:
        raise DomainError(f"pue must be >= 1.0, got {pue!r}")
    total = 0.0
    for p in device_powers:
        if p < 0:
            raise DomainError(f"device power must be >= 0, got {p!r}")
        total += p
    return pue * total


def aggregate_samples(samples: Sequence[PowerSample]) -> list[PowerSample]:
    """Merge per-device sample streams into one total-power stream.

    Devices may stamp samples on slightly different clocks (energy-counter
    CPUs report interval midpoints, GPUs report poll instants), so each
    device's power is linearly interpolated onto the union of all
    timestamps and summed. Outside a device's observed span its nearest
    reading is held flat. Within one device, a repeated timestamp keeps the
    later sample.
    """
    by_device: dict[str, list[PowerSample]] = {}
    for s in samples:
        by_device.setdefault(s.device_id, []).append(s)

    for device_id, stream in by_device.items():
        deduped: list[PowerSample] = []
        for s in stream:
            if deduped and s.timestamp < deduped[-1].timestamp:
                raise MalformedStreamError(
                    f"device {device_id!r}: timestamp {s.timestamp} after {deduped[-1].timestamp}"
                )
            if deduped and s.timestamp == deduped[-1].timestamp:
                deduped[-1] = s
            else:
                deduped.append(s)
        by_device[device_id] = deduped

    if not by_device:
        return []
    if len(by_device) == 1:
        (stream,) = by_device.values()
        return [
            PowerSample(s.timestamp, AGGREGATE_DEVICE_ID, s.power_w) for s in stream
        ]

    grid = np.unique(
        np.concatenate(
            [np.array([s.timestamp for s in st], dtype=float) for st in by_device.values()]
        )
    )
    total = np.zeros_like(grid)
    for stream in by_device.values():
        t = np.array([s.timestamp for s in stream], dtype=float)
        p = np.array([s.power_w for s in stream], dtype=float)
        total += np.interp(grid, t, p)
    return [
        PowerSample(float(ts), AGGREGATE_DEVICE_ID, float(pw))
        for ts, pw in zip(grid, total)
    ]


def integrate_epoch_energy(samples: Sequence[PowerSample], pue: float) -> float:
    """Trapezoidal integral of PUE-scaled total power over one epoch, in kWh.

    Expects an already-aggregated stream (strictly increasing timestamps);
    exact for power that ramps linearly between samples.
    """
    if pue < 1.0:
        raise DomainError(f"pue must be >= 1.0, got {pue!r}")
    if len(samples) < 2:
        raise InsufficientDataError(
            f"epoch integration needs at least 2 samples, got {len(samples)}"
        )
    joules = 0.0
    for prev, curr in zip(samples, samples[1:]):
        dt = curr.timestamp - prev.timestamp
        if dt <= 0:
            raise MalformedStreamError(
                f"aggregated timestamps must strictly increase: {prev.timestamp} -> {curr.timestamp}"
            )
        joules += 0.5 * (prev.power_w + curr.power_w) * dt
    return pue * joules / JOULES_PER_KWH


def epoch_emissions(energy_kwh: float, intensity_lbs_per_kwh: float) -> float:
    """CO2 for one epoch: electricity used times regional intensity."""
    if energy_kwh < 0:
        raise DomainError(f"energy must be >= 0, got {energy_kwh!r}")
    if intensity_lbs_per_kwh < 0:
        raise DomainError(f"intensity must be >= 0, got {intensity_lbs_per_kwh!r}")
    return energy_kwh * intensity_lbs_per_kwh


def _aggregate_power_and_flops(
    specs: Sequence[HardwareSpec], catalog: HardwareCatalog
) -> tuple[float, float]:
    power = 0.0
    flops = 0.0
    for spec in specs:
        entry = catalog.lookup(spec.catalog_key)
        power += spec.quantity * entry.power_draw_w
        flops += spec.quantity * entry.flops
    return power, flops


def hardware_rescale_factor(
    original: Sequence[HardwareSpec],
    alternative: Sequence[HardwareSpec],
    catalog: HardwareCatalog,
) -> float:
    """Energy multiplier for swapping one hardware set for another.

    Single-device rule: multiply energy by (p_alt/s_alt) / (p/s), the
    ratio of energy-per-FLOP. Multi-device sets generalize with aggregate
    P = sum(quantity * power) and S = sum(quantity * flops) on each side,
    so duplicating identical devices leaves the factor unchanged.
    """
    if not original or not alternative:
        raise DomainError("hardware rescale needs non-empty original and alternative sets")
    p, s = _aggregate_power_and_flops(original, catalog)
    p_alt, s_alt = _aggregate_power_and_flops(alternative, catalog)
    # (p_alt/s_alt) / (p/s), arranged as one division for accuracy
    return (p_alt * s) / (s_alt * p)


@dataclass(frozen=True)
class TrendFit:
    """Least-squares line over epoch index, plus clamped predictions."""

    slope: float
    intercept: float
    predictions: tuple[float, ...]
    clamped: bool


def extrapolate(values: Sequence[float], horizon: int) -> TrendFit:
    """Ordinary least-squares fit of value vs epoch index, predicting the
    next ``horizon`` epochs.

    Negative predictions are clamped to 0 and flagged; energy cannot go
    negative, but hiding that the fit did would misrepresent the trend.
    """
    n = len(values)
    if n < 2:
        raise InsufficientDataError(f"extrapolation needs at least 2 epochs, got {n}")
    if horizon < 0:
        raise DomainError(f"horizon must be >= 0, got {horizon}")
    x_mean = (n - 1) / 2.0
    y_mean = sum(values) / n
    sxx = 0.0
    sxy = 0.0
    for i, y in enumerate(values):
        dx = i - x_mean
        sxx += dx * dx
        sxy += dx * (y - y_mean)
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean

    predictions = []
    clamped = False
    for i in range(n, n + horizon):
        y = slope * i + intercept
        if y < 0:
            y = 0.0
            clamped = True
        predictions.append(y)
    return TrendFit(slope=slope, intercept=intercept, predictions=tuple(predictions), clamped=clamped)


def _metric_values(
    profile: EnergyProfile, metric: Metric, intensity_table: IntensityTable | None
) -> list[float]:
    energies = profile.epoch_energies_kwh
    if metric is Metric.KWH:
        return energies
    if intensity_table is None:
        raise DomainError("co2 projection requires an intensity table")
    intensity = intensity_table.intensity(profile.region_code)
    return [epoch_emissions(e, intensity) for e in energies]


def project_profile(
    profile: EnergyProfile,
    metric: Metric,
    intensity_table: IntensityTable | None = None,
    horizon: int = 0,
) -> ProjectionSeries:
    """Per-epoch series for one profile, extrapolated ``horizon`` epochs.

    Fit parameters are filled in whenever 2+ epochs were recorded, even at
    horizon 0, so callers can show the trend without re-requesting.
    """
    if not profile.epochs:
        raise InsufficientDataError("profile has no closed epochs to project")
    values = _metric_values(profile, metric, intensity_table)
    if len(values) >= 2:
        fit = extrapolate(values, horizon)
        return ProjectionSeries(
            metric=metric,
            recorded=tuple(values),
            extrapolated=fit.predictions,
            fit_slope=fit.slope,
            fit_intercept=fit.intercept,
            clamped=fit.clamped,
        )
    if horizon > 0:
        raise InsufficientDataError("extrapolation needs at least 2 recorded epochs")
    return ProjectionSeries(metric=metric, recorded=tuple(values))


def counterfactual_profile(
    profile: EnergyProfile,
    cf: Counterfactual,
    hardware_catalog: HardwareCatalog | None = None,
    intensity_table: IntensityTable | None = None,
) -> EnergyProfile:
    """The profile as it would look had it been run under ``cf``.

    Epoch energies are rescaled by the hardware factor and by
    alt_pue/pue; a region change only relabels where the run happened
    (electricity use is location-independent). Region codes are validated
    eagerly so a typo surfaces even on a kWh-only query.
    """
    factor = 1.0
    hardware = profile.hardware
    if cf.alt_hardware is not None:
        if hardware_catalog is None:
            raise DomainError("hardware counterfactual requires a hardware catalog")
        if not profile.hardware:
            raise DomainError("profile declares no hardware to rescale from")
        factor *= hardware_rescale_factor(profile.hardware, cf.alt_hardware, hardware_catalog)
        hardware = tuple(cf.alt_hardware)
    pue = profile.pue
    if cf.alt_pue is not None:
        factor *= cf.alt_pue / profile.pue
        pue = cf.alt_pue
    region = profile.region_code
    if cf.alt_region is not None:
        if intensity_table is None:
            raise DomainError("region counterfactual requires an intensity table")
        region = intensity_table.lookup(cf.alt_region).region_code
    epochs = tuple(
        EpochRecord(
            index=e.index,
            duration_s=e.duration_s,
            energy_kwh=e.energy_kwh * factor,
            degraded=e.degraded,
            paused=e.paused,
        )
        for e in profile.epochs
    )
    return EnergyProfile(
        model_name=profile.model_name,
        region_code=region,
        pue=pue,
        hardware=hardware,
        epochs=epochs,
        created_at=profile.created_at,
        live=profile.live,
        schema_version=profile.schema_version,
        extras=dict(profile.extras),
    )


def apply_counterfactual(
    profile: EnergyProfile,
    cf: Counterfactual,
    metric: Metric,
    hardware_catalog: HardwareCatalog | None = None,
    intensity_table: IntensityTable | None = None,
    horizon: int = 0,
) -> ProjectionSeries:
    """Series the profile would chart under the counterfactual."""
    if not profile.epochs:
        raise InsufficientDataError("profile has no closed epochs to project")
    transformed = counterfactual_profile(profile, cf, hardware_catalog, intensity_table)
    return project_profile(transformed, metric, intensity_table, horizon)


def compare_profiles(
    base: EnergyProfile,
    alt: EnergyProfile,
    metric: Metric,
    horizon: int = 0,
    intensity_table: IntensityTable | None = None,
) -> tuple[ProjectionSeries, ProjectionSeries]:
    """Two profiles on one shared epoch-index axis.

    The axis spans 0..max(len)-1+horizon; the shorter profile is
    extrapolated from its own fit to fill the difference. Recorded values
    are never fabricated: each series keeps its true recorded length.
    """
    if not base.epochs or not alt.epochs:
        raise InsufficientDataError("both profiles need at least 1 closed epoch")
    if horizon < 0:
        raise DomainError(f"horizon must be >= 0, got {horizon}")
    axis_len = max(len(base.epochs), len(alt.epochs)) + horizon
    out = []
    for profile in (base, alt):
        extra = axis_len - len(profile.epochs)
        out.append(project_profile(profile, metric, intensity_table, horizon=extra))
    return out[0], out[1]


def cumulative(series: ProjectionSeries) -> ProjectionSeries:
    """Prefix-sum view of a per-epoch series (the chart's cumulative
    toggle). Fit parameters do not survive the transform."""
    running = 0.0
    recorded = []
    for v in series.recorded:
        running += v
        recorded.append(running)
    extrapolated = []
    for v in series.extrapolated:
        running += v
        extrapolated.append(running)
    return ProjectionSeries(
        metric=series.metric,
        recorded=tuple(recorded),
        extrapolated=tuple(extrapolated),
        clamped=series.clamped,
    )
