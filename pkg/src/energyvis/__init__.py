"""Energy-consumption tracking and what-if exploration for ML training.

Library layers, bottom up:

- ``types`` / ``errors``: immutable domain values and the error hierarchy.
- ``emission``: the math (integration, CO2, rescaling, extrapolation).
- ``sampling``: CPU energy counters, GPU telemetry, simulated waveforms.
- ``catalog``: hardware and regional-intensity datasets.
- ``profile_io``: the JSON interchange document.
- ``service``: the live-tracking HTTP service.
- ``cli``: the ``energyvis`` command.
"""

from .errors import EnergyVisError
from .types import (
    Counterfactual,
    EnergyProfile,
    EpochRecord,
    HardwareCatalogEntry,
    HardwareSpec,
    Metric,
    PowerSample,
    ProjectionSeries,
    RegionIntensity,
)

__version__ = "0.1.0"

__all__ = [
    "Counterfactual",
    "EnergyProfile",
    "EnergyVisError",
    "EpochRecord",
    "HardwareCatalogEntry",
    "HardwareSpec",
    "Metric",
    "PowerSample",
    "ProjectionSeries",
    "RegionIntensity",
    "__version__",
]
