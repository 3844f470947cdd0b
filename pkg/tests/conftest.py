import io
from datetime import datetime, timezone

import pytest

from energyvis.catalog import load_hardware_catalog, load_intensity_table
from energyvis.types import EnergyProfile, EpochRecord, HardwareSpec

HARDWARE_CSV = """\
name,kind,power_draw_w,flops
OriginalGPU,gpu,250,14e12
AlternativeGPU,gpu,300,35e12
SmallCPU,cpu,100,1e12
BigGPU,gpu,500,50e12
"""

INTENSITY_CSV = """\
# vintage: test-fixture
region_code,intensity_lbs_per_kwh
GA,0.9
WY,2.0
CA,0.45
VT,0.06
"""


@pytest.fixture()
def hardware_catalog():
    return load_hardware_catalog(io.StringIO(HARDWARE_CSV))


@pytest.fixture()
def intensity_table():
    return load_intensity_table(io.StringIO(INTENSITY_CSV))


def make_profile(energies, region="GA", pue=1.0, hardware=(("OriginalGPU", 1),), **kwargs):
    return EnergyProfile(
        model_name=kwargs.pop("model_name", "fixture-model"),
        region_code=region,
        pue=pue,
        hardware=tuple(HardwareSpec(catalog_key=k, quantity=q) for k, q in hardware),
        epochs=tuple(
            EpochRecord(index=i, duration_s=60.0, energy_kwh=e) for i, e in enumerate(energies)
        ),
        created_at=kwargs.pop("created_at", datetime(2026, 1, 5, 12, 0, tzinfo=timezone.utc)),
        **kwargs,
    )
