"""Catalog loading, lookup, and serialization round trips."""

import io

import pytest

from energyvis import catalog
from energyvis.errors import CatalogValidationError, UnknownHardwareError, UnknownRegionError


def test_direct_parse():
    cat = catalog.load_hardware_catalog(
        io.StringIO("name,kind,power_draw_w,flops\nExampleGPU,gpu,250,14e12\n")
    )
    entry = cat.lookup("ExampleGPU")
    assert entry.power_draw_w == 250
    assert entry.flops == 1.4e13


def test_zero_power_draw_rejected_with_row_number():
    with pytest.raises(CatalogValidationError) as err:
        catalog.load_hardware_catalog(
            io.StringIO("name,kind,power_draw_w,flops\nBadGPU,gpu,0,14e12\n")
        )
    assert err.value.row == 2


def test_empty_file_gives_empty_catalog():
    cat = catalog.load_hardware_catalog(io.StringIO(""))
    assert len(cat) == 0
    with pytest.raises(UnknownHardwareError) as err:
        cat.lookup("anything")
    assert err.value.suggestions == ()


def test_lookup_canonicalizes_case_and_whitespace():
    cat = catalog.load_hardware_catalog(
        io.StringIO("name,kind,power_draw_w,flops\nExample GPU,gpu,250,14e12\n")
    )
    assert cat.lookup("example gpu") is cat.lookup("  EXAMPLE   GPU  ")


def test_miss_carries_suggestions():
    rows = "\n".join(f"Device {i},gpu,100,1e12" for i in range(8))
    cat = catalog.load_hardware_catalog(io.StringIO(f"name,kind,power_draw_w,flops\n{rows}\n"))
    with pytest.raises(UnknownHardwareError) as err:
        cat.lookup("device")
    assert 0 < len(err.value.suggestions) <= 5


def test_duplicate_name_last_row_wins_with_warning():
    cat = catalog.load_hardware_catalog(
        io.StringIO(
            "name,kind,power_draw_w,flops\nGPU X,gpu,100,1e12\ngpu  x,gpu,200,2e12\n"
        )
    )
    assert cat.lookup("GPU X").power_draw_w == 200
    assert len(cat.warnings) == 1


def test_bad_kind_rejected():
    with pytest.raises(CatalogValidationError):
        catalog.load_hardware_catalog(
            io.StringIO("name,kind,power_draw_w,flops\nThing,tpu,100,1e12\n")
        )


def test_intensity_direct_parse():
    table = catalog.load_intensity_table(
        io.StringIO("region_code,intensity_lbs_per_kwh\nWY,2.1\n")
    )
    assert table.intensity("WY") == 2.1
    assert table.intensity("wy") == 2.1


def test_negative_intensity_rejected():
    with pytest.raises(CatalogValidationError):
        catalog.load_intensity_table(
            io.StringIO("region_code,intensity_lbs_per_kwh\nCA,-0.3\n")
        )


def test_duplicate_region_rejected():
    with pytest.raises(CatalogValidationError):
        catalog.load_intensity_table(
            io.StringIO("region_code,intensity_lbs_per_kwh\nCA,0.3\nca,0.4\n")
        )


def test_missing_regions_recorded_as_gaps():
    table = catalog.load_intensity_table(
        io.StringIO("region_code,intensity_lbs_per_kwh\nGA,0.9\n")
    )
    assert "WY" in table.gaps
    assert "GA" not in table.gaps


def test_unknown_region_lookup():
    table = catalog.load_intensity_table(
        io.StringIO("region_code,intensity_lbs_per_kwh\nGA,0.9\n")
    )
    with pytest.raises(UnknownRegionError):
        table.lookup("PR")


def test_deterministic_load():
    text = "name,kind,power_draw_w,flops\nA,gpu,100,1e12\nB,cpu,50,1e11\n"
    a = catalog.load_hardware_catalog(io.StringIO(text))
    b = catalog.load_hardware_catalog(io.StringIO(text))
    assert a == b


def test_hardware_serialize_reload_round_trip():
    cat = catalog.default_hardware_catalog()
    text = catalog.serialize_hardware_catalog(cat)
    again = catalog.load_hardware_catalog(io.StringIO(text))
    assert again.entries == cat.entries


def test_intensity_serialize_reload_round_trip():
    table = catalog.default_intensity_table()
    text = catalog.serialize_intensity_table(table)
    again = catalog.load_intensity_table(io.StringIO(text))
    assert again == table


def test_shipped_data_complete():
    table = catalog.default_intensity_table()
    assert table.gaps == ()
    cat = catalog.default_hardware_catalog()
    assert len(cat) >= 20
    assert cat.warnings == ()


def test_reference_rows_are_display_only_data():
    rows = catalog.load_reference_footprints()
    assert len(rows) == 7
    assert all(row["co2e_tons"] > 0 for row in rows)
