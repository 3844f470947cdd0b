"""Hardware catalog and regional energy-intensity tables.

Both catalogs load from comma-separated text with one header row:

    hardware:  name,kind,power_draw_w,flops
    intensity: region_code,intensity_lbs_per_kwh

An optional leading ``# vintage: <label>`` comment on an intensity file
records which dataset year/scenario the numbers came from; it survives a
serialize/reload round trip. The CSV files shipped under ``energyvis/data``
are desk-scale approximations -- operators with access to the real device
and grid datasets should point the loaders at their own files.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import CatalogValidationError, UnknownHardwareError, UnknownRegionError
from .types import DeviceKind, HardwareCatalogEntry, RegionIntensity

# 50 states + DC; loaders record which of these a table is missing.
US_REGION_CODES = (
    "AL AK AZ AR CA CO CT DE DC FL GA HI ID IL IN IA KS KY LA ME MD MA MI MN MS "
    "MO MT NE NV NH NJ NM NY NC ND OH OK OR PA RI SC SD TN TX UT VT VA WA WV WI WY"
).split()

HARDWARE_HEADER = ["name", "kind", "power_draw_w", "flops"]
INTENSITY_HEADER = ["region_code", "intensity_lbs_per_kwh"]


def canonical_name(name: str) -> str:
    """Lowercase and collapse internal whitespace; the only normalization
    lookups apply (no fuzzy matching)."""
    return " ".join(name.lower().split())


@dataclass(frozen=True)
class HardwareCatalog:
    """Immutable name-keyed device catalog."""

    entries: dict[str, HardwareCatalogEntry]  # keyed by canonical name
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, name: str) -> HardwareCatalogEntry:
        """Exact canonical match; raises UnknownHardwareError with up to 5
        case-insensitive substring suggestions on a miss."""
        key = canonical_name(name)
        entry = self.entries.get(key)
        if entry is not None:
            return entry
        suggestions = tuple(
            sorted(
                e.name
                for k, e in self.entries.items()
                if key and (key in k or k in key)
            )[:5]
        )
        raise UnknownHardwareError(name, suggestions)

    def names(self) -> list[str]:
        return sorted(e.name for e in self.entries.values())


@dataclass(frozen=True)
class IntensityTable:
    """Region code -> emission intensity, with provenance label."""

    rows: dict[str, RegionIntensity]  # keyed by upper-cased region code
    vintage: str = "unspecified"
    gaps: tuple[str, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.rows)

    def lookup(self, region_code: str) -> RegionIntensity:
        row = self.rows.get(region_code.strip().upper())
        if row is None:
            raise UnknownRegionError(region_code, tuple(sorted(self.rows)))
        return row

    def intensity(self, region_code: str) -> float:
        return self.lookup(region_code).intensity_lbs_per_kwh


def _read_rows(source: str | Path | io.TextIOBase) -> tuple[list[list[str]], str | None]:
    """Read CSV rows, skipping blanks and comments. Returns (rows, vintage)."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    vintage = None
    lines = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            comment = stripped.lstrip("#").strip()
            if comment.lower().startswith("vintage:"):
                vintage = comment.split(":", 1)[1].strip()
            continue
        lines.append(line)
    return list(csv.reader(lines)), vintage


def load_hardware_catalog(source: str | Path | io.TextIOBase) -> HardwareCatalog:
    """Parse a hardware CSV into a validated catalog.

    Duplicate canonical names: the last row wins and a warning is recorded.
    Bad numeric fields raise CatalogValidationError naming the row.
    """
    rows, _ = _read_rows(source)
    if rows and [c.strip() for c in rows[0]] == HARDWARE_HEADER:
        rows = rows[1:]
    entries: dict[str, HardwareCatalogEntry] = {}
    warnings: list[str] = []
    for lineno, row in enumerate(rows, start=2):  # 1-based, after header
        if len(row) != 4:
            raise CatalogValidationError(
                f"expected 4 fields (name,kind,power_draw_w,flops), got {len(row)}", row=lineno
            )
        name, kind_s, power_s, flops_s = (c.strip() for c in row)
        try:
            kind = DeviceKind(kind_s.lower())
        except ValueError:
            raise CatalogValidationError(f"kind must be cpu or gpu, got {kind_s!r}", row=lineno) from None
        try:
            power = float(power_s)
            flops = float(flops_s)
        except ValueError:
            raise CatalogValidationError(
                f"non-numeric power_draw_w/flops in {row!r}", row=lineno
            ) from None
        if power <= 0:
            raise CatalogValidationError(f"power_draw_w must be > 0, got {power}", row=lineno)
        if flops <= 0:
            raise CatalogValidationError(f"flops must be > 0, got {flops}", row=lineno)
        key = canonical_name(name)
        if key in entries:
            warnings.append(f"duplicate device {name!r}: keeping row {lineno}")
        entries[key] = HardwareCatalogEntry(name=name, power_draw_w=power, flops=flops, kind=kind)
    return HardwareCatalog(entries=entries, warnings=tuple(warnings))


def load_intensity_table(
    source: str | Path | io.TextIOBase, vintage: str | None = None
) -> IntensityTable:
    """Parse an intensity CSV into a validated table.

    Regions absent from the 50-states+DC set load fine but are recorded in
    ``gaps``. Negative intensities and duplicate regions are errors.
    """
    rows, file_vintage = _read_rows(source)
    if rows and [c.strip() for c in rows[0]] == INTENSITY_HEADER:
        rows = rows[1:]
    table: dict[str, RegionIntensity] = {}
    for lineno, row in enumerate(rows, start=2):
        if len(row) != 2:
            raise CatalogValidationError(
                f"expected 2 fields (region_code,intensity_lbs_per_kwh), got {len(row)}",
                row=lineno,
            )
        code, value_s = (c.strip() for c in row)
        code = code.upper()
        try:
            value = float(value_s)
        except ValueError:
            raise CatalogValidationError(f"non-numeric intensity {value_s!r}", row=lineno) from None
        if value < 0:
            raise CatalogValidationError(f"intensity must be >= 0, got {value}", row=lineno)
        if code in table:
            raise CatalogValidationError(f"duplicate region {code!r}", row=lineno)
        table[code] = RegionIntensity(region_code=code, intensity_lbs_per_kwh=value)
    gaps = tuple(c for c in US_REGION_CODES if c not in table)
    return IntensityTable(
        rows=table, vintage=vintage or file_vintage or "unspecified", gaps=gaps
    )


def serialize_hardware_catalog(catalog: HardwareCatalog) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HARDWARE_HEADER)
    for entry in sorted(catalog.entries.values(), key=lambda e: canonical_name(e.name)):
        writer.writerow([entry.name, entry.kind.value, repr(entry.power_draw_w), repr(entry.flops)])
    return out.getvalue()


def serialize_intensity_table(table: IntensityTable) -> str:
    out = io.StringIO()
    out.write(f"# vintage: {table.vintage}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(INTENSITY_HEADER)
    for code in sorted(table.rows):
        writer.writerow([code, repr(table.rows[code].intensity_lbs_per_kwh)])
    return out.getvalue()


def _data_text(filename: str) -> io.StringIO:
    return io.StringIO(resources.files("energyvis.data").joinpath(filename).read_text("utf-8"))


def default_hardware_catalog() -> HardwareCatalog:
    """The catalog shipped with the package (approximate public specs)."""
    return load_hardware_catalog(_data_text("hardware.csv"))


def default_intensity_table() -> IntensityTable:
    """The per-state intensity table shipped with the package."""
    return load_intensity_table(_data_text("intensity.csv"))


def load_reference_footprints() -> list[dict]:
    """Static CO2e context rows (familiar activities vs published training
    runs). Display-only; nothing computes from these."""
    rows, _ = _read_rows(_data_text("reference_footprints.csv"))
    if rows and rows[0][0].strip() == "label":
        rows = rows[1:]
    return [
        {"label": r[0].strip(), "category": r[1].strip(), "co2e_tons": float(r[2])}
        for r in rows
    ]
