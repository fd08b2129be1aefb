"""Administrative regions: surplus energy, land price, and boundary geometry.

The areal CSV and the boundary GeoJSON are joined on ``region_code``.
Regions missing surplus data, a land price, or a geometry are excluded and
reported, never silently dropped; rows that are present but malformed raise.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

from shapely.geometry import shape
from shapely.geometry.base import BaseGeometry

from ..errors import GeoreferenceError, InputIOError, ParseError, ValidationError

logger = logging.getLogger(__name__)

REQUIRED_CSV_COLUMNS = (
    "region_code",
    "name",
    "year",
    "month",
    "surplus_kwh",
    "land_price_krw_m2",
)

# Relative disagreement tolerated between an annual row and the sum of the
# twelve monthly rows before the region is considered corrupt.
MONTHLY_SUM_TOLERANCE = 0.005


@dataclass(frozen=True)
class RegionRecord:
    """One region's annual surplus energy, land price, and boundary polygon."""

    region_code: str
    name: str
    annual_surplus_kwh: float
    land_price_krw_m2: float
    boundary: BaseGeometry
    monthly_surplus_kwh: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.annual_surplus_kwh < 0:
            raise ValidationError(
                f"region {self.region_code}: surplus must be >= 0, got {self.annual_surplus_kwh}"
            )
        if self.land_price_krw_m2 <= 0:
            raise ValidationError(
                f"region {self.region_code}: land price must be > 0, got {self.land_price_krw_m2}"
            )
        if self.monthly_surplus_kwh is not None:
            if len(self.monthly_surplus_kwh) != 12:
                raise ValidationError(
                    f"region {self.region_code}: monthly surplus needs 12 entries, "
                    f"got {len(self.monthly_surplus_kwh)}"
                )
            total = sum(self.monthly_surplus_kwh)
            limit = MONTHLY_SUM_TOLERANCE * self.annual_surplus_kwh
            if not math.isclose(total, self.annual_surplus_kwh, rel_tol=0, abs_tol=max(limit, 1e-9)):
                raise ValidationError(
                    f"region {self.region_code}: monthly surplus sums to {total}, "
                    f"differs from annual {self.annual_surplus_kwh} by more than 0.5%"
                )
        if self.boundary.is_empty or not self.boundary.is_valid or self.boundary.area <= 0:
            raise ValidationError(f"region {self.region_code}: boundary is not a valid polygon")


@dataclass(frozen=True)
class Exclusion:
    """Why a region present in the inputs was left out of the dataset."""

    region_code: str
    reason: str


@dataclass(frozen=True)
class RegionDataset:
    records: tuple[RegionRecord, ...]
    exclusions: tuple[Exclusion, ...]


def load_regions(areal_csv_path: str | Path, geometry_path: str | Path) -> RegionDataset:
    """Join the areal CSV with boundary geometries into RegionRecords.

    Monthly rows are aggregated to an annual total; a region carrying both an
    annual row and monthly rows must agree within 0.5%. Returns the usable
    records plus an exclusion report for regions missing surplus, price, or
    geometry.
    """
    rows = _read_areal_csv(Path(areal_csv_path))
    geometries = _read_geometries(Path(geometry_path))

    records: list[RegionRecord] = []
    exclusions: list[Exclusion] = []
    for code, region_rows in rows.items():
        name = region_rows[0].name
        try:
            annual, monthly = _aggregate_surplus(code, region_rows)
        except _MissingData as missing:
            exclusions.append(Exclusion(code, str(missing)))
            continue
        price = _single_land_price(code, region_rows)
        if price is None:
            exclusions.append(Exclusion(code, "missing land price"))
            continue
        boundary = geometries.get(code)
        if boundary is None:
            exclusions.append(Exclusion(code, "missing geometry"))
            continue
        records.append(
            RegionRecord(
                region_code=code,
                name=name,
                annual_surplus_kwh=annual,
                monthly_surplus_kwh=monthly,
                land_price_krw_m2=price,
                boundary=boundary,
            )
        )
    for exc in exclusions:
        logger.warning("excluding region %s: %s", exc.region_code, exc.reason)
    return RegionDataset(records=tuple(records), exclusions=tuple(exclusions))


@dataclass
class _CsvRow:
    line: int
    name: str
    year: str
    month: str | None  # None for an annual row
    surplus_kwh: float | None
    land_price_krw_m2: float | None


class _MissingData(Exception):
    pass


def _read_areal_csv(path: Path) -> dict[str, list[_CsvRow]]:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputIOError(f"cannot read areal CSV {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError(f"{path}: empty CSV file")
        missing_cols = [c for c in REQUIRED_CSV_COLUMNS if c not in reader.fieldnames]
        if missing_cols:
            raise ValidationError(f"{path}: missing required column(s): {', '.join(missing_cols)}")

        rows: dict[str, list[_CsvRow]] = {}
        seen_periods: set[tuple[str, str]] = set()
        for record in reader:
            line = reader.line_num
            code = (record["region_code"] or "").strip()
            if not code:
                raise ParseError("empty region_code", line=line)
            month = _parse_month(record["month"], line)
            period_key = (code, "annual" if month is None else f"m{month:02d}")
            if period_key in seen_periods:
                raise ValidationError(
                    f"line {line}: duplicate row for region {code} ({period_key[1]})"
                )
            seen_periods.add(period_key)
            row = _CsvRow(
                line=line,
                name=(record["name"] or "").strip(),
                year=(record["year"] or "").strip(),
                month=None if month is None else str(month),
                surplus_kwh=_parse_optional_float(record["surplus_kwh"], "surplus_kwh", line),
                land_price_krw_m2=_parse_optional_float(
                    record["land_price_krw_m2"], "land_price_krw_m2", line
                ),
            )
            if row.surplus_kwh is not None and row.surplus_kwh < 0:
                raise ValidationError(f"line {line}: negative surplus for region {code}")
            if row.land_price_krw_m2 is not None and row.land_price_krw_m2 <= 0:
                raise ValidationError(f"line {line}: non-positive land price for region {code}")
            rows.setdefault(code, []).append(row)

    for code, region_rows in rows.items():
        years = {r.year for r in region_rows}
        if len(years) > 1:
            raise ValidationError(f"region {code}: rows span multiple years {sorted(years)}")
    return rows


def _parse_month(raw: str | None, line: int) -> int | None:
    token = (raw or "").strip().lower()
    if token in ("", "annual", "year"):
        return None
    try:
        month = int(token)
    except ValueError as exc:
        raise ParseError(f"month must be 1-12 or 'annual', got {raw!r}", line=line) from exc
    if not 1 <= month <= 12:
        raise ValidationError(f"line {line}: month out of range: {month}")
    return month


def _parse_optional_float(raw: str | None, column: str, line: int) -> float | None:
    token = (raw or "").strip()
    if not token:
        return None
    try:
        return float(token)
    except ValueError as exc:
        raise ParseError(f"non-numeric {column}: {raw!r}", line=line) from exc


def _aggregate_surplus(
    code: str, region_rows: list[_CsvRow]
) -> tuple[float, tuple[float, ...] | None]:
    annual_rows = [r for r in region_rows if r.month is None]
    monthly_rows = [r for r in region_rows if r.month is not None]

    annual_value = annual_rows[0].surplus_kwh if annual_rows else None
    monthly: tuple[float, ...] | None = None
    if monthly_rows:
        by_month = {int(r.month): r.surplus_kwh for r in monthly_rows}
        present = {m for m, v in by_month.items() if v is not None}
        if present != set(range(1, 13)):
            missing = sorted(set(range(1, 13)) - present)
            raise _MissingData(f"incomplete monthly surplus (missing months {missing})")
        monthly = tuple(by_month[m] for m in range(1, 13))

    if annual_value is None and monthly is None:
        raise _MissingData("missing surplus data")
    if annual_value is None:
        annual_value = sum(monthly)
    elif monthly is not None:
        limit = max(MONTHLY_SUM_TOLERANCE * annual_value, 1e-9)
        if abs(sum(monthly) - annual_value) > limit:
            raise ValidationError(
                f"region {code}: annual surplus {annual_value} disagrees with "
                f"monthly sum {sum(monthly)} by more than 0.5%"
            )
    return annual_value, monthly


def _single_land_price(code: str, region_rows: list[_CsvRow]) -> float | None:
    prices = {r.land_price_krw_m2 for r in region_rows if r.land_price_krw_m2 is not None}
    if not prices:
        return None
    if len(prices) > 1:
        raise ValidationError(f"region {code}: conflicting land prices {sorted(prices)}")
    return prices.pop()


def _read_geometries(path: Path) -> dict[str, BaseGeometry]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputIOError(f"cannot read geometry file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc

    if payload.get("type") != "FeatureCollection":
        raise ValidationError(f"{path}: expected a GeoJSON FeatureCollection")

    geometries: dict[str, BaseGeometry] = {}
    for idx, feature in enumerate(payload.get("features", [])):
        props = feature.get("properties") or {}
        code = props.get("region_code")
        if code is None:
            raise ValidationError(f"{path}: feature #{idx} lacks a region_code property")
        code = str(code)
        if code in geometries:
            raise ValidationError(f"{path}: duplicate geometry for region {code}")
        geom = shape(feature["geometry"])
        if geom.geom_type not in ("Polygon", "MultiPolygon"):
            raise ValidationError(
                f"{path}: region {code} geometry must be Polygon or MultiPolygon, "
                f"got {geom.geom_type}"
            )
        _require_projected_meters(path, code, geom)
        geometries[code] = geom
    return geometries


def _require_projected_meters(path: Path, code: str, geom: BaseGeometry) -> None:
    # No CRS metadata travels with plain GeoJSON, so geographic coordinates
    # are detected heuristically: every vertex inside lon/lat bounds means
    # the file is almost certainly not in projected meters.
    minx, miny, maxx, maxy = geom.bounds
    if -180.0 <= minx <= 180.0 and -180.0 <= maxx <= 180.0 and -90.0 <= miny <= 90.0 and -90.0 <= maxy <= 90.0:
        raise GeoreferenceError(
            f"{path}: region {code} coordinates look geographic (lon/lat); "
            "boundaries must be supplied in a projected CRS in meters"
        )
