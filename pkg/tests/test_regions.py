import json

import pytest
import shapely

from minesite.errors import GeoreferenceError, InputIOError, ParseError, ValidationError
from minesite.geodata.regions import RegionRecord, load_regions

from conftest import square

CSV_HEADER = "region_code,name,year,month,surplus_kwh,land_price_krw_m2\n"


def geojson_square(code: str, minx: float, miny: float, size: float = 900.0) -> dict:
    ring = [
        [minx, miny],
        [minx + size, miny],
        [minx + size, miny + size],
        [minx, miny + size],
        [minx, miny],
    ]
    return {
        "type": "Feature",
        "properties": {"region_code": code},
        "geometry": {"type": "Polygon", "coordinates": [ring]},
    }


def write_inputs(tmp_path, csv_body: str, codes: list[str]):
    csv_path = tmp_path / "areal.csv"
    csv_path.write_text(CSV_HEADER + csv_body, encoding="utf-8")
    geo_path = tmp_path / "regions.geojson"
    features = [
        geojson_square(code, 950_000.0 + 1_000.0 * i, 1_800_000.0) for i, code in enumerate(codes)
    ]
    geo_path.write_text(json.dumps({"type": "FeatureCollection", "features": features}))
    return csv_path, geo_path


def test_twelve_monthly_rows_aggregate_to_annual(tmp_path):
    body = "".join(
        f"41461,Yongin,2024,{month},1000,150000\n" for month in range(1, 13)
    )
    csv_path, geo_path = write_inputs(tmp_path, body, ["41461"])
    dataset = load_regions(csv_path, geo_path)
    assert len(dataset.records) == 1
    record = dataset.records[0]
    assert record.annual_surplus_kwh == 12_000.0
    assert record.monthly_surplus_kwh == tuple([1000.0] * 12)
    assert dataset.exclusions == ()


def test_negative_surplus_is_rejected(tmp_path):
    csv_path, geo_path = write_inputs(tmp_path, "41461,Yongin,2024,annual,-5,150000\n", ["41461"])
    with pytest.raises(ValidationError, match="negative surplus"):
        load_regions(csv_path, geo_path)


def test_region_without_geometry_is_reported_and_excluded(tmp_path):
    body = (
        "41461,Yongin,2024,annual,1000,150000\n"
        "46110,Damyang,2024,annual,2000,90000\n"
        "48270,Miryang,2024,annual,3000,80000\n"
    )
    # Geometry only for the first two codes.
    csv_path, geo_path = write_inputs(tmp_path, body, ["41461", "46110"])
    dataset = load_regions(csv_path, geo_path)
    assert sorted(r.region_code for r in dataset.records) == ["41461", "46110"]
    assert len(dataset.exclusions) == 1
    assert dataset.exclusions[0].region_code == "48270"
    assert "geometry" in dataset.exclusions[0].reason


def test_missing_price_and_missing_surplus_are_excluded(tmp_path):
    body = (
        "41461,Yongin,2024,annual,1000,\n"
        "46110,Damyang,2024,annual,,90000\n"
        "48270,Miryang,2024,annual,3000,80000\n"
    )
    csv_path, geo_path = write_inputs(tmp_path, body, ["41461", "46110", "48270"])
    dataset = load_regions(csv_path, geo_path)
    assert [r.region_code for r in dataset.records] == ["48270"]
    reasons = {e.region_code: e.reason for e in dataset.exclusions}
    assert "price" in reasons["41461"]
    assert "surplus" in reasons["46110"]


def test_malformed_surplus_reports_line_number(tmp_path):
    body = "41461,Yongin,2024,annual,1000,150000\n46110,Damyang,2024,annual,abc,90000\n"
    csv_path, geo_path = write_inputs(tmp_path, body, ["41461", "46110"])
    with pytest.raises(ParseError, match="line 3"):
        load_regions(csv_path, geo_path)


def test_duplicate_region_period_is_validation_error(tmp_path):
    body = "41461,Yongin,2024,annual,1000,150000\n41461,Yongin,2024,annual,999,150000\n"
    csv_path, geo_path = write_inputs(tmp_path, body, ["41461"])
    with pytest.raises(ValidationError, match="duplicate"):
        load_regions(csv_path, geo_path)


def test_missing_column_is_named(tmp_path):
    _, geo_path = write_inputs(tmp_path, "", [])
    csv_path = tmp_path / "no_price_column.csv"
    csv_path.write_text("region_code,name,year,month,surplus_kwh\n41461,Yongin,2024,annual,1\n")
    with pytest.raises(ValidationError, match="land_price_krw_m2"):
        load_regions(csv_path, geo_path)


def test_geographic_coordinates_are_rejected(tmp_path):
    csv_path, _ = write_inputs(tmp_path, "41461,Yongin,2024,annual,1000,150000\n", ["41461"])
    geo_path = tmp_path / "lonlat.geojson"
    feature = geojson_square("41461", 127.2, 37.2, size=0.01)
    geo_path.write_text(json.dumps({"type": "FeatureCollection", "features": [feature]}))
    with pytest.raises(GeoreferenceError, match="projected"):
        load_regions(csv_path, geo_path)


def test_annual_and_monthly_must_agree_within_half_percent(tmp_path):
    monthly = "".join(f"41461,Yongin,2024,{m},100,150000\n" for m in range(1, 13))
    body = monthly + "41461,Yongin,2024,annual,1300,150000\n"  # monthly sum 1200, off by 8%
    csv_path, geo_path = write_inputs(tmp_path, body, ["41461"])
    with pytest.raises(ValidationError, match="0.5%"):
        load_regions(csv_path, geo_path)


def test_annual_and_monthly_within_tolerance_passes(tmp_path):
    monthly = "".join(f"41461,Yongin,2024,{m},100,150000\n" for m in range(1, 13))
    body = monthly + "41461,Yongin,2024,annual,1204,150000\n"  # 0.33% apart
    csv_path, geo_path = write_inputs(tmp_path, body, ["41461"])
    dataset = load_regions(csv_path, geo_path)
    assert dataset.records[0].annual_surplus_kwh == 1204.0


def test_incomplete_monthly_coverage_is_excluded(tmp_path):
    body = "".join(f"41461,Yongin,2024,{m},100,150000\n" for m in range(1, 8))
    csv_path, geo_path = write_inputs(tmp_path, body, ["41461"])
    dataset = load_regions(csv_path, geo_path)
    assert dataset.records == ()
    assert "missing months" in dataset.exclusions[0].reason


def test_unreadable_csv_is_io_error(tmp_path):
    _, geo_path = write_inputs(tmp_path, "", [])
    with pytest.raises(InputIOError):
        load_regions(tmp_path / "absent.csv", geo_path)


def test_month_out_of_range_rejected(tmp_path):
    csv_path, geo_path = write_inputs(tmp_path, "41461,Yongin,2024,13,100,150000\n", ["41461"])
    with pytest.raises(ValidationError, match="month out of range"):
        load_regions(csv_path, geo_path)


class TestRegionRecordInvariants:
    BOUNDARY = square(950_000.0, 1_800_000.0, 900.0)

    def test_negative_surplus(self):
        with pytest.raises(ValidationError):
            RegionRecord("x", "X", -1.0, 1000.0, self.BOUNDARY)

    def test_non_positive_price(self):
        with pytest.raises(ValidationError):
            RegionRecord("x", "X", 1.0, 0.0, self.BOUNDARY)

    def test_monthly_length(self):
        with pytest.raises(ValidationError, match="12"):
            RegionRecord("x", "X", 12.0, 1.0, self.BOUNDARY, monthly_surplus_kwh=(1.0,) * 11)

    def test_monthly_sum_tolerance(self):
        with pytest.raises(ValidationError, match="0.5%"):
            RegionRecord("x", "X", 1300.0, 1.0, self.BOUNDARY, monthly_surplus_kwh=(100.0,) * 12)

    def test_degenerate_boundary(self):
        line = shapely.LineString([(0, 0), (1, 1)]).buffer(0)
        with pytest.raises(ValidationError):
            RegionRecord("x", "X", 1.0, 1.0, line)

    def test_valid_record(self):
        r = RegionRecord("x", "X", 1200.0, 1.0, self.BOUNDARY, monthly_surplus_kwh=(100.0,) * 12)
        assert r.annual_surplus_kwh == 1200.0
