#!/usr/bin/env python3
"""Regenerate the bundled synthetic demo dataset under data/demo/.

Three fictional sigungu-scale regions sit side by side on a shared 30 m
grid. Slope and land-use patterns are deterministic formulas, so the files
are reproducible byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from minesite.config import default_config_yaml
from minesite.geodata.rasters import Raster, write_ascii_grid
from minesite.geodata.transforms import AffineTransform

OUT = Path(__file__).resolve().parent.parent / "data" / "demo"

RES = 30.0
XLL, YLL = 950_000.0, 1_800_000.0
NCOLS, NROWS = 100, 36
Y_TOP = YLL + NROWS * RES

REGIONS = [
    # code, name, annual surplus kWh, land price KRW/m2, first col of its square
    ("41210", "Cheongha", 692_064_000.0, 150_000.0, 2),
    ("46530", "Soyang", 448_896_000.0, 90_000.0, 34),
    ("48330", "Namcheon", 376_092_000.0, 80_000.0, 66),
]
REGION_SIZE_PX = 30
REGION_ROW0 = 3


def region_bounds(col0: int) -> tuple[float, float, float, float]:
    minx = XLL + col0 * RES
    maxx = minx + REGION_SIZE_PX * RES
    maxy = Y_TOP - REGION_ROW0 * RES
    miny = maxy - REGION_SIZE_PX * RES
    return minx, miny, maxx, maxy


def write_csv() -> None:
    lines = ["region_code,name,year,month,surplus_kwh,land_price_krw_m2"]
    code, name, surplus, price, _ = REGIONS[0]
    for month in range(1, 13):  # first region arrives as monthly rows
        lines.append(f"{code},{name},2024,{month},{surplus / 12:.0f},{price:.0f}")
    for code, name, surplus, price, _ in REGIONS[1:]:
        lines.append(f"{code},{name},2024,annual,{surplus:.0f},{price:.0f}")
    (OUT / "regions.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_geojson() -> None:
    features = []
    for code, name, _, _, col0 in REGIONS:
        minx, miny, maxx, maxy = region_bounds(col0)
        ring = [[minx, miny], [maxx, miny], [maxx, maxy], [minx, maxy], [minx, miny]]
        features.append(
            {
                "type": "Feature",
                "properties": {"region_code": code, "name": name},
                "geometry": {"type": "Polygon", "coordinates": [ring]},
            }
        )
    payload = {"type": "FeatureCollection", "features": features}
    (OUT / "regions.geojson").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def make_raster(values: np.ndarray) -> Raster:
    transform = AffineTransform(RES, 0.0, XLL, 0.0, -RES, Y_TOP)
    return Raster(
        width=NCOLS,
        height=NROWS,
        resolution=RES,
        transform=transform,
        nodata=-9999.0,
        values=values.astype(np.float32),
    )


def write_slope() -> None:
    rows = np.arange(NROWS)[:, None]
    cols = np.arange(NCOLS)[None, :]
    # Gentle valley floor with diagonal ridges and a steep hill per region.
    slope = 1.5 + 2.5 * np.abs(np.sin(0.11 * cols + 0.07 * rows))
    ridge = ((rows + cols) % 13) < 2
    slope = np.where(ridge, 24.0, slope)
    for _, _, _, _, col0 in REGIONS:
        hill_r, hill_c = REGION_ROW0 + 6, col0 + 21
        dist2 = (rows - hill_r) ** 2 + (cols - hill_c) ** 2
        slope = np.where(dist2 <= 16, 31.0, slope)
    write_ascii_grid(make_raster(slope), OUT / "slope.asc", cell_format="%.2f")


def write_landuse() -> None:
    rows = np.arange(NROWS)[:, None]
    cols = np.arange(NCOLS)[None, :]
    # Six classes: 1 field, 2 paddy, 3 forest, 4 urban, 5 industrial, 6 reserve.
    codes = np.where((cols % 17) < 9, 1.0, 2.0)
    codes = np.where((rows % 11) < 2, 3.0, codes)
    for _, _, _, _, col0 in REGIONS:
        town_r, town_c = REGION_ROW0 + 20, col0 + 7
        codes = np.where(
            (np.abs(rows - town_r) <= 3) & (np.abs(cols - town_c) <= 4), 4.0, codes
        )
        codes = np.where(
            (np.abs(rows - town_r) <= 1) & (np.abs(cols - (town_c + 14)) <= 2), 5.0, codes
        )
    codes = np.where((rows < 2) | (rows >= NROWS - 1), 6.0, codes)
    write_ascii_grid(make_raster(codes), OUT / "landuse.asc", cell_format="%.0f")


def write_config() -> None:
    text = default_config_yaml(
        areal_csv="regions.csv",
        geometry="regions.geojson",
        slope_raster="slope.asc",
        landuse_raster="landuse.asc",
    )
    text = text.replace(
        "  allowed_landuse_codes: []          # empty = keep everything",
        "  allowed_landuse_codes: [1, 2, 5]   # field, paddy, industrial",
    )
    (OUT / "config.yaml").write_text(text, encoding="utf-8")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    write_csv()
    write_geojson()
    write_slope()
    write_landuse()
    write_config()
    print(f"wrote demo dataset to {OUT}")


if __name__ == "__main__":
    main()
