"""Shared fixtures: synthetic regions, raster builders, and file writers."""

from __future__ import annotations

import numpy as np
import pytest
import shapely
import tifffile

from minesite.economics import CostParams, EconomicParams, LayoutParams, MinerSpec, NetworkSnapshot
from minesite.geodata.rasters import Raster
from minesite.geodata.regions import RegionRecord
from minesite.geodata.transforms import AffineTransform


def make_raster(values, resolution=30.0, origin=(200_000.0, 600_000.0), nodata=-9999.0) -> Raster:
    values = np.asarray(values, dtype=np.float32)
    height, width = values.shape
    transform = AffineTransform(resolution, 0.0, origin[0], 0.0, -resolution, origin[1])
    return Raster(
        width=width,
        height=height,
        resolution=resolution,
        transform=transform,
        nodata=nodata,
        values=values,
    )


def square(minx: float, miny: float, size: float) -> shapely.Polygon:
    return shapely.box(minx, miny, minx + size, miny + size)


def write_geotiff(path, values, resolution=30.0, origin=(200_000.0, 600_000.0), nodata=-9999.0):
    values = np.asarray(values, dtype=np.float32)
    extratags = [
        (33550, "d", 3, (float(resolution), float(resolution), 0.0)),
        (33922, "d", 6, (0.0, 0.0, 0.0, float(origin[0]), float(origin[1]), 0.0)),
        (42113, "s", 0, str(nodata)),
    ]
    tifffile.imwrite(path, values, extratags=extratags)
    return path


# ---------------------------------------------------------------------------
# A three-region instance built so every monetary figure is an exact float:
# per-machine revenue 164,250, depreciation 64,250, net margin 100,000 USD.
# With 100 / 80 / 20 machines the regions gross 10, 8, and 2 $M; the land
# prices make each region's annual land cost exactly 1 $M; fixed OPEX is the
# only infrastructure cost. Adjusted profit by K is therefore (6, 10, 8) $M.
# ---------------------------------------------------------------------------

TRIO_PARAMS = EconomicParams(
    miner=MinerSpec(power_kw=4.0, hashrate_ths=250.0, capex_per_unit=449_750.0, lifetime_years=7.0),
    network=NetworkSnapshot(
        network_hashrate_ths=1_000.0,
        block_reward_btc=3.125,
        btc_price_usd=4.0,
        blocks_per_year=52_560.0,
    ),
    layout=LayoutParams(),
    costs=CostParams(
        market_multiplier=1.0,
        land_amort_years=20.0,
        fixed_capex_per_site_usd=0.0,
        variable_capex_per_mw_usd=0.0,
        grid_fee_usd=0.0,
        grid_block_mw=10.0,
        infra_lifetime_years=7.0,
        fixed_opex_per_site_usd=3_000_000.0,
        energy_price_usd_per_kwh=0.0,
        fx_krw_per_usd=1_000.0,
    ),
)


def make_trio_regions() -> list[RegionRecord]:
    specs = [
        ("41001", "Alpha", 3_504_000.0, 20_000_000.0, (950_000.0, 1_800_000.0)),
        ("42002", "Beta", 2_803_200.0, 25_000_000.0, (960_000.0, 1_800_000.0)),
        ("43003", "Gamma", 700_800.0, 100_000_000.0, (970_000.0, 1_800_000.0)),
    ]
    return [
        RegionRecord(
            region_code=code,
            name=name,
            annual_surplus_kwh=surplus,
            land_price_krw_m2=price,
            boundary=square(ox, oy, 900.0),
        )
        for code, name, surplus, price, (ox, oy) in specs
    ]


@pytest.fixture
def trio_regions() -> list[RegionRecord]:
    return make_trio_regions()


@pytest.fixture
def trio_params() -> EconomicParams:
    return TRIO_PARAMS
