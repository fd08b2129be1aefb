"""Lattice-level candidate site screening.

Inside each selected region the clipped 30 m slope raster is scanned with a
sliding window sized from the region's required net area. A window position
becomes a candidate site only if every covered pixel is valid and strictly
below the slope threshold; candidates are then filtered against land-use
codes. Sites are emitted as axis-aligned rectangles in world coordinates,
anchored at the window's top-left pixel corner.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import shapely
from sklearn.base import BaseEstimator

from .economics import RegionPlan
from .errors import CoRegistrationError, ValidationError
from .geodata.masking import mask_clip
from .geodata.rasters import Raster
from .geodata.regions import RegionRecord
from .validation import check_co_registered, check_raster

logger = logging.getLogger(__name__)

SIDE_ROUNDINGS = ("ceil_int", "ceil_mult5")

__all__ = [
    "ScreeningParams",
    "CandidateSite",
    "ScreeningResult",
    "unit_site_side",
    "window_pixels",
    "stride_pixels",
    "sliding_window_search",
    "landuse_filter",
    "screen_region",
    "SiteScreener",
]


@dataclass(frozen=True)
class ScreeningParams:
    """Terrain and land-use screening knobs."""

    max_slope_deg: float = 6.0
    stride_m: float = 20.0
    side_rounding: str = "ceil_mult5"
    allowed_landuse_codes: frozenset[int] | None = None

    def __post_init__(self):
        if not 0.0 < self.max_slope_deg < 90.0:
            raise ValidationError(
                f"max_slope_deg must be in (0, 90), got {self.max_slope_deg}"
            )
        if self.stride_m <= 0:
            raise ValidationError(f"stride_m must be > 0, got {self.stride_m}")
        if self.side_rounding not in SIDE_ROUNDINGS:
            raise ValidationError(
                f"side_rounding must be one of {SIDE_ROUNDINGS}, got {self.side_rounding!r}"
            )
        if self.allowed_landuse_codes is not None:
            object.__setattr__(
                self, "allowed_landuse_codes", frozenset(int(c) for c in self.allowed_landuse_codes)
            )


@dataclass(frozen=True)
class CandidateSite:
    """One unit-site rectangle in world coordinates.

    ``bounds`` is (minx, miny, maxx, maxy); the anchor is the top-left pixel
    of the window that produced the site, so (minx, maxy) is that pixel's
    upper-left corner.
    """

    region_code: str
    anchor_col: int
    anchor_row: int
    bounds: tuple[float, float, float, float]
    max_slope_deg: float
    landuse_ok: bool = True

    @property
    def polygon(self) -> shapely.Polygon:
        return shapely.box(*self.bounds)


@dataclass(frozen=True)
class ScreeningResult:
    """Slope-screened (initial) and land-use-filtered (available) sites."""

    region_code: str
    initial: tuple[CandidateSite, ...]
    available: tuple[CandidateSite, ...]
    unit_side_m: float
    window_px: int
    stride_px: int

    @property
    def initial_count(self) -> int:
        return len(self.initial)

    @property
    def available_count(self) -> int:
        return len(self.available)

    @property
    def retention_ratio(self) -> float:
        if not self.initial:
            return 0.0
        return len(self.available) / len(self.initial)


def unit_site_side(net_area_m2: float, rounding: str = "ceil_mult5") -> float:
    """Square unit-site side length from the required net area.

    ``ceil_int`` rounds sqrt(area) up to a whole meter; ``ceil_mult5``
    additionally rounds up to the next multiple of 5 m.
    """
    if net_area_m2 < 0:
        raise ValidationError(f"net area must be >= 0, got {net_area_m2}")
    if rounding not in SIDE_ROUNDINGS:
        raise ValidationError(f"rounding must be one of {SIDE_ROUNDINGS}, got {rounding!r}")
    side = math.ceil(math.sqrt(net_area_m2))
    if rounding == "ceil_mult5":
        side = 5 * math.ceil(side / 5)
    return float(side)


def window_pixels(side_m: float, resolution_m: float) -> int:
    """Whole pixels covering a side length; at least 1 for any positive side."""
    if resolution_m <= 0:
        raise ValidationError(f"resolution must be > 0, got {resolution_m}")
    if side_m < 0:
        raise ValidationError(f"side must be >= 0, got {side_m}")
    if side_m == 0:
        return 0
    return max(1, math.ceil(side_m / resolution_m))


def stride_pixels(stride_m: float, resolution_m: float) -> int:
    """Stride in whole pixels; sub-pixel strides collapse to one pixel."""
    if stride_m <= 0 or resolution_m <= 0:
        raise ValidationError("stride and resolution must be > 0")
    return max(1, round(stride_m / resolution_m))


def sliding_window_search(
    slope: Raster,
    window_px: tuple[int, int],
    stride_px: int = 1,
    theta: float = 6.0,
    side_m: tuple[float, float] | None = None,
    region_code: str = "",
    n_workers: int = 1,
) -> list[CandidateSite]:
    """All window anchors whose pixels are valid and strictly below ``theta``.

    ``window_px`` is (width, height) in pixels; anchors advance in steps of
    ``stride_px`` in both axes starting at pixel (0, 0). The emitted polygon
    spans ``side_m`` meters (defaults to the window extent) from the anchor
    pixel's upper-left corner. Output is sorted by (row, col) and is
    bit-identical for any ``n_workers``.
    """
    check_raster(slope)
    ww, wh = int(window_px[0]), int(window_px[1])
    if ww < 1 or wh < 1:
        raise ValidationError(f"window must be at least 1x1 pixel, got {window_px}")
    if stride_px < 1:
        raise ValidationError(f"stride_px must be >= 1, got {stride_px}")
    if not 0.0 < theta < 90.0:
        raise ValidationError(f"theta must be in (0, 90), got {theta}")
    if ww > slope.width or wh > slope.height:
        logger.warning(
            "window %dx%d px exceeds raster %dx%d px; no candidate sites",
            ww, wh, slope.width, slope.height,
        )
        return []
    if side_m is None:
        side_m = (ww * slope.resolution, wh * slope.resolution)

    anchor_rows = slope.height - wh + 1
    n_bands = max(1, min(int(n_workers), anchor_rows))
    edges = np.linspace(0, anchor_rows, n_bands + 1).astype(int)
    bands = [(int(r0), int(r1)) for r0, r1 in zip(edges[:-1], edges[1:]) if r1 > r0]

    def run_band(r0: int, r1: int) -> list[CandidateSite]:
        rows, cols, maxes = _scan_band(
            slope.values, float(slope.nodata), ww, wh, theta, r0, r1, stride_px
        )
        return _build_sites(slope, rows, cols, maxes, side_m, region_code)

    if len(bands) == 1:
        parts = [run_band(*bands[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(bands)) as pool:
            futures = [pool.submit(run_band, r0, r1) for r0, r1 in bands]
            parts = [f.result() for f in futures]

    sites: list[CandidateSite] = []
    for part in parts:
        sites.extend(part)
    sites.sort(key=lambda s: (s.anchor_row, s.anchor_col))
    return sites


def _scan_band(
    values: np.ndarray,
    nodata: float,
    ww: int,
    wh: int,
    theta: float,
    row_start: int,
    row_stop: int,
    stride_px: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Windowed-max scan over anchor rows [row_start, row_stop)."""
    n_rows = row_stop - row_start
    out_w = values.shape[1] - ww + 1
    # Work in float64 so the strict comparison against theta is exact even
    # when theta is not representable in float32.
    band = values[row_start : row_stop + wh - 1].astype(np.float64)
    band[band == float(np.float32(nodata))] = np.inf

    acc = band[0:n_rows, 0:out_w].copy()
    for dr in range(wh):
        for dc in range(ww):
            if dr == 0 and dc == 0:
                continue
            np.maximum(acc, band[dr : dr + n_rows, dc : dc + out_w], out=acc)

    ok = acc < theta
    # NaN never compares below theta, so NaN cells reject windows on their own.
    if stride_px > 1:
        global_rows = np.arange(row_start, row_stop)
        ok[(global_rows % stride_px) != 0, :] = False
        ok[:, (np.arange(out_w) % stride_px) != 0] = False
    rows, cols = np.nonzero(ok)
    return rows + row_start, cols, acc[rows, cols]


def _build_sites(
    slope: Raster,
    rows: np.ndarray,
    cols: np.ndarray,
    maxes: np.ndarray,
    side_m: tuple[float, float],
    region_code: str,
) -> list[CandidateSite]:
    t = slope.transform
    x_ul = t.c + cols * t.a
    y_ul = t.f + rows * t.e
    width_m, height_m = side_m
    return [
        CandidateSite(
            region_code=region_code,
            anchor_col=int(c),
            anchor_row=int(r),
            bounds=(float(x), float(y) - height_m, float(x) + width_m, float(y)),
            max_slope_deg=float(m),
        )
        for r, c, x, y, m in zip(rows, cols, x_ul, y_ul, maxes)
    ]


def landuse_filter(
    sites: Sequence[CandidateSite],
    landuse: Raster,
    allowed: frozenset[int] | set[int],
) -> list[CandidateSite]:
    """Keep sites whose whole pixel footprint carries an allowed code."""
    flags = landuse_flags(sites, landuse, allowed)
    return [replace(site, landuse_ok=True) for site, ok in zip(sites, flags) if ok]


def landuse_flags(
    sites: Sequence[CandidateSite],
    landuse: Raster,
    allowed: frozenset[int] | set[int],
) -> list[bool]:
    """Per-site land-use verdicts against a co-registered code raster."""
    check_raster(landuse)
    allowed_values = np.asarray(sorted(allowed), dtype=np.float32)
    t = landuse.transform
    flags: list[bool] = []
    for site in sites:
        minx, miny, maxx, maxy = site.bounds
        col_f = (minx - t.c) / t.a
        row_f = (maxy - t.f) / t.e
        if abs(col_f - site.anchor_col) > 1e-6 or abs(row_f - site.anchor_row) > 1e-6:
            raise CoRegistrationError(
                f"site anchored at ({site.anchor_col}, {site.anchor_row}) maps to "
                f"({col_f:.8f}, {row_f:.8f}) on the land-use grid; rasters are misaligned"
            )
        w_px = max(1, math.ceil(round((maxx - minx) / landuse.resolution, 9)))
        h_px = max(1, math.ceil(round((maxy - miny) / landuse.resolution, 9)))
        r0, c0 = site.anchor_row, site.anchor_col
        if r0 + h_px > landuse.height or c0 + w_px > landuse.width:
            raise CoRegistrationError(
                f"site footprint at ({c0}, {r0}) falls outside the land-use raster"
            )
        window = landuse.values[r0 : r0 + h_px, c0 : c0 + w_px]
        flags.append(bool(np.isin(window, allowed_values).all()))
    return flags


def screen_region(
    region: RegionRecord,
    plan: RegionPlan,
    slope: Raster,
    landuse: Raster | None,
    params: ScreeningParams,
    n_workers: int = 1,
) -> ScreeningResult:
    """Clip rasters to the region, size the window from the plan, and screen.

    Returns slope-passing sites (``initial``, with per-site land-use verdicts
    when a land-use raster and allowed codes are configured) and the
    land-use-passing subset (``available``).
    """
    if plan.net_area_m2 <= 0:
        raise ValidationError(
            f"region {region.region_code}: cannot screen with net area {plan.net_area_m2}"
        )
    slope_j = mask_clip(slope, region.boundary)
    valid = slope_j.values[slope_j.valid_mask]
    if valid.size and (float(valid.min()) < 0.0 or float(valid.max()) >= 90.0):
        raise ValidationError(
            f"region {region.region_code}: slope raster holds values outside [0, 90) degrees"
        )
    landuse_j = None
    if landuse is not None and params.allowed_landuse_codes is not None:
        landuse_j = mask_clip(landuse, region.boundary)
        check_co_registered(slope_j, landuse_j)

    side = unit_site_side(plan.net_area_m2, params.side_rounding)
    w_px = window_pixels(side, slope_j.resolution)
    s_px = stride_pixels(params.stride_m, slope_j.resolution)
    initial = sliding_window_search(
        slope_j,
        window_px=(w_px, w_px),
        stride_px=s_px,
        theta=params.max_slope_deg,
        side_m=(side, side),
        region_code=region.region_code,
        n_workers=n_workers,
    )

    if landuse_j is None:
        available = list(initial)
    else:
        flags = landuse_flags(initial, landuse_j, params.allowed_landuse_codes)
        initial = [replace(s, landuse_ok=ok) for s, ok in zip(initial, flags)]
        available = [s for s in initial if s.landuse_ok]

    return ScreeningResult(
        region_code=region.region_code,
        initial=tuple(initial),
        available=tuple(available),
        unit_side_m=side,
        window_px=w_px,
        stride_px=s_px,
    )


class SiteScreener(BaseEstimator):
    """Estimator wrapper around per-region site screening.

    ``fit`` binds the screener to one region and its deployment plan (the
    unit-site size derives from the plan's net area); ``transform`` then maps
    national slope / land-use rasters to that region's candidate sites.

    Attributes (after ``fit``)
    --------------------------
    region_ : RegionRecord
    plan_ : RegionPlan
    unit_side_m_ : float
    """

    def __init__(
        self,
        max_slope_deg: float = 6.0,
        stride_m: float = 20.0,
        side_rounding: str = "ceil_mult5",
        allowed_landuse_codes: frozenset[int] | None = None,
        n_workers: int = 1,
    ):
        self.max_slope_deg = max_slope_deg
        self.stride_m = stride_m
        self.side_rounding = side_rounding
        self.allowed_landuse_codes = allowed_landuse_codes
        self.n_workers = n_workers

    def _params(self) -> ScreeningParams:
        return ScreeningParams(
            max_slope_deg=self.max_slope_deg,
            stride_m=self.stride_m,
            side_rounding=self.side_rounding,
            allowed_landuse_codes=self.allowed_landuse_codes,
        )

    def fit(self, region: RegionRecord, plan: RegionPlan) -> "SiteScreener":
        self._params()  # validate parameters eagerly
        if plan.region_code != region.region_code:
            raise ValidationError(
                f"plan is for region {plan.region_code}, not {region.region_code}"
            )
        self.region_ = region
        self.plan_ = plan
        self.unit_side_m_ = unit_site_side(plan.net_area_m2, self.side_rounding)
        return self

    def transform(self, slope: Raster, landuse: Raster | None = None) -> ScreeningResult:
        if not hasattr(self, "region_"):
            raise ValidationError("SiteScreener must be fitted with (region, plan) first")
        return screen_region(
            self.region_, self.plan_, slope, landuse, self._params(), self.n_workers
        )
