"""Input validation helpers shared by the estimators and the pipeline."""

from __future__ import annotations

import math
from typing import Sequence

from .errors import CoRegistrationError, ValidationError
from .geodata.rasters import Raster
from .geodata.regions import RegionRecord

__all__ = ["check_regions", "check_raster", "check_co_registered"]


def check_regions(regions: Sequence[RegionRecord]) -> list[RegionRecord]:
    """Validate a region list: non-empty, proper type, unique codes."""
    regions = list(regions)
    if not regions:
        raise ValidationError("expected at least one region")
    for r in regions:
        if not isinstance(r, RegionRecord):
            raise ValidationError(f"expected RegionRecord, got {type(r).__name__}")
    codes = [r.region_code for r in regions]
    dupes = sorted({c for c in codes if codes.count(c) > 1})
    if dupes:
        raise ValidationError(f"duplicate region codes: {', '.join(dupes)}")
    return regions


def check_raster(raster: Raster, require_axis_aligned: bool = True) -> Raster:
    if not isinstance(raster, Raster):
        raise ValidationError(f"expected Raster, got {type(raster).__name__}")
    if require_axis_aligned and not raster.transform.is_axis_aligned:
        raise ValidationError("raster must be axis-aligned north-up")
    return raster


def check_co_registered(a: Raster, b: Raster, tol: float = 1e-6) -> None:
    """Require two rasters to share grid, transform, and dimensions."""
    if (a.width, a.height) != (b.width, b.height):
        raise CoRegistrationError(
            f"raster dimensions differ: {(a.width, a.height)} vs {(b.width, b.height)}"
        )
    ta, tb = a.transform, b.transform
    for name in ("a", "b", "c", "d", "e", "f"):
        if not math.isclose(getattr(ta, name), getattr(tb, name), rel_tol=0, abs_tol=tol):
            raise CoRegistrationError(
                f"raster transforms differ in coefficient {name}: "
                f"{getattr(ta, name)} vs {getattr(tb, name)}"
            )
