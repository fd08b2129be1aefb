"""Clip a raster to an administrative boundary polygon."""

from __future__ import annotations

import math

import numpy as np
import shapely
from shapely.geometry.base import BaseGeometry

from ..errors import EmptyExtentError, GeoreferenceError
from .rasters import Raster

__all__ = ["mask_clip"]


def mask_clip(raster: Raster, boundary: BaseGeometry) -> Raster:
    """Crop to the boundary's bounding box and null out exterior pixels.

    A pixel survives when its center lies inside the polygon (or exactly on
    its boundary); every other pixel in the crop window is set to the
    raster's nodata value. The crop window is the intersection of the
    polygon's bounding box with the raster extent, snapped outward to whole
    pixels, so surviving pixels keep their world coordinates exactly.
    """
    t = raster.transform
    if not t.is_axis_aligned:
        raise GeoreferenceError("mask_clip requires an axis-aligned north-up raster")
    if boundary.is_empty or boundary.area <= 0:
        raise EmptyExtentError("boundary polygon is empty")

    minx, miny, maxx, maxy = boundary.bounds
    # Row/col window covering the bbox (e < 0: larger y means smaller row).
    col0 = math.floor((minx - t.c) / t.a)
    col1 = math.ceil((maxx - t.c) / t.a)
    row0 = math.floor((maxy - t.f) / t.e)
    row1 = math.ceil((miny - t.f) / t.e)
    col0, col1 = max(col0, 0), min(col1, raster.width)
    row0, row1 = max(row0, 0), min(row1, raster.height)
    if col0 >= col1 or row0 >= row1:
        raise EmptyExtentError("boundary polygon does not overlap the raster extent")

    values = np.array(raster.values[row0:row1, col0:col1], dtype=np.float32)
    height, width = values.shape

    cols = np.arange(col0, col1, dtype=np.float64) + 0.5
    rows = np.arange(row0, row1, dtype=np.float64) + 0.5
    xs = t.c + cols * t.a
    ys = t.f + rows * t.e
    gx, gy = np.meshgrid(xs, ys)
    inside = shapely.intersects_xy(boundary, gx.ravel(), gy.ravel()).reshape(height, width)
    values[~inside] = np.float32(raster.nodata)

    return Raster(
        width=width,
        height=height,
        resolution=raster.resolution,
        transform=t.translated(col0, row0),
        nodata=raster.nodata,
        values=values,
    )
