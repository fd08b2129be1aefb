"""Gridded slope / land-use rasters: the in-memory type and file loaders.

Supported on-disk formats:

* single-band GeoTIFF, geo-referenced through the standard pixel-scale +
  tie-point tags (or a full model transformation matrix), nodata from the
  ``GDAL_NODATA`` tag;
* ESRI ASCII grid with the NCOLS/NROWS/XLLCORNER/YLLCORNER/CELLSIZE/
  NODATA_VALUE header, which is human-writable and used for fixtures.

All geo-referencing must already be in a projected CRS in meters; no
reprojection is performed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tifffile

from ..errors import GeoreferenceError, InputIOError, ParseError, ValidationError
from .transforms import AffineTransform

DEFAULT_NODATA = -9999.0

# GeoTIFF / GDAL tag codes
_TAG_MODEL_PIXEL_SCALE = 33550
_TAG_MODEL_TIEPOINT = 33922
_TAG_MODEL_TRANSFORMATION = 34264
_TAG_GDAL_NODATA = 42113

_ASCII_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


@dataclass(frozen=True)
class RasterStats:
    min: float
    max: float
    mean: float
    valid_count: int


@dataclass(frozen=True)
class Raster:
    """A geo-referenced grid of float32 values.

    ``values`` is ``(height, width)``; cells equal to ``nodata`` carry no
    measurement. The array is frozen after construction so instances can be
    shared across threads.
    """

    width: int
    height: int
    resolution: float
    transform: AffineTransform
    nodata: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 2:
            raise ValidationError(f"raster values must be 2-D, got {values.ndim}-D")
        if values.shape != (self.height, self.width):
            raise ValidationError(
                f"values shape {values.shape} does not match (height, width)="
                f"({self.height}, {self.width})"
            )
        if self.resolution <= 0:
            raise ValidationError(f"resolution must be positive, got {self.resolution}")
        t = self.transform
        if t.is_axis_aligned and not (
            math.isclose(t.a, self.resolution, rel_tol=1e-9)
            and math.isclose(-t.e, self.resolution, rel_tol=1e-9)
        ):
            raise GeoreferenceError(
                f"transform pixel size ({t.a}, {-t.e}) disagrees with resolution {self.resolution}"
            )
        if values.flags.writeable:
            values = values.copy()
            values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def valid_mask(self) -> np.ndarray:
        return (self.values != np.float32(self.nodata)) & np.isfinite(self.values)

    def stats(self) -> RasterStats:
        """Min/max/mean over valid cells; nodata cells are excluded."""
        valid = self.values[self.valid_mask]
        if valid.size == 0:
            return RasterStats(math.nan, math.nan, math.nan, 0)
        return RasterStats(
            min=float(valid.min()),
            max=float(valid.max()),
            mean=float(valid.mean(dtype=np.float64)),
            valid_count=int(valid.size),
        )

    def bounds(self) -> tuple[float, float, float, float]:
        """(minx, miny, maxx, maxy) of the raster extent in world meters."""
        from .transforms import pixel_to_world

        x0, y0 = pixel_to_world(self.transform, 0, 0)
        x1, y1 = pixel_to_world(self.transform, self.width, self.height)
        return min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1)


def load_raster(path: str | Path) -> Raster:
    """Load a GeoTIFF or ESRI ASCII grid, sniffing the format from content."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            magic = fh.read(4)
    except OSError as exc:
        raise InputIOError(f"cannot read raster {path}: {exc}") from exc
    if magic[:2] in (b"II", b"MM"):
        return _load_geotiff(path)
    return _load_ascii_grid(path)


def _load_geotiff(path: Path) -> Raster:
    def tag_value(tags, code):
        tag = tags.get(code)
        return None if tag is None else tag.value

    try:
        with tifffile.TiffFile(path) as tif:
            page = tif.pages[0]
            values = page.asarray()
            scale = tag_value(page.tags, _TAG_MODEL_PIXEL_SCALE)
            tiepoint = tag_value(page.tags, _TAG_MODEL_TIEPOINT)
            matrix = tag_value(page.tags, _TAG_MODEL_TRANSFORMATION)
            nodata_tag = tag_value(page.tags, _TAG_GDAL_NODATA)
    except (tifffile.TiffFileError, ValueError) as exc:
        raise InputIOError(f"cannot read GeoTIFF {path}: {exc}") from exc

    if values.ndim == 3 and values.shape[2] == 1:
        values = values[:, :, 0]
    if values.ndim != 2:
        raise InputIOError(f"{path}: expected a single-band raster, got shape {values.shape}")

    transform = _geotiff_transform(path, scale, tiepoint, matrix)
    nodata = DEFAULT_NODATA
    if nodata_tag is not None:
        try:
            nodata = float(str(nodata_tag).strip().rstrip("\x00"))
        except ValueError as exc:
            raise GeoreferenceError(f"{path}: unparseable GDAL_NODATA tag: {nodata_tag!r}") from exc

    height, width = values.shape
    return Raster(
        width=width,
        height=height,
        resolution=abs(transform.a),
        transform=transform,
        nodata=nodata,
        values=values.astype(np.float32),
    )


def _geotiff_transform(path: Path, scale, tiepoint, matrix) -> AffineTransform:
    if matrix is not None:
        if len(matrix) != 16:
            raise GeoreferenceError(f"{path}: model transformation tag must hold 16 values")
        m = matrix
        return AffineTransform(a=m[0], b=m[1], c=m[3], d=m[4], e=m[5], f=m[7])
    if scale is None or tiepoint is None:
        raise GeoreferenceError(
            f"{path}: missing geo-reference (no pixel-scale/tie-point or transformation tags)"
        )
    sx, sy = scale[0], scale[1]
    i, j, _, x, y, _ = tiepoint[:6]
    if sx <= 0 or sy <= 0:
        raise GeoreferenceError(f"{path}: non-positive pixel scale ({sx}, {sy})")
    if not math.isclose(sx, sy, rel_tol=1e-9):
        raise GeoreferenceError(f"{path}: non-square pixels ({sx} x {sy}) are not supported")
    # Tie point: pixel (i, j) maps to world (x, y).
    return AffineTransform(a=sx, b=0.0, c=x - i * sx, d=0.0, e=-sy, f=y + j * sy)


def _load_ascii_grid(path: Path) -> Raster:
    try:
        text_lines = path.read_text().splitlines()
    except OSError as exc:
        raise InputIOError(f"cannot read raster {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise InputIOError(f"{path} is neither a TIFF nor an ASCII grid") from exc

    header: dict[str, float] = {}
    data_start = 0
    for lineno, line in enumerate(text_lines, start=1):
        parts = line.split()
        if not parts:
            data_start = lineno
            continue
        key = parts[0].lower()
        if key in _ASCII_HEADER_KEYS:
            if len(parts) != 2:
                raise ParseError(f"malformed header entry {line!r}", line=lineno)
            try:
                header[key] = float(parts[1])
            except ValueError as exc:
                raise ParseError(f"non-numeric header value in {line!r}", line=lineno) from exc
            data_start = lineno
        elif _is_number(parts[0]):
            break
        else:
            raise ParseError(f"unrecognized header key {parts[0]!r}", line=lineno)

    missing = [k for k in _ASCII_HEADER_KEYS[:5] if k not in header]
    if missing:
        raise GeoreferenceError(f"{path}: ASCII grid header missing {', '.join(missing).upper()}")

    ncols = int(header["ncols"])
    nrows = int(header["nrows"])
    cellsize = header["cellsize"]
    nodata = header.get("nodata_value", DEFAULT_NODATA)
    if ncols <= 0 or nrows <= 0 or cellsize <= 0:
        raise ParseError(f"{path}: NCOLS/NROWS/CELLSIZE must be positive")

    flat: list[float] = []
    for lineno, line in enumerate(text_lines[data_start:], start=data_start + 1):
        for token in line.split():
            try:
                flat.append(float(token))
            except ValueError as exc:
                raise ParseError(f"non-numeric cell value {token!r}", line=lineno) from exc
    if len(flat) != nrows * ncols:
        raise ParseError(f"{path}: expected {nrows * ncols} cell values, found {len(flat)}")

    values = np.asarray(flat, dtype=np.float32).reshape(nrows, ncols)
    transform = AffineTransform(
        a=cellsize,
        b=0.0,
        c=header["xllcorner"],
        d=0.0,
        e=-cellsize,
        f=header["yllcorner"] + nrows * cellsize,
    )
    return Raster(
        width=ncols,
        height=nrows,
        resolution=cellsize,
        transform=transform,
        nodata=nodata,
        values=values,
    )


def write_ascii_grid(raster: Raster, path: str | Path, cell_format: str = "%.6g") -> None:
    """Write a raster as an ESRI ASCII grid (fixtures and small exports)."""
    t = raster.transform
    if not t.is_axis_aligned:
        raise GeoreferenceError("only axis-aligned rasters can be written as ASCII grids")
    yll = t.f + raster.height * t.e
    lines = [
        f"NCOLS {raster.width}",
        f"NROWS {raster.height}",
        f"XLLCORNER {t.c:.6f}",
        f"YLLCORNER {yll:.6f}",
        f"CELLSIZE {raster.resolution:.6f}",
        f"NODATA_VALUE {raster.nodata:g}",
    ]
    for row in raster.values:
        lines.append(" ".join(cell_format % v for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True
