"""Affine geo-referencing between pixel indices and projected world coordinates."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import GeoreferenceError


@dataclass(frozen=True)
class AffineTransform:
    """Six-coefficient affine map from (col, row) pixel indices to world meters.

    The forward map is ``x = c + col*a + row*b`` and ``y = f + col*d + row*e``,
    so ``(c, f)`` is the world position of the raster's upper-left corner.
    For axis-aligned north-up rasters ``b = d = 0``, ``a > 0`` and ``e < 0``.
    """

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def __post_init__(self):
        if self.determinant == 0.0:
            raise GeoreferenceError(f"singular affine transform: {self}")

    @property
    def determinant(self) -> float:
        return self.a * self.e - self.b * self.d

    @property
    def is_axis_aligned(self) -> bool:
        return self.b == 0.0 and self.d == 0.0 and self.a > 0.0 and self.e < 0.0

    def translated(self, col_offset: float, row_offset: float) -> "AffineTransform":
        """Transform for a sub-raster whose (0, 0) pixel sits at the given offset."""
        x0, y0 = pixel_to_world(self, col_offset, row_offset)
        return AffineTransform(self.a, self.b, x0, self.d, self.e, y0)


def pixel_to_world(transform: AffineTransform, col: float, row: float) -> tuple[float, float]:
    """World coordinates of a pixel's upper-left corner.

    Indices may be fractional, which is how pixel centers (``col + 0.5``,
    ``row + 0.5``) and lower-right corners are expressed.
    """
    x = transform.c + col * transform.a + row * transform.b
    y = transform.f + col * transform.d + row * transform.e
    return x, y


def world_to_pixel(transform: AffineTransform, x: float, y: float) -> tuple[float, float]:
    """Exact inverse of :func:`pixel_to_world`; returns fractional (col, row)."""
    det = transform.determinant
    if det == 0.0:
        raise GeoreferenceError("cannot invert a singular transform")
    dx = x - transform.c
    dy = y - transform.f
    col = (transform.e * dx - transform.b * dy) / det
    row = (transform.a * dy - transform.d * dx) / det
    return col, row
