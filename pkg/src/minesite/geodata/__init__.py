from .masking import mask_clip
from .rasters import Raster, RasterStats, load_raster, write_ascii_grid
from .regions import Exclusion, RegionDataset, RegionRecord, load_regions
from .transforms import AffineTransform, pixel_to_world, world_to_pixel

__all__ = [
    "AffineTransform",
    "Exclusion",
    "Raster",
    "RasterStats",
    "RegionDataset",
    "RegionRecord",
    "load_raster",
    "load_regions",
    "mask_clip",
    "pixel_to_world",
    "world_to_pixel",
    "write_ascii_grid",
]
