"""Two-stage site selection for surplus-electricity-powered mining farms.

Stage 1 picks the profit-maximizing set of administrative regions through an
explicit cost-benefit model; stage 2 screens 30 m slope and land-use rasters
inside the chosen regions and emits constructible candidate-site polygons.
"""

from .economics import (
    CostParams,
    EconomicParams,
    LayoutParams,
    MinerSpec,
    NetworkSnapshot,
    RegionPlan,
    build_region_plan,
)
from .geodata import (
    AffineTransform,
    Raster,
    RegionRecord,
    load_raster,
    load_regions,
    mask_clip,
    pixel_to_world,
    world_to_pixel,
)
from .stage1 import RegionSelector, SelectionResult, select_optimal
from .stage2 import CandidateSite, ScreeningParams, ScreeningResult, SiteScreener, screen_region

__version__ = "0.1.0"

__all__ = [
    "AffineTransform",
    "CandidateSite",
    "CostParams",
    "EconomicParams",
    "LayoutParams",
    "MinerSpec",
    "NetworkSnapshot",
    "Raster",
    "RegionPlan",
    "RegionRecord",
    "RegionSelector",
    "ScreeningParams",
    "ScreeningResult",
    "SelectionResult",
    "SiteScreener",
    "build_region_plan",
    "load_raster",
    "load_regions",
    "mask_clip",
    "pixel_to_world",
    "screen_region",
    "select_optimal",
    "world_to_pixel",
    "__version__",
]
