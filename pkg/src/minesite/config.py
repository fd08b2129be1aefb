"""Run configuration: a single declarative YAML file with full defaults.

``minesite config init`` dumps the default file; every field can be edited in
place. Relative input paths are resolved against the config file's directory.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import yaml

from .economics import CostParams, EconomicParams, LayoutParams, MinerSpec, NetworkSnapshot
from .errors import ConfigError, ValidationError
from .stage2 import ScreeningParams

__all__ = [
    "RunConfig",
    "SweepSpec",
    "load_config",
    "default_config_yaml",
    "config_hash",
    "sweepable_parameters",
    "apply_sweep_value",
]

_PARAM_SECTIONS = {
    "miner": MinerSpec,
    "network": NetworkSnapshot,
    "layout": LayoutParams,
    "costs": CostParams,
}


def sweepable_parameters() -> dict[str, str]:
    """Numeric economic parameters by name -> owning section."""
    out: dict[str, str] = {}
    for section, cls in _PARAM_SECTIONS.items():
        for f in fields(cls):
            if f.type in ("float", "int"):
                out[f.name] = section
    return out


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sensitivity sweep over a numeric economic parameter."""

    parameter: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        known = sweepable_parameters()
        if self.parameter not in known:
            raise ConfigError(
                f"sweep.parameter: unknown parameter {self.parameter!r}; "
                f"sweepable fields: {', '.join(sorted(known))}"
            )
        if self.steps < 2:
            raise ConfigError(f"sweep.steps: must be >= 2, got {self.steps}")

    def values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


def apply_sweep_value(params: EconomicParams, parameter: str, value: float) -> EconomicParams:
    """EconomicParams with one named numeric field replaced."""
    section = sweepable_parameters().get(parameter)
    if section is None:
        raise ConfigError(f"unknown sweep parameter {parameter!r}")
    block = getattr(params, section)
    if isinstance(getattr(block, parameter), int):
        value = int(round(value))
    return replace(params, **{section: replace(block, **{parameter: value})})


@dataclass(frozen=True)
class RunConfig:
    areal_csv: Path
    geometry: Path
    slope_raster: Path
    landuse_raster: Path | None = None
    output_dir: Path = Path("out")
    k_max: int = 5
    mode: str = "exhaustive"
    prefilter_m: int = 20
    economics: EconomicParams = field(default_factory=EconomicParams)
    screening: ScreeningParams = field(default_factory=ScreeningParams)
    sweep: SweepSpec | None = None

    def __post_init__(self):
        if self.k_max < 1:
            raise ConfigError(f"k_max: must be >= 1, got {self.k_max}")
        if self.mode not in ("additive", "exhaustive"):
            raise ConfigError(f"mode: must be 'additive' or 'exhaustive', got {self.mode!r}")
        if self.prefilter_m is not None and self.prefilter_m < 1:
            raise ConfigError(f"prefilter_m: must be >= 1, got {self.prefilter_m}")

    def validate_paths(self) -> None:
        """Every referenced input must exist before a run starts."""
        for name in ("areal_csv", "geometry", "slope_raster", "landuse_raster"):
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise ConfigError(f"inputs.{name}: path does not exist: {path}")
        if (
            self.screening.allowed_landuse_codes is not None
            and self.landuse_raster is None
        ):
            raise ConfigError(
                "screening.allowed_landuse_codes is set but inputs.landuse_raster is missing"
            )

    def semantic_dict(self) -> dict:
        """Everything that affects results; excludes the output location."""
        return {
            "inputs": {
                "areal_csv": str(self.areal_csv),
                "geometry": str(self.geometry),
                "slope_raster": str(self.slope_raster),
                "landuse_raster": None if self.landuse_raster is None else str(self.landuse_raster),
            },
            "k_max": self.k_max,
            "mode": self.mode,
            "prefilter_m": self.prefilter_m,
            "miner": dataclasses.asdict(self.economics.miner),
            "network": dataclasses.asdict(self.economics.network),
            "layout": dataclasses.asdict(self.economics.layout),
            "costs": dataclasses.asdict(self.economics.costs),
            "screening": {
                "max_slope_deg": self.screening.max_slope_deg,
                "stride_m": self.screening.stride_m,
                "side_rounding": self.screening.side_rounding,
                "allowed_landuse_codes": (
                    None
                    if self.screening.allowed_landuse_codes is None
                    else sorted(self.screening.allowed_landuse_codes)
                ),
            },
            "sweep": None if self.sweep is None else dataclasses.asdict(self.sweep),
        }


def config_hash(config: RunConfig) -> str:
    canonical = json.dumps(config.semantic_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _check_keys(section: str, data: dict, allowed: set[str]) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{section}: unknown key(s): {', '.join(unknown)}")


def _coerce(section: str, name: str, annotation: str, value):
    # YAML 1.1 reads "1.0e6" as a string (no sign in the exponent), so
    # numeric fields coerce explicitly and report their field path.
    try:
        if annotation == "float":
            return float(value)
        if annotation == "int":
            return int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}.{name}: expected a number, got {value!r}") from exc
    return value


def _build_section(section: str, cls, data: dict):
    annotations = {f.name: f.type for f in fields(cls)}
    _check_keys(section, data, set(annotations))
    coerced = {k: _coerce(section, k, annotations[k], v) for k, v in data.items()}
    try:
        return cls(**coerced)
    except ValidationError as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a YAML run config; paths resolve against its folder."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")

    _check_keys(
        "config",
        raw,
        {"inputs", "output_dir", "k_max", "mode", "prefilter_m", "screening", "sweep"}
        | set(_PARAM_SECTIONS),
    )

    inputs = raw.get("inputs") or {}
    if not isinstance(inputs, dict):
        raise ConfigError("inputs: must be a mapping")
    _check_keys("inputs", inputs, {"areal_csv", "geometry", "slope_raster", "landuse_raster"})
    for required in ("areal_csv", "geometry", "slope_raster"):
        if not inputs.get(required):
            raise ConfigError(f"inputs.{required}: missing required path")

    base = path.parent

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    economics = EconomicParams(
        **{
            section: _build_section(section, cls, raw.get(section) or {})
            for section, cls in _PARAM_SECTIONS.items()
        }
    )

    screening_raw = dict(raw.get("screening") or {})
    _check_keys(
        "screening",
        screening_raw,
        {"max_slope_deg", "stride_m", "side_rounding", "allowed_landuse_codes"},
    )
    codes = screening_raw.pop("allowed_landuse_codes", None)
    if codes is not None and not isinstance(codes, (list, tuple)):
        raise ConfigError("screening.allowed_landuse_codes: must be a list of integer codes")
    screening = _build_section(
        "screening",
        ScreeningParams,
        {
            **screening_raw,
            "allowed_landuse_codes": frozenset(int(c) for c in codes) if codes else None,
        },
    )

    sweep = None
    if raw.get("sweep"):
        sweep_raw = raw["sweep"]
        _check_keys("sweep", sweep_raw, {"parameter", "start", "stop", "steps"})
        for key in ("parameter", "start", "stop", "steps"):
            if key not in sweep_raw:
                raise ConfigError(f"sweep.{key}: missing")
        sweep = SweepSpec(
            parameter=str(sweep_raw["parameter"]),
            start=float(sweep_raw["start"]),
            stop=float(sweep_raw["stop"]),
            steps=int(sweep_raw["steps"]),
        )

    return RunConfig(
        areal_csv=resolve(inputs["areal_csv"]),
        geometry=resolve(inputs["geometry"]),
        slope_raster=resolve(inputs["slope_raster"]),
        landuse_raster=resolve(inputs["landuse_raster"]) if inputs.get("landuse_raster") else None,
        output_dir=resolve(raw.get("output_dir", "out")),
        k_max=int(raw.get("k_max", 5)),
        mode=str(raw.get("mode", "exhaustive")),
        prefilter_m=int(raw.get("prefilter_m", 20)),
        economics=economics,
        screening=screening,
        sweep=sweep,
    )


def default_config_yaml(
    areal_csv: str = "regions.csv",
    geometry: str = "regions.geojson",
    slope_raster: str = "slope.tif",
    landuse_raster: str | None = None,
) -> str:
    """The full default config as a commented, editable YAML document."""
    e = EconomicParams()
    s = ScreeningParams()
    landuse_line = (
        f"  landuse_raster: {landuse_raster}" if landuse_raster else "  # landuse_raster: landuse.tif"
    )
    return f"""\
# minesite run configuration. All monetary values are USD unless the key
# says otherwise; land prices are KRW/m2 and convert at costs.fx_krw_per_usd.
inputs:
  areal_csv: {areal_csv}
  geometry: {geometry}
  slope_raster: {slope_raster}
{landuse_line}
output_dir: out

# Region-set search.
k_max: 5
mode: exhaustive        # additive | exhaustive
prefilter_m: 20         # exhaustive search pool: top-M regions by surplus

miner:
  power_kw: {e.miner.power_kw}
  hashrate_ths: {e.miner.hashrate_ths}
  capex_per_unit: {e.miner.capex_per_unit}
  lifetime_years: {e.miner.lifetime_years}

network:
  network_hashrate_ths: {e.network.network_hashrate_ths}
  block_reward_btc: {e.network.block_reward_btc}
  btc_price_usd: {e.network.btc_price_usd}
  blocks_per_year: {e.network.blocks_per_year}

layout:
  miners_per_container: {e.layout.miners_per_container}
  area_per_container_m2: {e.layout.area_per_container_m2}
  margin_ratio: {e.layout.margin_ratio}
  gross_area_m2_per_mw: {e.layout.gross_area_m2_per_mw}

costs:
  market_multiplier: {e.costs.market_multiplier}
  land_amort_years: {e.costs.land_amort_years}
  fixed_capex_per_site_usd: {e.costs.fixed_capex_per_site_usd}
  variable_capex_per_mw_usd: {e.costs.variable_capex_per_mw_usd}
  grid_fee_usd: {e.costs.grid_fee_usd}
  grid_block_mw: {e.costs.grid_block_mw}
  infra_lifetime_years: {e.costs.infra_lifetime_years}
  fixed_opex_per_site_usd: {e.costs.fixed_opex_per_site_usd}
  energy_price_usd_per_kwh: {e.costs.energy_price_usd_per_kwh}
  fx_krw_per_usd: {e.costs.fx_krw_per_usd}
  grid_fee_scope: {e.costs.grid_fee_scope}   # pooled | per_site

screening:
  max_slope_deg: {s.max_slope_deg}
  stride_m: {s.stride_m}
  side_rounding: {s.side_rounding}   # ceil_int | ceil_mult5
  allowed_landuse_codes: []          # empty = keep everything

# Optional sensitivity sweep (used by the `sweep` subcommand):
# sweep:
#   parameter: fixed_opex_per_site_usd
#   start: 1.0e6
#   stop: 1.0e7
#   steps: 10
"""
