"""Pipeline orchestration: ingest, stage 1, stage 2, sweep, and artifacts.

All writers use fixed formatting (USD to 2 decimals, coordinates to 6) and
stable orderings so identical configs produce byte-identical CSV/GeoJSON.
The machine-readable selection JSON keeps full float precision.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from sklearn.base import clone

from .config import RunConfig, apply_sweep_value, config_hash
from .errors import ConfigError, DataError, InputIOError
from .geodata.rasters import Raster, load_raster
from .geodata.regions import RegionDataset, load_regions
from .stage1 import PerKRow, RegionSelector, SelectionResult
from .stage2 import ScreeningResult, SiteScreener
from .economics import build_region_plan

logger = logging.getLogger(__name__)

__all__ = ["run_stage1", "run_stage2", "run_pipeline", "run_sweep", "RunManifest"]


def _usd(x: float) -> str:
    return f"{x:.2f}"


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class StageRecord:
    name: str
    status: str = "pending"
    seconds: float = 0.0
    outputs: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


@dataclass
class RunManifest:
    config_path: str
    config_hash: str
    created_utc: str = field(default_factory=_utc_now)
    inputs: dict[str, dict] = field(default_factory=dict)
    stages: list[StageRecord] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def add_inputs(self, config: RunConfig) -> None:
        for name in ("areal_csv", "geometry", "slope_raster", "landuse_raster"):
            path = getattr(config, name)
            if path is None:
                continue
            self.inputs[name] = {"path": str(path), "sha256": _sha256(Path(path))}

    def write(self, path: Path) -> None:
        payload = {
            "created_utc": self.created_utc,
            "config_path": self.config_path,
            "config_hash": self.config_hash,
            "inputs": self.inputs,
            "stages": [
                {
                    "name": s.name,
                    "status": s.status,
                    "seconds": round(s.seconds, 3),
                    "outputs": s.outputs,
                    "warnings": s.warnings,
                }
                for s in self.stages
            ],
            "warnings": self.warnings,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_region_dataset(config: RunConfig) -> RegionDataset:
    dataset = load_regions(config.areal_csv, config.geometry)
    if not dataset.records:
        raise DataError("no usable regions after joining surplus, price, and geometry inputs")
    return dataset


# ---------------------------------------------------------------------------
# Stage 1
# ---------------------------------------------------------------------------

def write_per_k_csv(rows: tuple[PerKRow, ...], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["K", "regions", "pi_orig_usd", "land_cost_usd", "infra_cost_usd", "pi_adj_usd"])
        for row in rows:
            writer.writerow(
                [
                    row.k,
                    ";".join(row.regions),
                    _usd(row.pi_orig_usd),
                    _usd(row.land_cost_usd),
                    _usd(row.infra_cost_usd),
                    _usd(row.pi_adj_usd),
                ]
            )


def write_profit_curve_csv(rows: tuple[PerKRow, ...], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["K", "pi_adj_usd"])
        for row in rows:
            writer.writerow([row.k, _usd(row.pi_adj_usd)])


def selection_to_dict(result: SelectionResult) -> dict:
    return {
        "k_star": result.k_star,
        "regions_star": list(result.regions_star),
        "pi_max_usd": result.pi_max_usd,
        "warning": result.warning,
        "per_k_table": [
            {
                "k": row.k,
                "regions": list(row.regions),
                "pi_orig_usd": row.pi_orig_usd,
                "land_cost_usd": row.land_cost_usd,
                "infra_cost_usd": row.infra_cost_usd,
                "pi_adj_usd": row.pi_adj_usd,
            }
            for row in result.per_k_table
        ],
    }


def load_selection_json(path: Path) -> tuple[int, list[str]]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputIOError(f"cannot read selection {path}: {exc}") from exc
    return int(payload["k_star"]), [str(c) for c in payload["regions_star"]]


def run_stage1(config: RunConfig, out_dir: Path) -> tuple[SelectionResult, list[Path]]:
    dataset = _load_region_dataset(config)
    selector = RegionSelector(
        params=config.economics,
        k_max=config.k_max,
        mode=config.mode,
        prefilter_m=config.prefilter_m,
    ).fit(list(dataset.records))
    result = selector.result_

    stage_dir = out_dir / "stage1"
    stage_dir.mkdir(parents=True, exist_ok=True)
    table_path = stage_dir / "per_k_table.csv"
    curve_path = stage_dir / "profit_curve.csv"
    selection_path = stage_dir / "selection.json"
    write_per_k_csv(result.per_k_table, table_path)
    write_profit_curve_csv(result.per_k_table, curve_path)
    selection_path.write_text(
        json.dumps(selection_to_dict(result), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    logger.info(
        "stage1: K*=%d regions=%s pi_max=%s", result.k_star, ",".join(result.regions_star),
        _usd(result.pi_max_usd),
    )
    return result, [table_path, curve_path, selection_path]


# ---------------------------------------------------------------------------
# Stage 2
# ---------------------------------------------------------------------------

def site_feature(site) -> dict:
    minx, miny, maxx, maxy = (round(v, 6) for v in site.bounds)
    ring = [[minx, maxy], [maxx, maxy], [maxx, miny], [minx, miny], [minx, maxy]]
    return {
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [ring]},
        "properties": {
            "region_code": site.region_code,
            "anchor_col": site.anchor_col,
            "anchor_row": site.anchor_row,
            "max_slope_deg": round(site.max_slope_deg, 4),
            "landuse_ok": site.landuse_ok,
        },
    }


def write_sites_geojson(result: ScreeningResult, path: Path) -> None:
    collection = {
        "type": "FeatureCollection",
        "features": [site_feature(s) for s in result.initial],
    }
    path.write_text(json.dumps(collection, sort_keys=True) + "\n", encoding="utf-8")


def write_screening_summary(results: list[ScreeningResult], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["region_code", "initial_count", "available_count", "retention_ratio"])
        for r in sorted(results, key=lambda r: r.region_code):
            writer.writerow(
                [r.region_code, r.initial_count, r.available_count, f"{r.retention_ratio:.6f}"]
            )


def run_stage2(
    config: RunConfig,
    region_codes: list[str],
    out_dir: Path,
    n_workers: int = 1,
) -> tuple[list[ScreeningResult], list[Path]]:
    stage_dir = out_dir / "stage2"
    if not region_codes:
        logger.warning("stage2: empty selection, nothing to screen")
        return [], []

    # Load every raster up front so I/O problems surface before any screening.
    slope = load_raster(config.slope_raster)
    landuse: Raster | None = None
    if config.landuse_raster is not None and config.screening.allowed_landuse_codes is not None:
        landuse = load_raster(config.landuse_raster)

    dataset = _load_region_dataset(config)
    by_code = {r.region_code: r for r in dataset.records}
    missing = sorted(set(region_codes) - set(by_code))
    if missing:
        raise DataError(f"selected region(s) not in the areal dataset: {', '.join(missing)}")

    stage_dir.mkdir(parents=True, exist_ok=True)
    results: list[ScreeningResult] = []
    outputs: list[Path] = []
    screener_proto = SiteScreener(
        max_slope_deg=config.screening.max_slope_deg,
        stride_m=config.screening.stride_m,
        side_rounding=config.screening.side_rounding,
        allowed_landuse_codes=config.screening.allowed_landuse_codes,
        n_workers=n_workers,
    )
    for code in sorted(region_codes):
        region = by_code[code]
        plan = build_region_plan(region, config.economics)
        screener = clone(screener_proto).fit(region, plan)
        result = screener.transform(slope, landuse)
        results.append(result)
        geojson_path = stage_dir / f"sites_{code}.geojson"
        write_sites_geojson(result, geojson_path)
        outputs.append(geojson_path)
        logger.info(
            "stage2: region %s unit %dm window %dpx initial=%d available=%d",
            code, int(result.unit_side_m), result.window_px,
            result.initial_count, result.available_count,
        )

    summary_path = stage_dir / "summary.csv"
    write_screening_summary(results, summary_path)
    outputs.append(summary_path)
    total_initial = sum(r.initial_count for r in results)
    total_available = sum(r.available_count for r in results)
    logger.info("stage2: totals initial=%d available=%d", total_initial, total_available)
    return results, outputs


# ---------------------------------------------------------------------------
# Full pipeline and sweep
# ---------------------------------------------------------------------------

def run_pipeline(config: RunConfig, out_dir: Path, n_workers: int = 1, config_path: str = "") -> RunManifest:
    manifest = RunManifest(config_path=config_path, config_hash=config_hash(config))
    manifest.add_inputs(config)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.json"

    stage1_record = StageRecord(name="stage1")
    manifest.stages.append(stage1_record)
    started = time.perf_counter()
    try:
        selection, stage1_outputs = run_stage1(config, out_dir)
    except Exception:
        stage1_record.status = "failed"
        stage1_record.seconds = time.perf_counter() - started
        manifest.write(manifest_path)
        raise
    stage1_record.status = "complete"
    stage1_record.seconds = time.perf_counter() - started
    stage1_record.outputs = [str(p) for p in stage1_outputs]
    if selection.warning:
        stage1_record.warnings.append(selection.warning)
    if selection.pi_max_usd < 0:
        manifest.warnings.append(
            f"maximum adjusted profit is negative ({_usd(selection.pi_max_usd)} USD)"
        )

    stage2_record = StageRecord(name="stage2")
    manifest.stages.append(stage2_record)
    started = time.perf_counter()
    try:
        _, stage2_outputs = run_stage2(config, list(selection.regions_star), out_dir, n_workers)
    except Exception:
        stage2_record.status = "failed"
        stage2_record.seconds = time.perf_counter() - started
        manifest.write(manifest_path)
        raise
    stage2_record.status = "complete"
    stage2_record.seconds = time.perf_counter() - started
    stage2_record.outputs = [str(p) for p in stage2_outputs]

    manifest.write(manifest_path)
    return manifest


def run_sweep(config: RunConfig, out_dir: Path) -> Path:
    if config.sweep is None:
        raise ConfigError("sweep: no sweep block in the config")
    dataset = _load_region_dataset(config)  # ingested once, reused per step
    regions = list(dataset.records)

    rows = []
    for value in config.sweep.values():
        params = apply_sweep_value(config.economics, config.sweep.parameter, value)
        selector = RegionSelector(
            params=params, k_max=config.k_max, mode=config.mode, prefilter_m=config.prefilter_m
        ).fit(regions)
        rows.append((value, selector.k_star_, selector.pi_max_usd_))
        logger.info(
            "sweep: %s=%s -> K*=%d pi_max=%s",
            config.sweep.parameter, value, selector.k_star_, _usd(selector.pi_max_usd_),
        )

    sweep_dir = out_dir / "sweep"
    sweep_dir.mkdir(parents=True, exist_ok=True)
    path = sweep_dir / "sweep.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parameter", "param_value", "k_star", "pi_max_usd"])
        for value, k_star, pi_max in rows:
            writer.writerow([config.sweep.parameter, f"{value:.6f}", k_star, _usd(pi_max)])
    return path
