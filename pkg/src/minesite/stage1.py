"""Areal-level optimal region selection.

For each candidate set size K the search proposes a region combination,
applies the full cost adjustment (annualized land plus infrastructure), and
keeps the K with the highest adjusted net profit. Two proposal modes exist:

* ``additive`` ranks regions by standalone net contribution and takes the
  top K — fast, exact whenever costs are separable per region;
* ``exhaustive`` enumerates every K-subset of a surplus-prefiltered pool and
  is optimal within that pool by construction.

Ties resolve toward smaller K, then lexicographically smaller region codes,
so results are deterministic regardless of evaluation order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

from sklearn.base import BaseEstimator

from .economics import EconomicParams, RegionPlan, build_region_plan, infra_cost_annual, land_cost_annual
from .errors import DataError, ValidationError
from .geodata.regions import RegionRecord
from .validation import check_regions

MODES = ("additive", "exhaustive")
DEFAULT_PREFILTER_M = 20

__all__ = [
    "CandidateSet",
    "AdjustedProfit",
    "PerKRow",
    "SelectionResult",
    "initial_optimize",
    "adjust_profit",
    "select_optimal",
    "RegionSelector",
]


@dataclass(frozen=True)
class CandidateSet:
    """A proposed set of K regions with its pre-cost-adjustment economics."""

    k: int
    regions: tuple[str, ...]
    plans: tuple[RegionPlan, ...]
    gross_profit_usd: float
    total_mw: float

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("a candidate set needs at least one region")
        if len(self.regions) != self.k:
            raise ValidationError(f"candidate set size {len(self.regions)} != k={self.k}")
        if len(set(self.regions)) != len(self.regions):
            raise ValidationError(f"duplicate region codes in candidate set: {self.regions}")
        margin = sum(p.gross_margin_usd for p in self.plans)
        if not math.isclose(margin, self.gross_profit_usd, rel_tol=1e-9, abs_tol=1e-6):
            raise ValidationError(
                f"gross profit {self.gross_profit_usd} inconsistent with plans ({margin})"
            )


class AdjustedProfit(NamedTuple):
    land_cost_usd: float
    infra_cost_usd: float
    pi_adj_usd: float


@dataclass(frozen=True)
class PerKRow:
    """One row of the profit-versus-K table."""

    k: int
    regions: tuple[str, ...]
    pi_orig_usd: float
    land_cost_usd: float
    infra_cost_usd: float
    pi_adj_usd: float


@dataclass(frozen=True)
class SelectionResult:
    k_star: int
    regions_star: tuple[str, ...]
    pi_max_usd: float
    per_k_table: tuple[PerKRow, ...]
    warning: str | None = None

    def __post_init__(self):
        best = max(row.pi_adj_usd for row in self.per_k_table)
        if self.pi_max_usd != best:
            raise ValidationError(
                f"pi_max {self.pi_max_usd} is not the table maximum {best}"
            )
        winner = next(row for row in self.per_k_table if row.k == self.k_star)
        if winner.regions != self.regions_star:
            raise ValidationError("regions_star does not match its table row")


def _sorted_plans(
    regions: Sequence[RegionRecord], params: EconomicParams
) -> dict[str, RegionPlan]:
    """Plans keyed by code, in lexicographic code order for stable float sums."""
    return {r.region_code: build_region_plan(r, params) for r in sorted(regions, key=lambda r: r.region_code)}


def _candidate_from_codes(
    codes: Iterable[str], plans: Mapping[str, RegionPlan]
) -> CandidateSet:
    ordered = tuple(sorted(codes))
    selected = tuple(plans[c] for c in ordered)
    return CandidateSet(
        k=len(ordered),
        regions=ordered,
        plans=selected,
        gross_profit_usd=sum(p.gross_margin_usd for p in selected),
        total_mw=sum(p.power_mw for p in selected),
    )


def _standalone_net(plan: RegionPlan, params: EconomicParams) -> float:
    """A region's net contribution under costs that attribute linearly."""
    variable_capex_share = (
        plan.power_mw * params.costs.variable_capex_per_mw_usd / params.costs.infra_lifetime_years
    )
    return plan.gross_margin_usd - plan.annual_land_cost_usd - variable_capex_share


def _prefilter_pool(
    regions: Sequence[RegionRecord], prefilter_m: int | None
) -> list[RegionRecord]:
    """Top-M regions by surplus; ties toward lexicographically smaller codes."""
    ranked = sorted(regions, key=lambda r: (-r.annual_surplus_kwh, r.region_code))
    if prefilter_m is not None:
        ranked = ranked[:prefilter_m]
    return ranked


def initial_optimize(
    regions: Sequence[RegionRecord],
    k: int,
    params: EconomicParams,
    mode: str = "exhaustive",
    prefilter_m: int | None = DEFAULT_PREFILTER_M,
) -> CandidateSet:
    """Propose the K-region set for one candidate size.

    Additive mode ranks by standalone net contribution (revenue minus
    depreciation, land cost, and the region's variable-CAPEX share) and takes
    the top K. Exhaustive mode returns the K-subset of the surplus-prefiltered
    pool with the highest fully adjusted profit.
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    if not 1 <= k <= len(regions):
        raise ValidationError(f"k must be in [1, {len(regions)}], got {k}")
    plans = _sorted_plans(regions, params)

    if mode == "additive":
        ranked = sorted(
            plans.values(), key=lambda p: (-_standalone_net(p, params), p.region_code)
        )
        return _candidate_from_codes([p.region_code for p in ranked[:k]], plans)

    pool = _prefilter_pool(regions, prefilter_m)
    if k > len(pool):
        raise ValidationError(
            f"k={k} exceeds the prefiltered pool of {len(pool)} regions"
        )
    land_prices = {r.region_code: r.land_price_krw_m2 for r in regions}
    pool_codes = sorted(r.region_code for r in pool)
    best: CandidateSet | None = None
    best_pi = -math.inf
    for combo in itertools.combinations(pool_codes, k):
        cset = _candidate_from_codes(combo, plans)
        adjusted = adjust_profit(cset, land_prices, params)
        if adjusted.pi_adj_usd > best_pi:
            best, best_pi = cset, adjusted.pi_adj_usd
    assert best is not None
    return best


def adjust_profit(
    cset: CandidateSet,
    land_prices: Mapping[str, float],
    params: EconomicParams,
) -> AdjustedProfit:
    """Apply land and infrastructure costs to a candidate set's gross profit."""
    if cset.k < 1:
        raise ValidationError("cannot adjust an empty candidate set")
    land_total = 0.0
    for plan in cset.plans:
        if plan.region_code not in land_prices:
            raise DataError(f"no land price for region {plan.region_code}")
        land_total += land_cost_annual(
            plan.gross_area_m2, land_prices[plan.region_code], params.costs
        )
    infra = infra_cost_annual(
        cset.total_mw,
        cset.k,
        params.costs,
        per_site_mw=[p.power_mw for p in cset.plans],
    )
    return AdjustedProfit(
        land_cost_usd=land_total,
        infra_cost_usd=infra,
        pi_adj_usd=cset.gross_profit_usd - (land_total + infra),
    )


def select_optimal(
    regions: Sequence[RegionRecord],
    k_max: int,
    params: EconomicParams,
    mode: str = "exhaustive",
    prefilter_m: int | None = DEFAULT_PREFILTER_M,
) -> SelectionResult:
    """Search K = 1..k_max and return the best adjusted profit with the full table."""
    if k_max < 1:
        raise ValidationError(f"k_max must be >= 1, got {k_max}")
    if not regions:
        raise ValidationError("no regions to select from")

    land_prices = {r.region_code: r.land_price_krw_m2 for r in regions}
    pool_size = len(_prefilter_pool(regions, prefilter_m)) if mode == "exhaustive" else len(regions)
    k_cap = min(k_max, pool_size)

    rows: list[PerKRow] = []
    best_row: PerKRow | None = None
    for k in range(1, k_cap + 1):
        cset = initial_optimize(regions, k, params, mode, prefilter_m)
        adjusted = adjust_profit(cset, land_prices, params)
        row = PerKRow(
            k=k,
            regions=cset.regions,
            pi_orig_usd=cset.gross_profit_usd,
            land_cost_usd=adjusted.land_cost_usd,
            infra_cost_usd=adjusted.infra_cost_usd,
            pi_adj_usd=adjusted.pi_adj_usd,
        )
        rows.append(row)
        if best_row is None or row.pi_adj_usd > best_row.pi_adj_usd:
            best_row = row

    warning = None
    if all(r.annual_surplus_kwh == 0 for r in regions):
        warning = "all regions have zero surplus; selection reflects fixed costs only"
    return SelectionResult(
        k_star=best_row.k,
        regions_star=best_row.regions,
        pi_max_usd=best_row.pi_adj_usd,
        per_k_table=tuple(rows),
        warning=warning,
    )


class RegionSelector(BaseEstimator):
    """Estimator wrapper around the region-set search.

    Follows the scikit-learn protocol so selections compose with ``clone``,
    ``get_params``/``set_params``, and parameter sweep tooling: construct with
    parameters, ``fit`` on a sequence of :class:`RegionRecord`, then read the
    fitted attributes.

    Attributes (after ``fit``)
    --------------------------
    result_ : SelectionResult
    k_star_ : int
    regions_star_ : tuple[str, ...]
    pi_max_usd_ : float
    per_k_table_ : tuple[PerKRow, ...]
    plans_ : dict[str, RegionPlan]
        Deployment plan for every input region, keyed by region code.
    """

    def __init__(
        self,
        params: EconomicParams | None = None,
        k_max: int = 5,
        mode: str = "exhaustive",
        prefilter_m: int | None = DEFAULT_PREFILTER_M,
    ):
        self.params = params
        self.k_max = k_max
        self.mode = mode
        self.prefilter_m = prefilter_m

    def fit(self, regions: Sequence[RegionRecord], y=None) -> "RegionSelector":
        regions = check_regions(regions)
        params = self.params if self.params is not None else EconomicParams()
        self.result_ = select_optimal(regions, self.k_max, params, self.mode, self.prefilter_m)
        self.k_star_ = self.result_.k_star
        self.regions_star_ = self.result_.regions_star
        self.pi_max_usd_ = self.result_.pi_max_usd
        self.per_k_table_ = self.result_.per_k_table
        self.plans_ = _sorted_plans(regions, params)
        return self

    def selected_plans(self) -> tuple[RegionPlan, ...]:
        """Plans for the winning regions, in region-code order."""
        return tuple(self.plans_[code] for code in self.regions_star_)
