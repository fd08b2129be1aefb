"""Monetary model: miner capacity, revenue, depreciation, land and
infrastructure costs for one region or a pooled set of regions.

Dataclass defaults are the baseline assumptions of the study configuration;
every value can be overridden through the run config. All USD amounts are
annual unless a name says otherwise. KRW enters only through land prices and
is converted exactly once, via ``CostParams.fx_krw_per_usd``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError, ValidationError

HOURS_PER_YEAR = 8760

__all__ = [
    "HOURS_PER_YEAR",
    "MinerSpec",
    "NetworkSnapshot",
    "LayoutParams",
    "CostParams",
    "EconomicParams",
    "RegionPlan",
    "miner_capacity",
    "annual_revenue",
    "annual_depreciation",
    "required_net_area",
    "gross_area",
    "land_cost_annual",
    "infra_cost_annual",
    "energy_cost_annual",
    "build_region_plan",
]


@dataclass(frozen=True)
class MinerSpec:
    """One mining machine.

    ``power_kw`` is the electrical draw; the baseline machine draws 4.104 kW
    and therefore consumes 35,951.04 kWh over a year of continuous operation.
    """

    power_kw: float = 4.104
    hashrate_ths: float = 473.0
    capex_per_unit: float = 9_490.0
    lifetime_years: float = 7.0

    def __post_init__(self):
        for name in ("power_kw", "hashrate_ths", "capex_per_unit", "lifetime_years"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"MinerSpec.{name} must be > 0, got {getattr(self, name)}")

    @property
    def annual_energy_kwh(self) -> float:
        return self.power_kw * HOURS_PER_YEAR


@dataclass(frozen=True)
class NetworkSnapshot:
    """Network-wide parameters fixing a machine's expected reward share.

    The default network hashrate is calibrated so the baseline machine earns
    $8,944/year at a $60,000 price and 3.125 BTC reward.
    """

    network_hashrate_ths: float = 521_177_884.61538464
    block_reward_btc: float = 3.125
    btc_price_usd: float = 60_000.0
    blocks_per_year: float = 52_560.0

    def __post_init__(self):
        for name in ("network_hashrate_ths", "block_reward_btc", "btc_price_usd", "blocks_per_year"):
            if getattr(self, name) <= 0:
                raise ValidationError(
                    f"NetworkSnapshot.{name} must be > 0, got {getattr(self, name)}"
                )


@dataclass(frozen=True)
class LayoutParams:
    """Container-based farm layout constants."""

    miners_per_container: int = 210
    area_per_container_m2: float = 51.7
    margin_ratio: float = 0.30
    gross_area_m2_per_mw: float = 2_500.0

    def __post_init__(self):
        if self.miners_per_container <= 0:
            raise ValidationError("LayoutParams.miners_per_container must be > 0")
        if self.area_per_container_m2 <= 0 or self.gross_area_m2_per_mw <= 0:
            raise ValidationError("LayoutParams areas must be > 0")
        if not 0.0 <= self.margin_ratio < 1.0:
            raise ValidationError(
                f"LayoutParams.margin_ratio must be in [0, 1), got {self.margin_ratio}"
            )


@dataclass(frozen=True)
class CostParams:
    """Land and infrastructure cost assumptions.

    ``grid_fee_scope`` selects whether the stepped grid-connection fee is
    charged on pooled capacity across all sites (``"pooled"``, the default)
    or once per site on each site's own capacity (``"per_site"``).
    """

    market_multiplier: float = 1.3
    land_amort_years: float = 20.0
    fixed_capex_per_site_usd: float = 5_000_000.0
    variable_capex_per_mw_usd: float = 400_000.0
    grid_fee_usd: float = 1_200_000.0
    grid_block_mw: float = 10.0
    infra_lifetime_years: float = 7.0
    fixed_opex_per_site_usd: float = 3_000_000.0
    energy_price_usd_per_kwh: float = 0.0
    fx_krw_per_usd: float = 1_350.0
    grid_fee_scope: str = "pooled"

    def __post_init__(self):
        if self.land_amort_years < 1 or self.infra_lifetime_years < 1:
            raise ValidationError("CostParams amortization periods must be >= 1 year")
        if self.market_multiplier < 1:
            raise ValidationError(
                f"CostParams.market_multiplier must be >= 1, got {self.market_multiplier}"
            )
        if self.energy_price_usd_per_kwh < 0:
            raise ValidationError("CostParams.energy_price_usd_per_kwh must be >= 0")
        for name in ("fixed_capex_per_site_usd", "variable_capex_per_mw_usd", "grid_fee_usd",
                     "fixed_opex_per_site_usd"):
            if getattr(self, name) < 0:
                raise ValidationError(f"CostParams.{name} must be >= 0")
        if self.grid_block_mw <= 0:
            raise ValidationError("CostParams.grid_block_mw must be > 0")
        if self.fx_krw_per_usd <= 0:
            raise ConfigError(
                f"CostParams.fx_krw_per_usd must be > 0, got {self.fx_krw_per_usd}"
            )
        if self.grid_fee_scope not in ("pooled", "per_site"):
            raise ConfigError(
                f"CostParams.grid_fee_scope must be 'pooled' or 'per_site', "
                f"got {self.grid_fee_scope!r}"
            )


@dataclass(frozen=True)
class EconomicParams:
    """The full monetary parameter block."""

    miner: MinerSpec = field(default_factory=MinerSpec)
    network: NetworkSnapshot = field(default_factory=NetworkSnapshot)
    layout: LayoutParams = field(default_factory=LayoutParams)
    costs: CostParams = field(default_factory=CostParams)


@dataclass(frozen=True)
class RegionPlan:
    """Per-region deployment derived from its surplus energy."""

    region_code: str
    n_miners: int
    power_mw: float
    annual_energy_kwh: float
    annual_revenue_usd: float
    annual_depreciation_usd: float
    annual_land_cost_usd: float
    containers: int
    net_area_m2: float
    gross_area_m2: float

    def __post_init__(self):
        for name in (
            "n_miners",
            "power_mw",
            "annual_energy_kwh",
            "annual_revenue_usd",
            "annual_depreciation_usd",
            "annual_land_cost_usd",
            "containers",
            "net_area_m2",
            "gross_area_m2",
        ):
            if getattr(self, name) < 0:
                raise ValidationError(f"RegionPlan.{name} must be >= 0")

    @property
    def gross_margin_usd(self) -> float:
        """Annual revenue net of machine depreciation."""
        return self.annual_revenue_usd - self.annual_depreciation_usd


def miner_capacity(annual_surplus_kwh: float, miner: MinerSpec) -> int:
    """Machines a region's annual surplus can power year-round (floor)."""
    if annual_surplus_kwh < 0:
        raise ValidationError(f"surplus must be >= 0, got {annual_surplus_kwh}")
    return math.floor(annual_surplus_kwh / miner.annual_energy_kwh)


def annual_revenue(n_miners: int, miner: MinerSpec, net: NetworkSnapshot) -> float:
    """Expected proof-of-work revenue: hashrate share of yearly block rewards."""
    if n_miners < 0:
        raise ValidationError(f"n_miners must be >= 0, got {n_miners}")
    return (
        n_miners
        * (miner.hashrate_ths / net.network_hashrate_ths)
        * net.blocks_per_year
        * net.block_reward_btc
        * net.btc_price_usd
    )


def annual_depreciation(n_miners: int, miner: MinerSpec) -> float:
    """Straight-line machine depreciation over the miner lifetime."""
    if n_miners < 0:
        raise ValidationError(f"n_miners must be >= 0, got {n_miners}")
    return n_miners * miner.capex_per_unit / miner.lifetime_years


def required_net_area(n_miners: int, layout: LayoutParams) -> tuple[int, float]:
    """(containers, net area m²): whole containers plus the layout margin."""
    if n_miners < 0:
        raise ValidationError(f"n_miners must be >= 0, got {n_miners}")
    containers = -(-n_miners // layout.miners_per_container)
    net_area = containers * layout.area_per_container_m2 * (1.0 + layout.margin_ratio)
    return containers, net_area


def gross_area(power_mw: float, layout: LayoutParams) -> float:
    """Stage-1 land-cost footprint at the per-MW gross rate."""
    if power_mw < 0:
        raise ValidationError(f"power_mw must be >= 0, got {power_mw}")
    return power_mw * layout.gross_area_m2_per_mw


def land_cost_annual(gross_area_m2: float, land_price_krw_m2: float, cost: CostParams) -> float:
    """Annualized land cost in USD: area x price x market multiplier / amortization."""
    if gross_area_m2 < 0 or land_price_krw_m2 < 0:
        raise ValidationError("area and land price must be >= 0")
    krw_per_year = gross_area_m2 * land_price_krw_m2 * cost.market_multiplier / cost.land_amort_years
    return krw_per_year / cost.fx_krw_per_usd


def grid_fee(total_mw: float, cost: CostParams, per_site_mw: list[float] | None = None) -> float:
    """Stepped grid-connection fee: one charge per started capacity block."""
    if cost.grid_fee_scope == "per_site":
        if per_site_mw is None:
            raise ValidationError("per-site grid fee scope needs per-site capacities")
        return sum(math.ceil(mw / cost.grid_block_mw) * cost.grid_fee_usd for mw in per_site_mw)
    return math.ceil(total_mw / cost.grid_block_mw) * cost.grid_fee_usd


def infra_cost_annual(
    total_mw: float,
    k_sites: int,
    cost: CostParams,
    per_site_mw: list[float] | None = None,
) -> float:
    """Annualized infrastructure cost for ``k_sites`` sites of pooled capacity.

    Capital expenditure (fixed per site, variable per MW, stepped grid fee) is
    spread over the infrastructure lifetime; fixed OPEX accrues per site per
    year.
    """
    if k_sites < 1:
        raise ValidationError(f"k_sites must be >= 1, got {k_sites}")
    if total_mw < 0:
        raise ValidationError(f"total_mw must be >= 0, got {total_mw}")
    c_capex = (
        k_sites * cost.fixed_capex_per_site_usd
        + total_mw * cost.variable_capex_per_mw_usd
        + grid_fee(total_mw, cost, per_site_mw)
    )
    return c_capex / cost.infra_lifetime_years + k_sites * cost.fixed_opex_per_site_usd


def energy_cost_annual(annual_energy_kwh: float, cost: CostParams) -> float:
    """Energy cost; zero under the surplus-power assumption's zero price."""
    if annual_energy_kwh < 0:
        raise ValidationError(f"energy must be >= 0, got {annual_energy_kwh}")
    return annual_energy_kwh * cost.energy_price_usd_per_kwh


def build_region_plan(region, params: EconomicParams) -> RegionPlan:
    """Size a region's deployment and price out all per-region annual figures."""
    miner, net, layout, cost = params.miner, params.network, params.layout, params.costs
    n = miner_capacity(region.annual_surplus_kwh, miner)
    power_mw = n * miner.power_kw / 1000.0
    containers, net_area = required_net_area(n, layout)
    gross = gross_area(power_mw, layout)
    return RegionPlan(
        region_code=region.region_code,
        n_miners=n,
        power_mw=power_mw,
        annual_energy_kwh=n * miner.annual_energy_kwh,
        annual_revenue_usd=annual_revenue(n, miner, net),
        annual_depreciation_usd=annual_depreciation(n, miner),
        annual_land_cost_usd=land_cost_annual(gross, region.land_price_krw_m2, cost),
        containers=containers,
        net_area_m2=net_area,
        gross_area_m2=gross,
    )
