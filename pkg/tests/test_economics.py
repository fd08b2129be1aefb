import math
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from minesite.economics import (
    CostParams,
    EconomicParams,
    LayoutParams,
    MinerSpec,
    NetworkSnapshot,
    annual_depreciation,
    annual_revenue,
    build_region_plan,
    energy_cost_annual,
    grid_fee,
    gross_area,
    infra_cost_annual,
    land_cost_annual,
    miner_capacity,
    required_net_area,
)
from minesite.errors import ConfigError, ValidationError
from minesite.geodata.regions import RegionRecord

from conftest import square

BASE_MINER = MinerSpec()  # 4.104 kW, 473 TH/s, $9,490 over 7 years
BASE_COSTS = CostParams()
BASE_LAYOUT = LayoutParams()


class TestMinerCapacity:
    def test_zero_surplus(self):
        assert miner_capacity(0.0, BASE_MINER) == 0

    def test_hundred_gwh(self):
        # 100,000,000 / (4.104 * 8760) = 2781.56... -> 2781
        assert miner_capacity(100_000_000.0, BASE_MINER) == 2_781

    def test_exact_one_machine_boundary(self):
        assert miner_capacity(35_951.04, BASE_MINER) == 1

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            miner_capacity(-1.0, BASE_MINER)


class TestAnnualRevenue:
    NET = NetworkSnapshot(
        network_hashrate_ths=6.0e8,
        block_reward_btc=3.125,
        btc_price_usd=60_000.0,
        blocks_per_year=52_560.0,
    )

    def test_zero_machines(self):
        assert annual_revenue(0, BASE_MINER, self.NET) == 0.0

    def test_single_machine_share(self):
        # 1 * (473 / 6e8) * 52,560 * 3.125 * 60,000 = 7,769.025
        assert annual_revenue(1, BASE_MINER, self.NET) == pytest.approx(7_769.025, abs=1e-6)

    @given(n=st.integers(min_value=0, max_value=10_000))
    def test_linearity(self, n):
        single = annual_revenue(1, BASE_MINER, self.NET)
        assert annual_revenue(2 * n, BASE_MINER, self.NET) == pytest.approx(
            2 * n * single, rel=1e-12
        )

    def test_zero_network_hashrate_unconstructable(self):
        with pytest.raises(ValidationError):
            NetworkSnapshot(network_hashrate_ths=0.0)


class TestAnnualDepreciation:
    def test_largest_region_scale(self):
        # 18,978 * 9,490 / 7 = 25,728,745.71; $25.73M +/- 0.01M
        value = annual_depreciation(18_978, BASE_MINER)
        assert value == pytest.approx(25_728_745.714285713, rel=1e-12)
        assert abs(value - 25.73e6) < 0.01e6

    def test_mid_region_scale(self):
        assert abs(annual_depreciation(11_853, BASE_MINER) - 16.07e6) < 0.01e6

    def test_zero(self):
        assert annual_depreciation(0, BASE_MINER) == 0.0


class TestRequiredNetArea:
    def test_ninety_one_containers(self):
        containers, net = required_net_area(18_978, BASE_LAYOUT)
        assert containers == 91
        assert net == pytest.approx(6_116.11, abs=1e-9)

    def test_exactly_one_container(self):
        containers, net = required_net_area(210, BASE_LAYOUT)
        assert containers == 1
        assert net == pytest.approx(67.21, abs=1e-9)

    def test_zero(self):
        assert required_net_area(0, BASE_LAYOUT) == (0, 0.0)

    @given(n=st.integers(min_value=1, max_value=5_000))
    def test_increment_is_zero_or_one_container(self, n):
        _, net_prev = required_net_area(n - 1, BASE_LAYOUT)
        _, net_curr = required_net_area(n, BASE_LAYOUT)
        step = net_curr - net_prev
        one_container = BASE_LAYOUT.area_per_container_m2 * (1 + BASE_LAYOUT.margin_ratio)
        assert step == pytest.approx(0.0, abs=1e-9) or step == pytest.approx(
            one_container, abs=1e-9
        )


class TestGrossArea:
    def test_one_mw(self):
        assert gross_area(1.0, BASE_LAYOUT) == 2_500.0

    def test_zero(self):
        assert gross_area(0.0, BASE_LAYOUT) == 0.0

    def test_largest_region_power(self):
        # 18,978 machines * 4.104 kW = 77.885712 MW -> 194,714.28 m2
        power_mw = 18_978 * BASE_MINER.power_kw / 1000.0
        assert gross_area(power_mw, BASE_LAYOUT) == pytest.approx(194_714.28, abs=0.01)


class TestLandCost:
    def test_direct_formula(self):
        # 2,500 * 100,000 * 1.3 / 20 = 16,250,000 KRW -> $12,037.04 at 1,350
        value = land_cost_annual(2_500.0, 100_000.0, BASE_COSTS)
        assert value == pytest.approx(12_037.037037037036, rel=1e-12)

    def test_zero_price(self):
        assert land_cost_annual(2_500.0, 0.0, BASE_COSTS) == 0.0

    def test_market_multiplier_linearity(self):
        doubled = replace(BASE_COSTS, market_multiplier=2.6)
        assert land_cost_annual(100.0, 1_000.0, doubled) == pytest.approx(
            2 * land_cost_annual(100.0, 1_000.0, BASE_COSTS), rel=1e-12
        )

    def test_amortization_inverse_linearity(self):
        slow = replace(BASE_COSTS, land_amort_years=40.0)
        assert land_cost_annual(100.0, 1_000.0, slow) == pytest.approx(
            land_cost_annual(100.0, 1_000.0, BASE_COSTS) / 2, rel=1e-12
        )

    def test_bad_fx_is_config_error(self):
        with pytest.raises(ConfigError):
            CostParams(fx_krw_per_usd=0.0)


class TestInfraCost:
    def test_two_sites_25_mw(self):
        # C = 2*5M + 25*0.4M + ceil(2.5)*1.2M = 23.6M; I = 23.6M/7 + 6M
        value = infra_cost_annual(25.0, 2, BASE_COSTS)
        assert value == pytest.approx(9_371_428.571428571, rel=1e-12)

    def test_grid_fee_steps_at_block_boundary(self):
        at_block = infra_cost_annual(10.0, 1, BASE_COSTS)
        above_block = infra_cost_annual(10.01, 1, BASE_COSTS)
        jump = (above_block - at_block) * BASE_COSTS.infra_lifetime_years
        fee_jump = jump - 0.01 * BASE_COSTS.variable_capex_per_mw_usd
        assert fee_jump == pytest.approx(BASE_COSTS.grid_fee_usd, abs=1e-3)

    def test_zero_mw_single_site(self):
        assert infra_cost_annual(0.0, 1, BASE_COSTS) == pytest.approx(
            5e6 / 7 + 3e6, rel=1e-12
        )

    def test_zero_sites_rejected(self):
        with pytest.raises(ValidationError):
            infra_cost_annual(10.0, 0, BASE_COSTS)

    @given(
        mw_lo=st.floats(min_value=0, max_value=99.0),
        delta=st.floats(min_value=0, max_value=1.0),
        k=st.integers(min_value=1, max_value=5),
    )
    def test_monotone_in_mw_and_k(self, mw_lo, delta, k):
        assert infra_cost_annual(mw_lo + delta, k, BASE_COSTS) >= infra_cost_annual(
            mw_lo, k, BASE_COSTS
        )
        assert infra_cost_annual(mw_lo, k + 1, BASE_COSTS) >= infra_cost_annual(
            mw_lo, k, BASE_COSTS
        )

    def test_per_site_scope_charges_each_site(self):
        per_site = replace(BASE_COSTS, grid_fee_scope="per_site")
        # Two 5 MW sites: pooled -> ceil(10/10)=1 fee; per-site -> 2 fees.
        assert grid_fee(10.0, BASE_COSTS) == 1_200_000.0
        assert grid_fee(10.0, per_site, per_site_mw=[5.0, 5.0]) == 2_400_000.0

    def test_per_site_scope_requires_capacities(self):
        per_site = replace(BASE_COSTS, grid_fee_scope="per_site")
        with pytest.raises(ValidationError):
            grid_fee(10.0, per_site)


class TestEnergyCost:
    def test_zero_price_means_free_energy(self):
        assert energy_cost_annual(1e9, BASE_COSTS) == 0.0

    def test_nonzero_price(self):
        priced = replace(BASE_COSTS, energy_price_usd_per_kwh=0.05)
        assert energy_cost_annual(1e6, priced) == pytest.approx(50_000.0)

    def test_zero_energy(self):
        assert energy_cost_annual(0.0, BASE_COSTS) == 0.0


def region_with_surplus(surplus: float, price: float = 150_000.0) -> RegionRecord:
    return RegionRecord(
        region_code="41461",
        name="Fixture",
        annual_surplus_kwh=surplus,
        land_price_krw_m2=price,
        boundary=square(950_000.0, 1_800_000.0, 900.0),
    )


class TestBuildRegionPlan:
    PARAMS = EconomicParams()

    def test_zero_surplus_means_all_zero_money(self):
        plan = build_region_plan(region_with_surplus(0.0), self.PARAMS)
        assert plan.n_miners == 0
        assert plan.power_mw == 0.0
        assert plan.annual_revenue_usd == 0.0
        assert plan.annual_depreciation_usd == 0.0
        assert plan.annual_land_cost_usd == 0.0
        assert plan.net_area_m2 == 0.0
        assert plan.gross_area_m2 == 0.0

    def test_largest_region_fixture(self):
        # Surplus sized to pin exactly 18,978 machines.
        surplus = 18_978 * BASE_MINER.annual_energy_kwh + 1.0
        plan = build_region_plan(region_with_surplus(surplus), self.PARAMS)
        assert plan.n_miners == 18_978
        assert plan.containers == 91
        assert plan.net_area_m2 == pytest.approx(6_116.11, abs=1e-6)
        assert abs(plan.annual_depreciation_usd - 25.73e6) < 0.01e6
        assert plan.power_mw == 18_978 * BASE_MINER.power_kw / 1000.0

    def test_determinism(self):
        region = region_with_surplus(123_456_789.0)
        assert build_region_plan(region, self.PARAMS) == build_region_plan(region, self.PARAMS)

    @given(n=st.integers(min_value=0, max_value=50_000))
    def test_power_energy_revenue_depreciation_scale_with_machines(self, n):
        surplus = n * BASE_MINER.annual_energy_kwh * 1.0000001
        plan = build_region_plan(region_with_surplus(surplus), self.PARAMS)
        assert plan.n_miners == n
        assert plan.annual_energy_kwh == pytest.approx(n * BASE_MINER.annual_energy_kwh)
        assert plan.annual_revenue_usd == pytest.approx(
            n * annual_revenue(1, self.PARAMS.miner, self.PARAMS.network), rel=1e-9
        )
        assert plan.annual_depreciation_usd == pytest.approx(
            n * BASE_MINER.capex_per_unit / BASE_MINER.lifetime_years, rel=1e-9
        )

    def test_energy_price_zero_makes_cost_energy_independent(self):
        a = build_region_plan(region_with_surplus(1e8), self.PARAMS)
        b = build_region_plan(region_with_surplus(2e8), self.PARAMS)
        assert energy_cost_annual(a.annual_energy_kwh, self.PARAMS.costs) == 0.0
        assert energy_cost_annual(b.annual_energy_kwh, self.PARAMS.costs) == 0.0

    def test_fx_applies_exactly_once(self):
        # Doubling KRW per USD halves the KRW-sourced land cost and must not
        # touch any USD-native figure.
        region = region_with_surplus(1e8)
        base = build_region_plan(region, self.PARAMS)
        doubled_fx = EconomicParams(costs=replace(BASE_COSTS, fx_krw_per_usd=2_700.0))
        other = build_region_plan(region, doubled_fx)
        assert other.annual_land_cost_usd == pytest.approx(base.annual_land_cost_usd / 2, rel=1e-12)
        assert other.annual_revenue_usd == base.annual_revenue_usd
        assert other.annual_depreciation_usd == base.annual_depreciation_usd


class TestParamInvariants:
    def test_miner_spec_positive(self):
        with pytest.raises(ValidationError):
            MinerSpec(power_kw=0.0)

    def test_layout_margin_range(self):
        with pytest.raises(ValidationError):
            LayoutParams(margin_ratio=1.0)

    def test_cost_years(self):
        with pytest.raises(ValidationError):
            CostParams(land_amort_years=0.5)

    def test_market_multiplier_floor(self):
        with pytest.raises(ValidationError):
            CostParams(market_multiplier=0.9)

    def test_default_network_calibration(self):
        # Default snapshot is calibrated to $8,944/machine-year.
        per_machine = annual_revenue(1, MinerSpec(), NetworkSnapshot())
        assert per_machine == pytest.approx(8_944.0, abs=1e-6)
