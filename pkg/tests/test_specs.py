import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_platform, make_probe, make_winch
from probecast.specs import (PlatformSpec, SpecError,
                             StructuralCheck, WinchSpec, buoyant_force,
                             check_probe_compatibility, max_total_weight,
                             structural_safety_factor)
from probecast.units import Quantity, Unit


class TestBuoyantForce:
    def test_reference_platform(self):
        # rho=997, g=9.81, V=2*0.0642: within 0.2% of the quoted 1256.8 N
        force = buoyant_force(make_platform()).to(Unit.NEWTON)
        assert math.isclose(force, 997.0 * 9.81 * 0.1284, rel_tol=1e-12)
        assert abs(force - 1256.8) / 1256.8 < 0.002

    def test_zero_volume(self):
        platform = make_platform(pontoon_volume_each_m3=0.0)
        assert buoyant_force(platform).to(Unit.NEWTON) == 0.0

    def test_round_numbers(self):
        platform = PlatformSpec(pontoon_volume_each_m3=0.25, pontoon_count=2,
                                water_density_kg_m3=1000.0, gravity_m_s2=10.0)
        assert buoyant_force(platform).to(Unit.NEWTON) == 5000.0

    @given(st.floats(min_value=0.1, max_value=10.0))
    def test_linear_in_density(self, k):
        base = make_platform()
        scaled = make_platform(water_density_kg_m3=base.water_density_kg_m3 * k)
        assert math.isclose(buoyant_force(scaled).value,
                            k * buoyant_force(base).value, rel_tol=1e-9)

    @given(st.floats(min_value=0.1, max_value=10.0))
    def test_linear_in_volume(self, k):
        base = make_platform()
        scaled = make_platform(
            pontoon_volume_each_m3=base.pontoon_volume_each_m3 * k)
        assert math.isclose(buoyant_force(scaled).value,
                            k * buoyant_force(base).value, rel_tol=1e-9)


class TestMaxTotalWeight:
    def test_quoted_inputs(self):
        # F_b = 1256.8 N, S.F = 1.2, g = 9.81 reproduces the quoted 106.76 kg
        weight = 1256.8 / 1.2 / 9.81
        assert abs(weight - 106.76) / 106.76 < 0.002

    def test_computed_chain(self):
        # arithmetic oracle: rho * V_total / S.F = 997 * 0.1284 / 1.2
        expected = 997.0 * 0.1284 / 1.2
        weight = max_total_weight(make_platform()).to(Unit.KILOGRAM)
        assert math.isclose(weight, expected, rel_tol=1e-12)
        assert math.isclose(weight, 106.679, abs_tol=5e-4)

    def test_unit_safety_factor(self):
        platform = make_platform(buoyancy_safety_factor=1.0,
                                 water_density_kg_m3=1000.0,
                                 pontoon_volume_each_m3=0.05,
                                 pontoon_count=2)
        # with S.F = 1 the budget is exactly the displaced water mass
        assert math.isclose(max_total_weight(platform).to(Unit.KILOGRAM),
                            1000.0 * 0.1, rel_tol=1e-12)

    def test_round_trip_identity(self):
        platform = make_platform()
        weight = max_total_weight(platform)
        g = Quantity(platform.gravity_m_s2, Unit.METRE_PER_SECOND2)
        back = weight * platform.buoyancy_safety_factor * g
        assert math.isclose(back.to(Unit.NEWTON),
                            buoyant_force(platform).to(Unit.NEWTON),
                            rel_tol=1e-12)


class TestStructuralSafetyFactor:
    def test_reference_frame(self):
        check = StructuralCheck(yield_strength_mpa=120.0,
                                maximum_stress_mpa=14.7)
        assert abs(structural_safety_factor(check) - 8.16) < 0.01

    def test_stress_at_yield(self):
        check = StructuralCheck(yield_strength_mpa=120.0,
                                maximum_stress_mpa=120.0)
        assert structural_safety_factor(check) == 1.0

    def test_simple_ratio(self):
        check = StructuralCheck(yield_strength_mpa=100.0,
                                maximum_stress_mpa=25.0)
        assert structural_safety_factor(check) == 4.0

    def test_zero_stress_rejected_at_construction(self):
        with pytest.raises(SpecError):
            StructuralCheck(yield_strength_mpa=120.0, maximum_stress_mpa=0.0)


class TestCompatibility:
    def test_negatively_buoyant_rule(self):
        report = check_probe_compatibility(make_probe(), make_winch(),
                                           make_platform())
        rule = report.rules[0]
        assert rule.passed
        # oracle: 1.5*9.81 - 997*9.81*0.0008
        assert math.isclose(rule.measured, 1.5 * 9.81 - 997.0 * 9.81 * 0.0008,
                            rel_tol=1e-12)
        assert math.isclose(rule.measured, 6.89, abs_tol=5e-3)

    def test_payload_boundary_inclusive(self):
        probe = make_probe(mass_air_kg=11.340)
        report = check_probe_compatibility(probe, make_winch(),
                                           make_platform(dry_mass_kg=10.0))
        assert report.rules[1].passed

    def test_payload_over_limit(self):
        probe = make_probe(mass_air_kg=12.0)
        report = check_probe_compatibility(probe, make_winch(),
                                           make_platform())
        assert not report.rules[1].passed
        assert not report.passed

    def test_positively_buoyant_probe_fails(self):
        probe = make_probe(mass_air_kg=1.0, volume_m3=0.01)
        report = check_probe_compatibility(probe, make_winch(),
                                           make_platform())
        assert not report.rules[0].passed

    def test_platform_budget_rule(self):
        heavy = make_platform(dry_mass_kg=110.0)
        report = check_probe_compatibility(make_probe(), make_winch(), heavy)
        assert not report.rules[2].passed

    @given(st.floats(min_value=0.01, max_value=11.0),
           st.floats(min_value=0.0, max_value=5.0))
    def test_payload_rule_monotone_in_mass(self, mass, decrease):
        # decreasing the probe mass can never flip the payload rule to fail
        lighter = max(mass - decrease, 0.01)
        winch, platform = make_winch(), make_platform()
        heavy = check_probe_compatibility(
            make_probe(mass_air_kg=mass), winch, platform)
        light = check_probe_compatibility(
            make_probe(mass_air_kg=lighter), winch, platform)
        if heavy.rules[1].passed:
            assert light.rules[1].passed

    def test_report_lines_are_printable(self):
        report = check_probe_compatibility(make_probe(), make_winch(),
                                           make_platform())
        lines = report.lines()
        assert len(lines) == 3
        assert all(line.startswith("[pass]") for line in lines)


class TestSpecInvariants:
    def test_probe_rejects_nonpositive_fields(self):
        with pytest.raises(SpecError):
            make_probe(mass_air_kg=0.0)
        with pytest.raises(SpecError):
            make_probe(volume_m3=-1.0)
        with pytest.raises(SpecError):
            make_probe(drag_coefficient=0.0)
        with pytest.raises(SpecError):
            make_probe(cross_section_area_m2=0.0)
        with pytest.raises(SpecError):
            make_probe(parameters=())

    def test_winch_rejects_nonpositive_fields(self):
        with pytest.raises(SpecError):
            make_winch(max_payload_kg=0.0)
        with pytest.raises(SpecError):
            make_winch(payout_speed_m_s=-0.1)
        with pytest.raises(SpecError):
            make_winch(spool_capacity_m=0.0)

    def test_winch_spool_default(self):
        winch = WinchSpec(max_payload_kg=11.34, payout_speed_m_s=0.3556,
                          retrieval_speed_m_s=0.3302)
        assert winch.spool_capacity_m == 10.0
        assert winch.min_relay_dwell_s == 0.5

    def test_platform_invariants(self):
        with pytest.raises(SpecError):
            make_platform(pontoon_count=0)
        with pytest.raises(SpecError):
            make_platform(buoyancy_safety_factor=0.9)
        assert PlatformSpec(pontoon_volume_each_m3=0.1).water_density_kg_m3 \
            == 997.0
