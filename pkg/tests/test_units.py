import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from probecast.units import Quantity, Unit, UnitError, m_per_min, to_m_per_min


def test_add_same_unit():
    total = Quantity(2.0, Unit.METRE) + Quantity(3.0, Unit.METRE)
    assert total.value == 5.0
    assert total.unit is Unit.METRE


def test_add_mismatched_units_rejected():
    with pytest.raises(UnitError):
        Quantity(2.0, Unit.METRE) + Quantity(3.0, Unit.KILOGRAM)
    with pytest.raises(UnitError):
        Quantity(2.0, Unit.METRE) - Quantity(3.0, Unit.SECOND)


def test_multiplication_composes_dimensions():
    rho = Quantity(1000.0, Unit.KILOGRAM_PER_CUBIC_METRE)
    g = Quantity(10.0, Unit.METRE_PER_SECOND2)
    volume = Quantity(0.5, Unit.CUBIC_METRE)
    force = rho * g * volume
    assert force.unit is Unit.NEWTON
    assert force.value == 5000.0


def test_division_to_dimensionless_collapses_to_float():
    ratio = Quantity(120.0, Unit.MEGAPASCAL) / Quantity(14.7, Unit.MEGAPASCAL)
    assert isinstance(ratio, float)
    assert math.isclose(ratio, 120.0 / 14.7)


def test_megapascal_scale():
    assert Quantity(1.0, Unit.MEGAPASCAL).to(Unit.PASCAL) == 1.0e6
    assert Quantity(2.5e6, Unit.PASCAL).to(Unit.MEGAPASCAL) == 2.5


@pytest.mark.parametrize("unit", [Unit.KILOGRAM, Unit.CUBIC_METRE,
                                  Unit.SQUARE_METRE,
                                  Unit.KILOGRAM_PER_CUBIC_METRE])
def test_negative_magnitudes_rejected(unit):
    with pytest.raises(UnitError):
        Quantity(-1.0, unit)


def test_negative_allowed_where_physical():
    # velocities and forces are signed
    assert Quantity(-0.33, Unit.METRE_PER_SECOND).value == -0.33
    assert Quantity(-5.0, Unit.NEWTON).value == -5.0


def test_to_wrong_dimension_rejected():
    with pytest.raises(UnitError):
        Quantity(1.0, Unit.METRE).to(Unit.SECOND)


def test_data_sheet_speed_round_trips():
    # data-sheet m/min values against their m/s equivalents
    assert math.isclose(m_per_min(21.336), 0.3556, abs_tol=1e-4)
    assert math.isclose(m_per_min(19.812), 0.3302, abs_tol=1e-4)
    assert math.isclose(to_m_per_min(m_per_min(21.336)), 21.336,
                        abs_tol=1e-12)


@given(st.floats(min_value=0.1, max_value=1000.0))
def test_speed_conversion_round_trip_property(speed):
    assert math.isclose(to_m_per_min(m_per_min(speed)), speed,
                        rel_tol=1e-12)
