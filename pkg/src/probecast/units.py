"""Unit-tagged scalar quantities for spec sheets and capacity checks.

The simulation core works in raw SI floats; Quantity is used where mixing
units would be dangerous (platform capacity math, spec-sheet I/O). Winch
speeds are quoted in m/min on data sheets but stored in m/s everywhere
inside the package; conversion happens only at I/O boundaries.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

# dimension exponents: (metre, kilogram, second, volt)
Dim = tuple[int, int, int, int]

_DIMLESS: Dim = (0, 0, 0, 0)


class Unit(enum.Enum):
    """Nameable units; value = (symbol, dimension exponents, SI scale)."""

    METRE = ("m", (1, 0, 0, 0), 1.0)
    METRE_PER_SECOND = ("m/s", (1, 0, -1, 0), 1.0)
    METRE_PER_SECOND2 = ("m/s^2", (1, 0, -2, 0), 1.0)
    KILOGRAM = ("kg", (0, 1, 0, 0), 1.0)
    NEWTON = ("N", (1, 1, -2, 0), 1.0)
    PASCAL = ("Pa", (-1, 1, -2, 0), 1.0)
    MEGAPASCAL = ("MPa", (-1, 1, -2, 0), 1.0e6)
    SECOND = ("s", (0, 0, 1, 0), 1.0)
    VOLT = ("V", (0, 0, 0, 1), 1.0)
    CUBIC_METRE = ("m^3", (3, 0, 0, 0), 1.0)
    KILOGRAM_PER_CUBIC_METRE = ("kg/m^3", (-3, 1, 0, 0), 1.0)
    SQUARE_METRE = ("m^2", (2, 0, 0, 0), 1.0)

    @property
    def symbol(self) -> str:
        return self.value[0]

    @property
    def dim(self) -> Dim:
        return self.value[1]

    @property
    def si_scale(self) -> float:
        return self.value[2]


# units whose physical meaning forbids negative magnitudes
_NONNEGATIVE_UNITS = frozenset(
    {
        Unit.KILOGRAM,
        Unit.CUBIC_METRE,
        Unit.SQUARE_METRE,
        Unit.KILOGRAM_PER_CUBIC_METRE,
    }
)

# preferred display unit per dimension (SI-scale-1 units only)
_CANONICAL: dict[Dim, Unit] = {
    u.dim: u for u in Unit if u.si_scale == 1.0
}


class UnitError(ValueError):
    """Raised on dimensionally invalid construction or arithmetic."""


@dataclass(frozen=True)
class Quantity:
    """A real value tagged with a dimension.

    Add/subtract require matching dimensions; multiply/divide compose them.
    Intermediate results may carry a dimension with no nameable unit; they
    stay usable in further arithmetic but cannot be displayed with a symbol.
    """

    si_value: float
    dim: Dim

    def __init__(self, value: float, unit: Unit):
        if unit in _NONNEGATIVE_UNITS and value < 0:
            raise UnitError(f"negative {unit.symbol} quantity: {value}")
        object.__setattr__(self, "si_value", value * unit.si_scale)
        object.__setattr__(self, "dim", unit.dim)

    @classmethod
    def _raw(cls, si_value: float, dim: Dim) -> "Quantity":
        q = object.__new__(cls)
        object.__setattr__(q, "si_value", si_value)
        object.__setattr__(q, "dim", dim)
        return q

    @property
    def unit(self) -> Unit | None:
        """The canonical nameable unit for this dimension, if one exists."""
        return _CANONICAL.get(self.dim)

    @property
    def value(self) -> float:
        """Value in the canonical (scale-1 SI) unit of this dimension."""
        return self.si_value

    def to(self, unit: Unit) -> float:
        if unit.dim != self.dim:
            raise UnitError(f"cannot express dimension {self.dim} in {unit.symbol}")
        return self.si_value / unit.si_scale

    def __add__(self, other: "Quantity") -> "Quantity":
        self._require_same_dim(other, "+")
        return Quantity._raw(self.si_value + other.si_value, self.dim)

    def __sub__(self, other: "Quantity") -> "Quantity":
        self._require_same_dim(other, "-")
        return Quantity._raw(self.si_value - other.si_value, self.dim)

    def __mul__(self, other: "Quantity | float | int"):
        if isinstance(other, Quantity):
            dim = tuple(a + b for a, b in zip(self.dim, other.dim))
            return self._result(self.si_value * other.si_value, dim)
        return Quantity._raw(self.si_value * float(other), self.dim)

    __rmul__ = __mul__

    def __truediv__(self, other: "Quantity | float | int"):
        if isinstance(other, Quantity):
            dim = tuple(a - b for a, b in zip(self.dim, other.dim))
            return self._result(self.si_value / other.si_value, dim)
        return Quantity._raw(self.si_value / float(other), self.dim)

    @staticmethod
    def _result(si_value: float, dim: Dim):
        # dimensionless results collapse to plain floats
        if dim == _DIMLESS:
            return si_value
        return Quantity._raw(si_value, dim)

    def _require_same_dim(self, other: "Quantity", op: str) -> None:
        if not isinstance(other, Quantity) or other.dim != self.dim:
            raise UnitError(f"dimension mismatch in '{op}': {self.dim} vs "
                            f"{getattr(other, 'dim', type(other).__name__)}")

    def __repr__(self) -> str:
        u = self.unit
        if u is not None:
            return f"{self.si_value:g} {u.symbol}"
        return f"{self.si_value:g} [dim={self.dim}]"


def m_per_min(speed: float) -> float:
    """Convert a data-sheet m/min speed to the internal m/s representation."""
    return speed / 60.0


def to_m_per_min(speed_m_s: float) -> float:
    """Convert an internal m/s speed to m/min for display and spec files."""
    return speed_m_s * 60.0
