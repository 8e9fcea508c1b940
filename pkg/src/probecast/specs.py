"""Physical spec sheets and static feasibility checks.

Covers the platform flotation budget, the frame stress margin, and the
probe/winch compatibility rules that must pass before anything is lowered
into the water.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .units import Quantity, Unit

STANDARD_GRAVITY = 9.81          # m/s^2
FRESH_WATER_DENSITY = 997.0      # kg/m^3
DEFAULT_SPOOL_CAPACITY = 10.0    # m, limited by the winch spool diameter
DEFAULT_RELAY_DWELL = 0.5        # s, floor between mechanical relay switches


class SpecError(ValueError):
    """Raised when a spec sheet violates its own invariants."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SpecError(message)


@dataclass(frozen=True)
class ProbeSpec:
    """Sensor probe as hung from the winch tether."""

    mass_air_kg: float
    volume_m3: float
    drag_coefficient: float
    cross_section_area_m2: float
    pressure_noise_sigma_m: float = 0.0
    sample_period_s: float = 1.0
    parameters: tuple[str, ...] = ("temperature",)

    def __post_init__(self):
        _require(self.mass_air_kg > 0, "probe mass_air_kg must be > 0")
        _require(self.volume_m3 > 0, "probe volume_m3 must be > 0")
        _require(self.drag_coefficient > 0, "probe drag_coefficient must be > 0")
        _require(self.cross_section_area_m2 > 0,
                 "probe cross_section_area_m2 must be > 0")
        _require(self.pressure_noise_sigma_m >= 0,
                 "probe pressure_noise_sigma_m must be >= 0")
        _require(self.sample_period_s > 0, "probe sample_period_s must be > 0")
        _require(len(self.parameters) > 0, "probe parameter list must be non-empty")
        object.__setattr__(self, "parameters", tuple(self.parameters))


@dataclass(frozen=True)
class WinchSpec:
    """Winch drive limits; speeds stored in m/s (converted at I/O)."""

    max_payload_kg: float
    payout_speed_m_s: float
    retrieval_speed_m_s: float
    spool_capacity_m: float = DEFAULT_SPOOL_CAPACITY
    operating_voltage_v: float = 12.0
    min_relay_dwell_s: float = DEFAULT_RELAY_DWELL

    def __post_init__(self):
        for name in ("max_payload_kg", "payout_speed_m_s", "retrieval_speed_m_s",
                     "spool_capacity_m", "operating_voltage_v", "min_relay_dwell_s"):
            _require(getattr(self, name) > 0, f"winch {name} must be > 0")


@dataclass(frozen=True)
class PlatformSpec:
    """Pontoon platform carrying the frame, winch and payload."""

    pontoon_volume_each_m3: float
    pontoon_count: int = 2
    water_density_kg_m3: float = FRESH_WATER_DENSITY
    gravity_m_s2: float = STANDARD_GRAVITY
    buoyancy_safety_factor: float = 1.2
    dry_mass_kg: float = 0.0

    def __post_init__(self):
        _require(self.pontoon_volume_each_m3 >= 0,
                 "pontoon_volume_each_m3 must be >= 0")
        _require(self.pontoon_count >= 1, "pontoon_count must be >= 1")
        _require(self.water_density_kg_m3 > 0, "water_density_kg_m3 must be > 0")
        _require(self.gravity_m_s2 > 0, "gravity_m_s2 must be > 0")
        _require(self.buoyancy_safety_factor >= 1,
                 "buoyancy_safety_factor must be >= 1")
        _require(self.dry_mass_kg >= 0, "dry_mass_kg must be >= 0")


@dataclass(frozen=True)
class StructuralCheck:
    """Frame material limit versus the worst simulated load."""

    yield_strength_mpa: float
    maximum_stress_mpa: float

    def __post_init__(self):
        _require(self.yield_strength_mpa > 0, "yield_strength_mpa must be > 0")
        _require(self.maximum_stress_mpa > 0, "maximum_stress_mpa must be > 0")


def buoyant_force(platform: PlatformSpec) -> Quantity:
    """Total pontoon buoyant force: rho * g * displaced volume. Returns N."""
    rho = Quantity(platform.water_density_kg_m3, Unit.KILOGRAM_PER_CUBIC_METRE)
    g = Quantity(platform.gravity_m_s2, Unit.METRE_PER_SECOND2)
    volume = Quantity(platform.pontoon_count * platform.pontoon_volume_each_m3,
                      Unit.CUBIC_METRE)
    return rho * g * volume


def max_total_weight(platform: PlatformSpec) -> Quantity:
    """Flotation budget: buoyant force over safety factor, as mass. Returns kg."""
    g = Quantity(platform.gravity_m_s2, Unit.METRE_PER_SECOND2)
    return buoyant_force(platform) / platform.buoyancy_safety_factor / g


def structural_safety_factor(check: StructuralCheck) -> float:
    """Yield strength over maximum simulated stress (dimensionless)."""
    yield_q = Quantity(check.yield_strength_mpa, Unit.MEGAPASCAL)
    stress_q = Quantity(check.maximum_stress_mpa, Unit.MEGAPASCAL)
    return yield_q / stress_q


@dataclass(frozen=True)
class RuleResult:
    name: str
    measured: float
    limit: float
    unit: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class CompatibilityReport:
    rules: tuple[RuleResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rules)

    def lines(self) -> list[str]:
        out = []
        for r in self.rules:
            verdict = "pass" if r.passed else "FAIL"
            out.append(f"[{verdict}] {r.name}: {r.detail}")
        return out


def check_probe_compatibility(probe: ProbeSpec, winch: WinchSpec,
                              platform: PlatformSpec) -> CompatibilityReport:
    """Static go/no-go rules for hanging this probe on this winch and boat.

    (a) the probe must sink (wet weight strictly positive),
    (b) its air weight must not exceed the winch payload rating (inclusive,
        the rating is a stated maximum),
    (c) platform dry mass plus probe must fit the flotation budget.

    Failures are report entries, never exceptions.
    """
    g = platform.gravity_m_s2
    rho = platform.water_density_kg_m3

    wet_weight_n = probe.mass_air_kg * g - rho * g * probe.volume_m3
    rule_a = RuleResult(
        name="negatively buoyant probe",
        measured=wet_weight_n, limit=0.0, unit="N",
        passed=wet_weight_n > 0,
        detail=f"wet weight {wet_weight_n:.2f} N > 0 N",
    )

    rule_b = RuleResult(
        name="winch payload rating",
        measured=probe.mass_air_kg, limit=winch.max_payload_kg, unit="kg",
        passed=probe.mass_air_kg <= winch.max_payload_kg,
        detail=(f"probe {probe.mass_air_kg:.3f} kg <= "
                f"max payload {winch.max_payload_kg:.3f} kg"),
    )

    budget_kg = max_total_weight(platform).to(Unit.KILOGRAM)
    total_kg = platform.dry_mass_kg + probe.mass_air_kg
    rule_c = RuleResult(
        name="platform flotation budget",
        measured=total_kg, limit=budget_kg, unit="kg",
        passed=total_kg <= budget_kg,
        detail=(f"dry mass + payload {total_kg:.2f} kg <= "
                f"budget {budget_kg:.2f} kg"),
    )

    return CompatibilityReport(rules=(rule_a, rule_b, rule_c))
