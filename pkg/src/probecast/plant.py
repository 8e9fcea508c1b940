"""Probe / tether / winch plant: fixed-timestep hydrodynamics.

Depth is positive down. The tether is inextensible, massless, vertical and
neutrally buoyant, so it acts as a unilateral constraint: probe depth can
never exceed paid-out line length. When slack, the probe obeys

    m dv/dt = m g - rho g V - 0.5 rho C_d A v |v|

integrated semi-implicitly (velocity before position) with the drag term
linearised at |v_n| v_{n+1}, which keeps the update unconditionally stable
for drag-dominated sinking and pins the steady state exactly at the
closed-form terminal velocity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .environment import Environment
from .specs import STANDARD_GRAVITY, ProbeSpec, WinchSpec

TAUT_TOLERANCE = 1e-6  # m


class RelayCommand(enum.Enum):
    """Two-channel relay state: drive out, brake, or drive in."""

    PAYOUT = "payout"
    OFF = "off"
    RETRIEVE = "retrieve"


class SimulationFault(RuntimeError):
    """Non-finite force or state; the run halts with a diagnostic."""


@dataclass(frozen=True)
class PlantState:
    """Continuous state of probe, tether, winch drum and carrier vehicle."""

    time: float = 0.0
    line_out: float = 0.0            # m of tether off the spool
    probe_depth: float = 0.0         # m, positive down
    probe_velocity: float = 0.0      # m/s, positive down
    tether_taut: bool = True
    relay: RelayCommand = RelayCommand.OFF
    asv_position: tuple[float, float] = (0.0, 0.0)   # (lat, lon) degrees
    asv_speed: float = 0.0
    asv_heading: float = 0.0


def line_speed(relay: RelayCommand, winch: WinchSpec) -> float:
    """Signed tether feed rate: positive pays line out."""
    if relay is RelayCommand.PAYOUT:
        return winch.payout_speed_m_s
    if relay is RelayCommand.RETRIEVE:
        return -winch.retrieval_speed_m_s
    return 0.0


def terminal_velocity(probe: ProbeSpec, water_density: float,
                      gravity: float = STANDARD_GRAVITY) -> float:
    """Free-sink speed where net weight balances quadratic drag."""
    net_weight = probe.mass_air_kg * gravity - water_density * gravity * probe.volume_m3
    if net_weight < 0:
        raise ValueError(
            f"probe is positively buoyant (net weight {net_weight:.3f} N); "
            "terminal sink speed is undefined")
    return math.sqrt(
        2.0 * net_weight
        / (water_density * probe.drag_coefficient * probe.cross_section_area_m2))


def step(state: PlantState, relay: RelayCommand, env: Environment,
         probe: ProbeSpec, winch: WinchSpec, dt: float) -> PlantState:
    """Advance the plant one fixed timestep under the given relay command."""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")

    rho = env.water_density_kg_m3
    g = STANDARD_GRAVITY
    mass = probe.mass_air_kg

    # winch line kinematics, clamped to the physical spool
    v_line = line_speed(relay, winch)
    new_line = min(max(state.line_out + v_line * dt, 0.0), winch.spool_capacity_m)

    # free probe dynamics (positive down); drag linearised at |v_n| v_{n+1}
    accel0 = g - (rho * probe.volume_m3 / mass) * g
    k_drag = rho * probe.drag_coefficient * probe.cross_section_area_m2 / (2.0 * mass)
    v = state.probe_velocity
    new_v = (v + dt * accel0) / (1.0 + dt * k_drag * abs(v))
    if not math.isfinite(new_v):
        raise SimulationFault(
            f"non-finite probe velocity at t={state.time:.3f}s "
            f"(v={v}, accel0={accel0}, k_drag={k_drag})")
    new_depth = state.probe_depth + dt * new_v

    # unilateral tether constraint: depth <= line_out
    if new_depth >= new_line - TAUT_TOLERANCE:
        new_depth = new_line
        new_v = v_line
        taut = True
    else:
        taut = False

    # hard floor: bathymetry or obstruction top, whichever is shallower
    floor = env.effective_floor(*state.asv_position)
    if new_depth >= floor:
        new_depth = floor
        new_v = 0.0
        taut = abs(new_depth - new_line) <= TAUT_TOLERANCE

    # free surface
    if new_depth <= 0.0:
        new_depth = 0.0
        if new_v < 0.0:
            new_v = 0.0
        taut = abs(new_depth - new_line) <= TAUT_TOLERANCE

    if not (math.isfinite(new_depth) and math.isfinite(new_line)):
        raise SimulationFault(
            f"non-finite plant state at t={state.time:.3f}s "
            f"(depth={new_depth}, line={new_line})")

    return replace(
        state,
        time=state.time + dt,
        line_out=new_line,
        probe_depth=new_depth,
        probe_velocity=new_v,
        tether_taut=taut,
        relay=relay,
    )


def measure_depth(state: PlantState, probe: ProbeSpec,
                  rng: np.random.Generator) -> float:
    """Pressure-derived depth reading: truth plus Gaussian noise, never < 0."""
    reading = state.probe_depth
    if probe.pressure_noise_sigma_m > 0.0:
        reading += rng.normal(0.0, probe.pressure_noise_sigma_m)
    return max(0.0, reading)


def validate_state(state: PlantState, env: Environment, winch: WinchSpec) -> None:
    """Assert the plant invariants; raises SimulationFault on violation."""
    if not (0.0 <= state.line_out <= winch.spool_capacity_m + TAUT_TOLERANCE):
        raise SimulationFault(f"line_out {state.line_out} outside spool range")
    floor = env.effective_floor(*state.asv_position)
    if not (0.0 <= state.probe_depth <= floor + TAUT_TOLERANCE):
        raise SimulationFault(
            f"probe depth {state.probe_depth} outside [0, {floor}]")
    if state.tether_taut:
        if abs(state.probe_depth - state.line_out) > TAUT_TOLERANCE:
            raise SimulationFault(
                f"taut flag with depth {state.probe_depth} != line {state.line_out}")
    elif state.probe_depth >= state.line_out:
        raise SimulationFault(
            f"slack flag with depth {state.probe_depth} >= line {state.line_out}")
