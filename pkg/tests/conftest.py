import math
from pathlib import Path

import pytest
from hypothesis import settings

from probecast.asv import ASVModel
from probecast.environment import (Bathymetry, Environment, FieldProfile,
                                   Obstruction, ScalarFieldModel)
from probecast.geo import TangentPlane
from probecast.session import ControllerConfig, SimSession
from probecast.specs import PlatformSpec, ProbeSpec, WinchSpec
from probecast.units import m_per_min

settings.register_profile("suite", deadline=None, max_examples=40)
settings.load_profile("suite")

REPO_ROOT = Path(__file__).resolve().parents[1]

PAYOUT_SPEED = m_per_min(21.336)       # 0.3556 m/s
RETRIEVAL_SPEED = m_per_min(19.812)    # 0.3302 m/s
CONTROL_PERIOD = 0.1


def scenario_path(name: str) -> Path:
    return REPO_ROOT / "scenarios" / f"{name}.yaml"


def make_probe(**overrides) -> ProbeSpec:
    kwargs = dict(mass_air_kg=1.5, volume_m3=0.0008, drag_coefficient=1.0,
                  cross_section_area_m2=0.005, pressure_noise_sigma_m=0.0,
                  sample_period_s=1.0, parameters=("temperature",))
    kwargs.update(overrides)
    return ProbeSpec(**kwargs)


def make_winch(**overrides) -> WinchSpec:
    kwargs = dict(max_payload_kg=11.340, payout_speed_m_s=PAYOUT_SPEED,
                  retrieval_speed_m_s=RETRIEVAL_SPEED, spool_capacity_m=10.0,
                  operating_voltage_v=12.0, min_relay_dwell_s=0.5)
    kwargs.update(overrides)
    return WinchSpec(**kwargs)


def make_platform(**overrides) -> PlatformSpec:
    kwargs = dict(pontoon_volume_each_m3=0.0642, pontoon_count=2,
                  water_density_kg_m3=997.0, gravity_m_s2=9.81,
                  buoyancy_safety_factor=1.2, dry_mass_kg=80.0)
    kwargs.update(overrides)
    return PlatformSpec(**kwargs)


def make_env(bottom_depth: float = 20.0, obstructions=(),
             fields: dict | None = None, density: float = 997.0,
             origin=(0.0, 0.0)) -> Environment:
    if fields is None:
        fields = {"temperature": FieldProfile(surface_value=20.0,
                                              gradient_per_m=-0.3)}
    return Environment(
        water_density_kg_m3=density,
        bathymetry=Bathymetry(kind="constant", depth_m=bottom_depth),
        obstructions=tuple(Obstruction(**o) if isinstance(o, dict) else o
                           for o in obstructions),
        fields=ScalarFieldModel(profiles=dict(fields)),
        plane=TangentPlane(*origin))


def make_session(probe=None, winch=None, env=None, *, seed=0, dt=0.01,
                 initial_line_out=0.0, deadband=0.05, stall_window=5.0,
                 stall_epsilon=0.02, underway_depth=0.3) -> SimSession:
    probe = probe or make_probe()
    winch = winch or make_winch()
    env = env or make_env()
    asv = ASVModel(max_speed_m_s=1.5,
                   position=(env.plane.lat0, env.plane.lon0))
    return SimSession(
        probe=probe, winch=winch, env=env, asv=asv, seed=seed, dt=dt,
        controller_config=ControllerConfig(
            deadband_m=deadband, stall_window_s=stall_window,
            stall_epsilon_m=stall_epsilon, underway_depth_m=underway_depth),
        initial_line_out=initial_line_out)


def relay_transitions(history):
    """[(time, relay)] change events from a [(time, relay)] trace."""
    events = []
    previous = None
    for t, relay in history:
        if relay is not previous:
            events.append((t, relay))
            previous = relay
    return events


def terminal_velocity_oracle(net_weight_n: float, density: float,
                             drag_coefficient: float, area: float) -> float:
    """Closed-form free-sink speed, independent of the integrator."""
    return math.sqrt(2.0 * net_weight_n
                     / (density * drag_coefficient * area))


@pytest.fixture
def lake_scenario():
    from probecast.scenario import load_scenario
    return load_scenario(scenario_path("lake_hertel"))


@pytest.fixture
def vegetation_scenario():
    from probecast.scenario import load_scenario
    return load_scenario(scenario_path("vegetation_stall"))
