"""Scenario documents: one YAML file describes a complete reproducible run.

The schema is strict: unknown keys are errors, because a silently ignored
typo in a physics configuration is worse than a loud failure. Winch speeds
are written in m/min as on the manufacturer data sheet and converted to the
internal m/s representation at load time.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import jsonschema
import yaml

from .asv import ASVModel
from .environment import (Bathymetry, Environment, FieldProfile, Obstruction,
                          ScalarFieldModel)
from .geo import TangentPlane
from .mission import Cast, MissionPlan, StationLeg, TransitLeg
from .session import ControllerConfig, SimSession
from .specs import PlatformSpec, ProbeSpec, StructuralCheck, WinchSpec
from .units import m_per_min

SCENARIO_VERSION = 1


class ScenarioError(ValueError):
    """Unreadable, unschematic or internally inconsistent scenario."""


_LATLON = {
    "type": "object",
    "properties": {"lat": {"type": "number"}, "lon": {"type": "number"}},
    "required": ["lat", "lon"],
    "additionalProperties": False,
}

_FIELD_PROFILE = {
    "type": "object",
    "properties": {
        "surface_value": {"type": "number"},
        "gradient_per_m": {"type": "number"},
        "cline_depth_m": {"type": ["number", "null"]},
        "cline_drop": {"type": "number"},
        "cline_width_m": {"type": "number", "exclusiveMinimum": 0},
        "horizontal_amplitude": {"type": "number"},
        "horizontal_wavelength_m": {"type": "number", "exclusiveMinimum": 0},
        "noise_sigma": {"type": "number", "minimum": 0},
    },
    "required": ["surface_value"],
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "scenario_version": {"const": SCENARIO_VERSION},
        "name": {"type": "string", "minLength": 1},
        "seed": {"type": "integer"},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "pacing": {"enum": ["fast", "realtime"]},
        "origin": _LATLON,
        "initial_line_out_m": {"type": "number", "minimum": 0},
        "probe": {
            "type": "object",
            "properties": {
                "mass_air_kg": {"type": "number"},
                "volume_m3": {"type": "number"},
                "drag_coefficient": {"type": "number"},
                "cross_section_area_m2": {"type": "number"},
                "pressure_noise_sigma_m": {"type": "number"},
                "sample_period_s": {"type": "number"},
                "parameters": {"type": "array", "minItems": 1,
                               "items": {"type": "string"}},
            },
            "required": ["mass_air_kg", "volume_m3", "drag_coefficient",
                         "cross_section_area_m2", "parameters"],
            "additionalProperties": False,
        },
        "winch": {
            "type": "object",
            "properties": {
                "max_payload_kg": {"type": "number"},
                "payout_speed_m_per_min": {"type": "number"},
                "retrieval_speed_m_per_min": {"type": "number"},
                "spool_capacity_m": {"type": "number"},
                "operating_voltage_v": {"type": "number"},
                "min_relay_dwell_s": {"type": "number"},
            },
            "required": ["max_payload_kg", "payout_speed_m_per_min",
                         "retrieval_speed_m_per_min"],
            "additionalProperties": False,
        },
        "platform": {
            "type": "object",
            "properties": {
                "pontoon_volume_each_m3": {"type": "number"},
                "pontoon_count": {"type": "integer"},
                "water_density_kg_m3": {"type": "number"},
                "gravity_m_s2": {"type": "number"},
                "buoyancy_safety_factor": {"type": "number"},
                "dry_mass_kg": {"type": "number"},
            },
            "required": ["pontoon_volume_each_m3"],
            "additionalProperties": False,
        },
        "structure": {
            "type": "object",
            "properties": {
                "yield_strength_mpa": {"type": "number"},
                "maximum_stress_mpa": {"type": "number"},
            },
            "required": ["yield_strength_mpa", "maximum_stress_mpa"],
            "additionalProperties": False,
        },
        "asv": {
            "type": "object",
            "properties": {
                "max_speed_m_s": {"type": "number"},
                "station_keep_radius_m": {"type": "number"},
                "start": _LATLON,
                "drift_speed_m_s": {"type": "number", "minimum": 0},
                "drift_bearing_rad": {"type": "number"},
            },
            "additionalProperties": False,
        },
        "controller": {
            "type": "object",
            "properties": {
                "control_rate_hz": {"type": "number", "exclusiveMinimum": 0},
                "deadband_m": {"type": "number", "exclusiveMinimum": 0},
                "stall_window_s": {"type": "number", "exclusiveMinimum": 0},
                "stall_epsilon_m": {"type": "number", "exclusiveMinimum": 0},
                "underway_depth_m": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "environment": {
            "type": "object",
            "properties": {
                "water_density_kg_m3": {"type": "number"},
                "bathymetry": {
                    "type": "object",
                    "properties": {
                        "kind": {"enum": ["constant", "basin"]},
                        "depth_m": {"type": "number"},
                        "center": _LATLON,
                        "max_depth_m": {"type": "number"},
                        "edge_depth_m": {"type": "number"},
                        "radius_m": {"type": "number"},
                    },
                    "required": ["kind"],
                    "additionalProperties": False,
                },
                "obstructions": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "lat": {"type": "number"},
                            "lon": {"type": "number"},
                            "radius_m": {"type": "number"},
                            "top_depth_m": {"type": "number"},
                        },
                        "required": ["lat", "lon", "radius_m", "top_depth_m"],
                        "additionalProperties": False,
                    },
                },
                "fields": {
                    "type": "object",
                    "additionalProperties": _FIELD_PROFILE,
                },
            },
            "required": ["bathymetry", "fields"],
            "additionalProperties": False,
        },
        "mission": {
            "type": "object",
            "properties": {
                "legs": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "properties": {
                            "transit": {
                                "type": "object",
                                "properties": {
                                    "to": _LATLON,
                                    "speed_m_s": {"type": "number"},
                                },
                                "required": ["to", "speed_m_s"],
                                "additionalProperties": False,
                            },
                            "station": {
                                "type": "object",
                                "properties": {
                                    "hold": _LATLON,
                                    "casts": {
                                        "type": "array",
                                        "items": {
                                            "type": "object",
                                            "properties": {
                                                "target_depth_m":
                                                    {"type": "number"},
                                                "dwell_s": {"type": "number"},
                                            },
                                            "required": ["target_depth_m",
                                                         "dwell_s"],
                                            "additionalProperties": False,
                                        },
                                    },
                                },
                                "required": ["hold", "casts"],
                                "additionalProperties": False,
                            },
                        },
                        "minProperties": 1,
                        "maxProperties": 1,
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["legs"],
            "additionalProperties": False,
        },
        "telemetry": {
            "type": "object",
            "properties": {
                "port": {"type": "integer", "minimum": 0, "maximum": 65535},
                "broadcast_rate_hz": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "required": ["scenario_version", "name", "origin", "probe", "winch",
                 "platform", "structure", "environment", "mission"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    dt: float
    pacing: str
    probe: ProbeSpec
    winch: WinchSpec
    platform: PlatformSpec
    structure: StructuralCheck
    asv: ASVModel
    env: Environment
    plan: MissionPlan
    controller: ControllerConfig
    initial_line_out_m: float
    telemetry_port: int
    broadcast_rate_hz: float

    def config_hash(self) -> str:
        """Stable digest of the fully resolved configuration plus seed."""
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


def _latlon(obj: dict) -> tuple[float, float]:
    return (float(obj["lat"]), float(obj["lon"]))


def parse_scenario(doc: dict, source: str = "<memory>") -> Scenario:
    """Validate a loaded document and build the typed scenario."""
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        first = errors[0]
        where = ".".join(str(p) for p in first.path) or "<root>"
        raise ScenarioError(f"{source}: at {where}: {first.message}")

    origin = _latlon(doc["origin"])
    plane = TangentPlane(*origin)

    p = doc["probe"]
    probe = ProbeSpec(
        mass_air_kg=p["mass_air_kg"], volume_m3=p["volume_m3"],
        drag_coefficient=p["drag_coefficient"],
        cross_section_area_m2=p["cross_section_area_m2"],
        pressure_noise_sigma_m=p.get("pressure_noise_sigma_m", 0.01),
        sample_period_s=p.get("sample_period_s", 1.0),
        parameters=tuple(p["parameters"]))

    w = doc["winch"]
    winch = WinchSpec(
        max_payload_kg=w["max_payload_kg"],
        payout_speed_m_s=m_per_min(w["payout_speed_m_per_min"]),
        retrieval_speed_m_s=m_per_min(w["retrieval_speed_m_per_min"]),
        spool_capacity_m=w.get("spool_capacity_m", 10.0),
        operating_voltage_v=w.get("operating_voltage_v", 12.0),
        min_relay_dwell_s=w.get("min_relay_dwell_s", 0.5))

    pf = doc["platform"]
    platform = PlatformSpec(
        pontoon_volume_each_m3=pf["pontoon_volume_each_m3"],
        pontoon_count=pf.get("pontoon_count", 2),
        water_density_kg_m3=pf.get("water_density_kg_m3", 997.0),
        gravity_m_s2=pf.get("gravity_m_s2", 9.81),
        buoyancy_safety_factor=pf.get("buoyancy_safety_factor", 1.2),
        dry_mass_kg=pf.get("dry_mass_kg", 0.0))

    st = doc["structure"]
    structure = StructuralCheck(
        yield_strength_mpa=st["yield_strength_mpa"],
        maximum_stress_mpa=st["maximum_stress_mpa"])

    a = doc.get("asv", {})
    asv = ASVModel(
        max_speed_m_s=a.get("max_speed_m_s", 1.5),
        position=_latlon(a["start"]) if "start" in a else origin,
        station_keep_radius_m=a.get("station_keep_radius_m", 2.0),
        drift_speed_m_s=a.get("drift_speed_m_s", 0.0),
        drift_bearing_rad=a.get("drift_bearing_rad", 0.0))

    env_doc = doc["environment"]
    b = env_doc["bathymetry"]
    if b["kind"] == "constant":
        if "depth_m" not in b:
            raise ScenarioError(f"{source}: constant bathymetry needs depth_m")
        bathymetry = Bathymetry(kind="constant", depth_m=b["depth_m"])
    else:
        for key in ("max_depth_m", "edge_depth_m", "radius_m"):
            if key not in b:
                raise ScenarioError(f"{source}: basin bathymetry needs {key}")
        bathymetry = Bathymetry(
            kind="basin", center=_latlon(b["center"]) if "center" in b
            else origin, max_depth_m=b["max_depth_m"],
            edge_depth_m=b["edge_depth_m"], radius_m=b["radius_m"])

    obstructions = tuple(
        Obstruction(lat=o["lat"], lon=o["lon"], radius_m=o["radius_m"],
                    top_depth_m=o["top_depth_m"])
        for o in env_doc.get("obstructions", []))

    profiles = {}
    for name, f in env_doc["fields"].items():
        profiles[name] = FieldProfile(
            surface_value=f["surface_value"],
            gradient_per_m=f.get("gradient_per_m", 0.0),
            cline_depth_m=f.get("cline_depth_m"),
            cline_drop=f.get("cline_drop", 0.0),
            cline_width_m=f.get("cline_width_m", 1.0),
            horizontal_amplitude=f.get("horizontal_amplitude", 0.0),
            horizontal_wavelength_m=f.get("horizontal_wavelength_m", 500.0),
            noise_sigma=f.get("noise_sigma", 0.0))

    missing = set(probe.parameters) - set(profiles)
    if missing:
        raise ScenarioError(
            f"{source}: probe parameters without a field profile: "
            f"{sorted(missing)}")
    extra = set(profiles) - set(probe.parameters)
    if extra:
        raise ScenarioError(
            f"{source}: field profiles for parameters the probe does not "
            f"carry: {sorted(extra)}")

    try:
        env = Environment(
            water_density_kg_m3=env_doc.get("water_density_kg_m3", 997.0),
            bathymetry=bathymetry, obstructions=obstructions,
            fields=ScalarFieldModel(profiles=profiles), plane=plane)
    except ValueError as exc:
        raise ScenarioError(f"{source}: {exc}") from exc

    legs = []
    for leg_doc in doc["mission"]["legs"]:
        if "transit" in leg_doc:
            t = leg_doc["transit"]
            legs.append(TransitLeg(to=_latlon(t["to"]),
                                   speed_m_s=t["speed_m_s"]))
        else:
            s = leg_doc["station"]
            legs.append(StationLeg(
                hold_position=_latlon(s["hold"]),
                casts=tuple(Cast(target_depth_m=c["target_depth_m"],
                                 dwell_s=c["dwell_s"]) for c in s["casts"])))
    plan = MissionPlan(legs=tuple(legs))
    try:
        plan.validate(winch, probe)
    except ValueError as exc:
        raise ScenarioError(f"{source}: {exc}") from exc

    c = doc.get("controller", {})
    controller = ControllerConfig(
        control_rate_hz=c.get("control_rate_hz", 10.0),
        deadband_m=c.get("deadband_m", 0.05),
        stall_window_s=c.get("stall_window_s", 5.0),
        stall_epsilon_m=c.get("stall_epsilon_m", 0.02),
        underway_depth_m=c.get("underway_depth_m", 0.3))

    tele = doc.get("telemetry", {})
    return Scenario(
        name=doc["name"], seed=doc.get("seed", 0), dt=doc.get("dt", 0.01),
        pacing=doc.get("pacing", "fast"), probe=probe, winch=winch,
        platform=platform, structure=structure, asv=asv, env=env, plan=plan,
        controller=controller,
        initial_line_out_m=doc.get("initial_line_out_m", 0.3),
        telemetry_port=tele.get("port", 8765),
        broadcast_rate_hz=tele.get("broadcast_rate_hz", 10.0))


def load_scenario(path: Path | str) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "unknown line"
        raise ScenarioError(f"{path}: YAML parse error at {where}: "
                            f"{getattr(exc, 'problem', exc)}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: scenario must be a mapping")
    return parse_scenario(doc, source=str(path))


def build_session(scenario: Scenario, *, seed: int | None = None,
                  dt: float | None = None) -> SimSession:
    """Instantiate the runnable session, honoring seed/dt overrides."""
    return SimSession(
        probe=scenario.probe, winch=scenario.winch, env=scenario.env,
        asv=scenario.asv,
        seed=scenario.seed if seed is None else seed,
        dt=scenario.dt if dt is None else dt,
        controller_config=scenario.controller,
        initial_line_out=scenario.initial_line_out_m,
        broadcast_rate_hz=scenario.broadcast_rate_hz)
