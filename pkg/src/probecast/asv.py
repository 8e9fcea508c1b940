"""Kinematic surface-vehicle model: point boat, no hull dynamics."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .geo import TangentPlane


@dataclass(frozen=True)
class ASVModel:
    max_speed_m_s: float
    position: tuple[float, float]        # (lat, lon)
    heading_rad: float = 0.0
    station_keep_radius_m: float = 2.0
    # lateral disturbance while the probe is deployed; off by default
    drift_speed_m_s: float = 0.0
    drift_bearing_rad: float = 0.0

    def __post_init__(self):
        if self.max_speed_m_s <= 0:
            raise ValueError("ASV max_speed_m_s must be > 0")
        if self.station_keep_radius_m <= 0:
            raise ValueError("ASV station_keep_radius_m must be > 0")
        if self.drift_speed_m_s < 0:
            raise ValueError("ASV drift_speed_m_s must be >= 0")


def advance_asv(model: ASVModel, goal: tuple[float, float], dt: float,
                plane: TangentPlane, speed: float | None = None) -> ASVModel:
    """Move toward the goal for one timestep without overshooting.

    Inside the station-keep radius the vehicle holds position. Speed is
    capped at the model's max regardless of the requested leg speed.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    distance = plane.distance_m(model.position, goal)
    if distance <= model.station_keep_radius_m:
        return model
    v = model.max_speed_m_s if speed is None else min(speed, model.max_speed_m_s)
    travel = min(v * dt, distance)
    bearing = plane.bearing_rad(model.position, goal)
    east, north = plane.to_xy(*model.position)
    east += travel * math.sin(bearing)
    north += travel * math.cos(bearing)
    return replace(model, position=plane.to_latlon(east, north),
                   heading_rad=bearing)


def drift_asv(model: ASVModel, dt: float, plane: TangentPlane) -> ASVModel:
    """Apply the configured lateral drift disturbance for one timestep."""
    if model.drift_speed_m_s <= 0.0:
        return model
    east, north = plane.to_xy(*model.position)
    east += model.drift_speed_m_s * dt * math.sin(model.drift_bearing_rad)
    north += model.drift_speed_m_s * dt * math.cos(model.drift_bearing_rad)
    return replace(model, position=plane.to_latlon(east, north))
