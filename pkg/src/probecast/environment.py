"""Synthetic lake environment: bathymetry, obstructions, scalar fields.

Field values are a pure function of (seed, lat, lon, depth, parameter) so
that repeated sampling at the same point always returns the same number,
independent of call order. Noise is hash-derived for the same reason; no
stateful RNG is involved.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

from .geo import TangentPlane


class WaterColumnError(ValueError):
    """Raised for physically inconsistent environment configuration or queries."""


@dataclass(frozen=True)
class Bathymetry:
    """Bottom depth model.

    kind "constant": flat bottom at depth_m.
    kind "basin": bowl with max_depth_m at the center, shoaling linearly to
    edge_depth_m at radius_m from the center and beyond.
    """

    kind: str = "constant"
    depth_m: float = 10.0
    center: tuple[float, float] = (0.0, 0.0)
    max_depth_m: float = 10.0
    edge_depth_m: float = 2.0
    radius_m: float = 500.0

    def depth_at(self, lat: float, lon: float, plane: TangentPlane) -> float:
        if self.kind == "constant":
            depth = self.depth_m
        elif self.kind == "basin":
            r = plane.distance_m(self.center, (lat, lon))
            frac = min(1.0, r / self.radius_m)
            depth = self.max_depth_m + (self.edge_depth_m - self.max_depth_m) * frac
        else:
            raise WaterColumnError(f"unknown bathymetry kind: {self.kind!r}")
        if depth <= 0:
            raise WaterColumnError(
                f"bathymetry gives non-positive bottom depth {depth} at "
                f"({lat}, {lon})")
        return depth


@dataclass(frozen=True)
class Obstruction:
    """Cylindrical patch (e.g. vegetation) capping probe depth inside it."""

    lat: float
    lon: float
    radius_m: float
    top_depth_m: float

    def __post_init__(self):
        if self.radius_m <= 0:
            raise WaterColumnError("obstruction radius_m must be > 0")
        if self.top_depth_m <= 0:
            raise WaterColumnError("obstruction top_depth_m must be > 0")


@dataclass(frozen=True)
class FieldProfile:
    """One parameter's synthetic structure.

    Vertical part: surface_value + gradient_per_m * depth, plus an optional
    thermocline-style step (linear ramp of cline_drop across cline_width_m
    centred at cline_depth_m). Horizontal part: smooth low-frequency
    sinusoid over the tangent plane. Noise: hash-derived Gaussian.
    """

    surface_value: float
    gradient_per_m: float = 0.0
    cline_depth_m: float | None = None
    cline_drop: float = 0.0
    cline_width_m: float = 1.0
    horizontal_amplitude: float = 0.0
    horizontal_wavelength_m: float = 500.0
    noise_sigma: float = 0.0

    def vertical_value(self, depth: float) -> float:
        v = self.surface_value + self.gradient_per_m * depth
        if self.cline_depth_m is not None and self.cline_drop != 0.0:
            half = self.cline_width_m / 2.0
            t = (depth - (self.cline_depth_m - half)) / self.cline_width_m
            t = min(1.0, max(0.0, t))
            v += self.cline_drop * t
        return v

    def horizontal_value(self, east: float, north: float) -> float:
        if self.horizontal_amplitude == 0.0:
            return 0.0
        k = 2.0 * math.pi / self.horizontal_wavelength_m
        return self.horizontal_amplitude * math.sin(k * east) * math.cos(k * north)


def _hash_noise(seed: int, parameter: str, lat: float, lon: float,
                depth: float) -> float:
    """Standard normal deviate, a pure function of its arguments."""
    payload = parameter.encode() + struct.pack("<qddd", seed, lat, lon, depth)
    digest = hashlib.blake2b(payload, digest_size=16).digest()
    u1 = (int.from_bytes(digest[:8], "little") + 1) / (2**64 + 2)
    u2 = int.from_bytes(digest[8:], "little") / 2**64
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@dataclass(frozen=True)
class ScalarFieldModel:
    """Per-parameter synthetic water-column fields."""

    profiles: dict[str, FieldProfile] = field(default_factory=dict)

    def value(self, parameter: str, seed: int, lat: float, lon: float,
              depth: float, plane: TangentPlane) -> float:
        profile = self.profiles[parameter]
        east, north = plane.to_xy(lat, lon)
        v = profile.vertical_value(depth) + profile.horizontal_value(east, north)
        if profile.noise_sigma > 0.0:
            v += profile.noise_sigma * _hash_noise(seed, parameter, lat, lon, depth)
        return v


@dataclass(frozen=True)
class Environment:
    """Water column the probe moves through."""

    water_density_kg_m3: float
    bathymetry: Bathymetry
    obstructions: tuple[Obstruction, ...]
    fields: ScalarFieldModel
    plane: TangentPlane

    def __post_init__(self):
        if self.water_density_kg_m3 <= 0:
            raise WaterColumnError("water density must be > 0")
        object.__setattr__(self, "obstructions", tuple(self.obstructions))
        for obs in self.obstructions:
            bottom = self.bathymetry.depth_at(obs.lat, obs.lon, self.plane)
            if obs.top_depth_m >= bottom:
                raise WaterColumnError(
                    f"obstruction top {obs.top_depth_m} m is not above the "
                    f"{bottom:.2f} m bottom at ({obs.lat}, {obs.lon})")

    def bottom_depth(self, lat: float, lon: float) -> float:
        return self.bathymetry.depth_at(lat, lon, self.plane)

    def effective_floor(self, lat: float, lon: float) -> float:
        """Depth the probe cannot pass: bottom, or an obstruction top."""
        floor = self.bottom_depth(lat, lon)
        for obs in self.obstructions:
            if self.plane.distance_m((obs.lat, obs.lon), (lat, lon)) <= obs.radius_m:
                floor = min(floor, obs.top_depth_m)
        return floor


def sample_fields(env: Environment, lat: float, lon: float, depth: float,
                  time: float, seed: int) -> dict[str, float]:
    """All configured parameters at one point; deterministic per arguments.

    The time argument is part of the sampling contract but the synthetic
    fields are static, so it does not enter the value.
    """
    del time
    bottom = env.bottom_depth(lat, lon)
    if depth < 0 or depth > bottom:
        raise WaterColumnError(
            f"sample depth {depth} m outside water column (bottom {bottom:.2f} m)")
    return {
        name: env.fields.value(name, seed, lat, lon, depth, env.plane)
        for name in env.fields.profiles
    }
