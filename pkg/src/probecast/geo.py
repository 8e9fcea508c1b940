"""Local tangent-plane geodesy, good enough for lake-scale (< 5 km) work."""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0
_DEG = math.pi / 180.0


@dataclass(frozen=True)
class TangentPlane:
    """Flat east/north frame anchored at a reference latitude/longitude."""

    lat0: float
    lon0: float

    def to_xy(self, lat: float, lon: float) -> tuple[float, float]:
        """(east, north) metres of a fix relative to the origin."""
        east = (lon - self.lon0) * _DEG * EARTH_RADIUS_M * math.cos(self.lat0 * _DEG)
        north = (lat - self.lat0) * _DEG * EARTH_RADIUS_M
        return east, north

    def to_latlon(self, east: float, north: float) -> tuple[float, float]:
        lat = self.lat0 + north / (EARTH_RADIUS_M * _DEG)
        lon = self.lon0 + east / (EARTH_RADIUS_M * math.cos(self.lat0 * _DEG) * _DEG)
        return lat, lon

    def distance_m(self, a: tuple[float, float], b: tuple[float, float]) -> float:
        ax, ay = self.to_xy(*a)
        bx, by = self.to_xy(*b)
        return math.hypot(bx - ax, by - ay)

    def bearing_rad(self, a: tuple[float, float], b: tuple[float, float]) -> float:
        """Bearing from a to b, radians clockwise from north."""
        ax, ay = self.to_xy(*a)
        bx, by = self.to_xy(*b)
        return math.atan2(bx - ax, by - ay)
