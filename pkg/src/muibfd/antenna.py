"""Parametric directional antenna patterns and pointing geometry.

The gain model is the parabolic-in-dB main lobe used by 3GPP-style element
patterns, with a flat side/back-lobe floor::

    G = peak - min(12 (daz/hpbw_az)^2 + 12 (del/hpbw_el)^2, floor_atten)

``daz`` and ``del`` are angular offsets from boresight measured in the
antenna's own azimuth and elevation planes (zero roll).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import GeometryError

__all__ = [
    "AntennaPattern",
    "Pointing",
    "normalize_azimuth",
    "point_at",
    "boresight_vector",
    "angular_offsets",
    "offset_angle",
    "attenuation_db",
    "gain_dbi",
]


def normalize_azimuth(azimuth):
    """Wrap an azimuth in degrees into [-180, 180)."""
    if -180.0 <= azimuth < 180.0:
        return azimuth
    a = math.fmod(azimuth + 180.0, 360.0)
    if a < 0.0:
        a += 360.0
    return a - 180.0


@dataclass(frozen=True)
class AntennaPattern:
    """Peak gain (dBi), half-power beamwidths (deg) and floor depth (dB)."""

    peak_gain: float
    hpbw_az: float
    hpbw_el: float
    floor_atten: float

    def __post_init__(self):
        for name in ("peak_gain", "hpbw_az", "hpbw_el", "floor_atten"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.peak_gain < 0:
            raise ValueError("peak_gain must be >= 0 dBi")
        for name in ("hpbw_az", "hpbw_el"):
            if not 0.0 < getattr(self, name) <= 180.0:
                raise ValueError(f"{name} must lie in (0, 180] degrees")
        if self.floor_atten <= 3.0:
            raise ValueError("floor_atten must exceed 3 dB")


@dataclass(frozen=True)
class Pointing:
    """Boresight direction: azimuth from +x toward +y, elevation above horizontal."""

    azimuth: float
    elevation: float

    def __post_init__(self):
        if not (math.isfinite(self.azimuth) and math.isfinite(self.elevation)):
            raise ValueError("pointing angles must be finite")
        if not -90.0 <= self.elevation <= 90.0:
            raise ValueError("elevation must lie in [-90, 90] degrees")
        object.__setattr__(self, "azimuth", normalize_azimuth(self.azimuth))


def _direction(origin, target):
    dx = target[0] - origin[0]
    dy = target[1] - origin[1]
    dz = target[2] - origin[2]
    return dx, dy, dz


def point_at(origin, target, min_distance=0.0):
    """Pointing that aims a boresight at `target` from `origin`."""
    dx, dy, dz = _direction(origin, target)
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dist == 0.0:
        raise GeometryError("cannot point at a coincident point")
    if dist < min_distance:
        raise GeometryError(
            f"target {dist:.3f} m away is inside the {min_distance} m cutoff")
    az = math.degrees(math.atan2(dy, dx))
    el = math.degrees(math.atan2(dz, math.hypot(dx, dy)))
    return Pointing(az, el)


def boresight_vector(pointing):
    """Unit vector along the boresight."""
    a = math.radians(pointing.azimuth)
    e = math.radians(pointing.elevation)
    return (math.cos(e) * math.cos(a), math.cos(e) * math.sin(a), math.sin(e))


def angular_offsets(pointing, direction):
    """Offsets (daz, del) in degrees of `direction` from the boresight.

    The direction is rotated into the antenna frame (yaw by -azimuth, then
    pitch by -elevation); daz is the azimuth and del the elevation of the
    result. The great-circle angle from boresight is
    ``acos(cos(daz) * cos(del))``.
    """
    x, y, z = direction
    if x == 0.0 and y == 0.0 and z == 0.0:
        raise GeometryError("direction vector must be nonzero")
    a = math.radians(pointing.azimuth)
    e = math.radians(pointing.elevation)
    ca, sa = math.cos(a), math.sin(a)
    ce, se = math.cos(e), math.sin(e)
    x1 = ca * x + sa * y
    v = -sa * x + ca * y
    u = ce * x1 + se * z
    w = -se * x1 + ce * z
    daz = math.degrees(math.atan2(v, u))
    del_ = math.degrees(math.atan2(w, math.hypot(u, v)))
    return daz, del_


def offset_angle(daz, del_):
    """Great-circle angle (deg) corresponding to plane offsets (daz, del)."""
    a = math.radians(daz)
    e = math.radians(del_)
    # haversine-style form stays accurate near zero
    s = math.sin(e / 2.0) ** 2 + math.cos(e) * math.sin(a / 2.0) ** 2
    return math.degrees(2.0 * math.asin(min(1.0, math.sqrt(s))))


def attenuation_db(pattern, daz, del_):
    """Loss below peak (dB) at plane offsets (daz, del)."""
    parabolic = (12.0 * (daz / pattern.hpbw_az) ** 2
                 + 12.0 * (del_ / pattern.hpbw_el) ** 2)
    return min(parabolic, pattern.floor_atten)


def gain_dbi(pattern, pointing, direction):
    """Gain in dBi toward `direction` (a vector relative to the antenna)."""
    daz, del_ = angular_offsets(pointing, direction)
    return pattern.peak_gain - attenuation_db(pattern, daz, del_)
