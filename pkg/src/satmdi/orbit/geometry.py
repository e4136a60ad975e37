"""Earth rotation, WGS-84 station positions and station-relative look angles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import RangeError
from .propagate import StateVector

WGS84_A = 6378.137  # km
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)

_JD_UNIX_EPOCH = 2440587.5
_JD_J2000 = 2451545.0
# dGMST/dt of the IAU-1982 polynomial's linear term, rad per second of UT1
_GMST_LIN = (876600.0 * 3600.0 + 8640184.812866) / (36525.0 * 86400.0)


@dataclass(frozen=True)
class GroundStation:
    name: str
    latitude: float  # rad, geodetic
    longitude: float  # rad
    altitude_m: float = 0.0

    def __post_init__(self):
        if abs(self.latitude) > math.pi / 2:
            raise RangeError(f"{self.name}: |latitude| exceeds π/2")
        lon = math.remainder(self.longitude, 2.0 * math.pi)
        if lon == -math.pi:
            lon = math.pi
        object.__setattr__(self, "longitude", lon)

    @classmethod
    def from_degrees(cls, name: str, lat_deg: float, lon_deg: float, altitude_m: float = 0.0):
        return cls(name, math.radians(lat_deg), math.radians(lon_deg), altitude_m)

    def ecef_km(self) -> np.ndarray:
        return geodetic_to_ecef(self.latitude, self.longitude, self.altitude_m / 1000.0)


@dataclass(frozen=True)
class TopoSample:
    t: float
    elevation: float  # rad
    azimuth: float  # rad, clockwise from north
    range_m: float
    range_rate_mps: float  # positive = receding


def gmst(t) -> np.ndarray:
    """Greenwich mean sidereal angle (rad) at POSIX UTC time(s), UT1 ≈ UTC."""
    t = np.asarray(t, dtype=float)
    d = t / 86400.0 + (_JD_UNIX_EPOCH - _JD_J2000)
    T = d / 36525.0
    seconds = 67310.54841 + (876600.0 * 3600.0 + 8640184.812866) * T + 0.093104 * T ** 2 - 6.2e-6 * T ** 3
    return np.mod(seconds % 86400.0 / 240.0 * math.pi / 180.0, 2.0 * math.pi)


def gmst_rate(t) -> np.ndarray:
    """Time derivative of :func:`gmst` in rad/s."""
    t = np.asarray(t, dtype=float)
    T = (t / 86400.0 + (_JD_UNIX_EPOCH - _JD_J2000)) / 36525.0
    dsec_dT = (876600.0 * 3600.0 + 8640184.812866) + 2 * 0.093104 * T - 3 * 6.2e-6 * T ** 2
    return dsec_dT / (36525.0 * 86400.0) * (2.0 * math.pi / 86400.0)


def geodetic_to_ecef(lat, lon, h_km) -> np.ndarray:
    s = math.sin(lat)
    N = WGS84_A / math.sqrt(1.0 - WGS84_E2 * s * s)
    return np.array([
        (N + h_km) * math.cos(lat) * math.cos(lon),
        (N + h_km) * math.cos(lat) * math.sin(lon),
        (N * (1.0 - WGS84_E2) + h_km) * s,
    ])


def enu_basis(lat: float, lon: float) -> np.ndarray:
    """Rows are the east, north and up unit vectors in Earth-fixed axes."""
    sl, cl = math.sin(lat), math.cos(lat)
    so, co = math.sin(lon), math.cos(lon)
    return np.array([
        [-so, co, 0.0],
        [-sl * co, -sl * so, cl],
        [cl * co, cl * so, sl],
    ])


def eci_to_ecef(t, pos, vel) -> tuple[np.ndarray, np.ndarray]:
    """Rotate inertial state(s) into the Earth-fixed frame (rows of ``pos``/``vel``)."""
    theta = np.atleast_1d(gmst(t))
    w = np.atleast_1d(gmst_rate(t))
    c, s = np.cos(theta), np.sin(theta)
    pos = np.atleast_2d(pos)
    vel = np.atleast_2d(vel)
    x = c * pos[:, 0] + s * pos[:, 1]
    y = -s * pos[:, 0] + c * pos[:, 1]
    r = np.stack([x, y, pos[:, 2]], axis=-1)
    vx = c * vel[:, 0] + s * vel[:, 1] + w * y
    vy = -s * vel[:, 0] + c * vel[:, 1] - w * x
    v = np.stack([vx, vy, vel[:, 2]], axis=-1)
    return r, v


def ecef_to_eci(t, pos, vel) -> tuple[np.ndarray, np.ndarray]:
    theta = np.atleast_1d(gmst(t))
    w = np.atleast_1d(gmst_rate(t))
    c, s = np.cos(theta), np.sin(theta)
    pos = np.atleast_2d(pos)
    vel = np.atleast_2d(vel)
    # undo the Earth-rotation term before rotating back
    vx = vel[:, 0] - w * pos[:, 1]
    vy = vel[:, 1] + w * pos[:, 0]
    r = np.stack([c * pos[:, 0] - s * pos[:, 1], s * pos[:, 0] + c * pos[:, 1], pos[:, 2]], axis=-1)
    v = np.stack([c * vx - s * vy, s * vx + c * vy, vel[:, 2]], axis=-1)
    return r, v


def look_angles(t, pos, vel, station: GroundStation):
    """Vectorised elevation, azimuth (rad), range (m) and range rate (m/s)."""
    r, v = eci_to_ecef(t, pos, vel)
    rho = r - station.ecef_km()
    enu = rho @ enu_basis(station.latitude, station.longitude).T
    rng = np.linalg.norm(rho, axis=1)
    elevation = np.arcsin(np.clip(enu[:, 2] / rng, -1.0, 1.0))
    azimuth = np.mod(np.arctan2(enu[:, 0], enu[:, 1]), 2.0 * np.pi)
    range_rate = np.einsum("ij,ij->i", rho, v) / rng
    return elevation, azimuth, rng * 1000.0, range_rate * 1000.0


def topocentric(state: StateVector, station: GroundStation) -> TopoSample:
    el, az, rng, rr = look_angles(state.t, state.position, state.velocity, station)
    return TopoSample(state.t, float(el[0]), float(az[0]), float(rng[0]), float(rr[0]))


def line_of_sight_enu(elevation: float, azimuth: float) -> np.ndarray:
    ce = math.cos(elevation)
    return np.array([ce * math.sin(azimuth), ce * math.cos(azimuth), math.sin(elevation)])
