"""Orbit elements, propagation, station geometry and access windows."""
from .access import AccessWindow, find_access_windows, sample_geometry
from .elements import (
    OrbitElements, circular_orbit, format_tle, format_utc, parse_tle,
    parse_tle_file, parse_utc, tle_checksum,
)
from .geometry import GroundStation, TopoSample, topocentric
from .propagate import StateVector, propagate, propagate_many

__all__ = [
    "AccessWindow", "GroundStation", "OrbitElements", "StateVector", "TopoSample",
    "circular_orbit", "find_access_windows", "format_tle", "format_utc", "parse_tle",
    "parse_tle_file", "parse_utc", "propagate", "propagate_many", "sample_geometry",
    "tle_checksum", "topocentric",
]
