"""Common-visibility windows for one or two ground stations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, EmptySearchError
from .elements import OrbitElements
from .geometry import GroundStation, TopoSample, look_angles
from .propagate import propagate_many

_BISECTION_FRACTION = 0.01


@dataclass(frozen=True)
class AccessWindow:
    start: float
    end: float
    samples: tuple  # of tuples (TopoSample per station), time ordered

    @property
    def duration_s(self) -> float:
        return self.end - self.start

    @property
    def times(self) -> np.ndarray:
        return np.array([s[0].t for s in self.samples])

    def column(self, station_index: int, attr: str) -> np.ndarray:
        return np.array([getattr(s[station_index], attr) for s in self.samples])


def sample_geometry(el: OrbitElements, stations, t, mode: str = "j2") -> list[tuple]:
    """Look angles for every station at each time; returns arrays per station."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    pos, vel = propagate_many(el, t, mode)
    return [look_angles(t, pos, vel, st) for st in stations]


def _min_elevation(el, stations, t, mode):
    geo = sample_geometry(el, stations, t, mode)
    return np.min(np.stack([g[0] for g in geo]), axis=0)


def _bisect(el, stations, min_el, inside: float, outside: float, tol: float, mode: str) -> float:
    """Shrink [inside, outside] around the elevation crossing; return the inside end."""
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if _min_elevation(el, stations, [mid], mode)[0] >= min_el:
            inside = mid
        else:
            outside = mid
    return inside


def window_samples(el, stations, start: float, end: float, step_s: float, mode: str = "j2") -> tuple:
    n = int(np.floor((end - start) / step_s + 1e-9)) + 1
    t = start + step_s * np.arange(n)
    geo = sample_geometry(el, stations, t, mode)
    rows = []
    for k in range(n):
        rows.append(tuple(
            TopoSample(float(t[k]), float(g[0][k]), float(g[1][k]), float(g[2][k]), float(g[3][k]))
            for g in geo
        ))
    return tuple(rows)


def find_access_windows(el: OrbitElements, stations, min_elevation: float, search,
                        step_s: float = 1.0, mode: str = "j2") -> list[AccessWindow]:
    """Maximal intervals where every station sees the satellite at or above ``min_elevation``.

    Parameters
    ----------
    stations : sequence of GroundStation
        One station gives single-link passes; two give common-visibility windows.
    search : (t0, t1)
        UTC timestamps bounding the search.
    step_s : float
        Coarse scan and sample spacing, 0 < step_s <= 10. Window edges are
        refined by bisection to step_s/100.
    """
    stations = [stations] if isinstance(stations, GroundStation) else list(stations)
    if not 1 <= len(stations) <= 2:
        raise DomainError("expected one or two ground stations")
    t0, t1 = float(search[0]), float(search[1])
    if not t1 > t0:
        raise EmptySearchError(f"search interval [{t0}, {t1}] is empty")
    if not 0.0 < step_s <= 10.0:
        raise DomainError(f"step_s {step_s} outside (0, 10]")

    n = int(np.ceil((t1 - t0) / step_s)) + 1
    grid = np.minimum(t0 + step_s * np.arange(n), t1)
    visible = _min_elevation(el, stations, grid, mode) >= min_elevation
    tol = step_s * _BISECTION_FRACTION

    windows = []
    edges = np.flatnonzero(np.diff(visible.astype(np.int8)))
    starts = list(edges[~visible[edges]] + 1)
    ends = list(edges[visible[edges]])
    if visible[0]:
        starts.insert(0, 0)
    if visible[-1]:
        ends.append(n - 1)
    for i0, i1 in zip(starts, ends):
        start = grid[i0] if i0 == 0 else _bisect(el, stations, min_elevation, grid[i0], grid[i0 - 1], tol, mode)
        end = grid[i1] if i1 == n - 1 else _bisect(el, stations, min_elevation, grid[i1], grid[i1 + 1], tol, mode)
        if end <= start:
            continue
        samples = window_samples(el, stations, start, end, step_s, mode)
        windows.append(AccessWindow(float(start), float(end), samples))
    return windows
