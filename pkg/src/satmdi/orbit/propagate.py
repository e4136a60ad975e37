"""Two-body propagation with optional secular J2 drift of the node and perigee."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import PropagationWindowError, RangeError
from .elements import J2, MU_EARTH, R_EARTH, OrbitElements

MAX_SPAN_S = 7 * 86400.0
PROPAGATORS = ("two_body", "j2")


@dataclass(frozen=True)
class StateVector:
    t: float
    position: np.ndarray  # km, inertial
    velocity: np.ndarray  # km/s, inertial

    def __post_init__(self):
        r = float(np.linalg.norm(self.position))
        if not r > R_EARTH:
            raise RangeError(f"|position| = {r:.3f} km is below the Earth's surface")


def solve_kepler(mean_anomaly, e, tol=1e-14, max_iter=50):
    """Eccentric anomaly from mean anomaly by Newton iteration (vectorised)."""
    M = np.asarray(mean_anomaly, dtype=float)
    E = np.where(e < 0.8, M, np.pi * np.ones_like(M))
    for _ in range(max_iter):
        f = E - e * np.sin(E) - M
        dE = f / (1.0 - e * np.cos(E))
        E = E - dE
        if np.all(np.abs(dE) < tol):
            break
    return E


def secular_rates(el: OrbitElements, mode: str = "j2") -> tuple[float, float]:
    """(dΩ/dt, dω/dt) in rad/s; zero in two-body mode."""
    if mode == "two_body":
        return 0.0, 0.0
    if mode != "j2":
        raise ValueError(f"unknown propagator {mode!r}; expected one of {PROPAGATORS}")
    n = el.mean_motion_rad_s
    p = el.semi_major_axis_km * (1.0 - el.eccentricity ** 2)
    k = n * J2 * (R_EARTH / p) ** 2
    ci = math.cos(el.inclination)
    return -1.5 * k * ci, 0.75 * k * (5.0 * ci * ci - 1.0)


def propagate_many(el: OrbitElements, t, mode: str = "j2") -> tuple[np.ndarray, np.ndarray]:
    """Inertial position (km) and velocity (km/s) at each time in ``t``.

    Returns arrays shaped ``(len(t), 3)``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    dt = t - el.epoch
    if np.any(np.abs(dt) > MAX_SPAN_S):
        raise PropagationWindowError(
            f"requested time is {np.max(np.abs(dt)) / 86400:.2f} days from epoch (limit 7)"
        )
    e = el.eccentricity
    a = el.semi_major_axis_km
    n = el.mean_motion_rad_s
    raan_dot, argp_dot = secular_rates(el, mode)

    M = el.mean_anomaly + n * dt
    E = solve_kepler(np.mod(M, 2.0 * np.pi), e)
    cosE, sinE = np.cos(E), np.sin(E)
    sq = math.sqrt(1.0 - e * e)
    # perifocal frame
    xp = a * (cosE - e)
    yp = a * sq * sinE
    r = a * (1.0 - e * cosE)
    vfac = math.sqrt(MU_EARTH * a) / r
    vxp = -vfac * sinE
    vyp = vfac * sq * cosE

    raan = el.raan + raan_dot * dt
    argp = el.arg_perigee + argp_dot * dt
    cO, sO = np.cos(raan), np.sin(raan)
    cw, sw = np.cos(argp), np.sin(argp)
    ci, si = math.cos(el.inclination), math.sin(el.inclination)

    # columns of the perifocal -> inertial rotation
    P = np.stack([cO * cw - sO * sw * ci, sO * cw + cO * sw * ci, sw * si * np.ones_like(cw)], axis=-1)
    Q = np.stack([-cO * sw - sO * cw * ci, -sO * sw + cO * cw * ci, cw * si * np.ones_like(cw)], axis=-1)
    pos = xp[:, None] * P + yp[:, None] * Q
    vel = vxp[:, None] * P + vyp[:, None] * Q
    if raan_dot or argp_dot:
        # frame rotation: node about z, perigee about the orbit normal
        z = np.array([0.0, 0.0, 1.0])
        h = np.stack([sO * si, -cO * si, ci * np.ones_like(cO)], axis=-1)
        vel = vel + raan_dot * np.cross(z, pos) + argp_dot * np.cross(h, pos)
    return pos, vel


def propagate(el: OrbitElements, t: float, mode: str = "j2") -> StateVector:
    """State at UTC timestamp ``t`` (within 7 days of the element epoch)."""
    pos, vel = propagate_many(el, [t], mode)
    return StateVector(float(t), pos[0], vel[0])


def specific_energy(state: StateVector) -> float:
    r = float(np.linalg.norm(state.position))
    v = float(np.linalg.norm(state.velocity))
    return 0.5 * v * v - MU_EARTH / r


def angular_momentum(state: StateVector) -> float:
    return float(np.linalg.norm(np.cross(state.position, state.velocity)))
