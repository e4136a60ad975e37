"""Uplink turbulence channel: Cn² profile, Fried parameter, beam width, transmittance."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import BelowHorizonError, ConvergenceError, DomainError, InvariantError

# SI form of the Fried-parameter constant: 1.1654e-8 with λ in micrometres
FRIED_CONSTANT = 1.1654e-8 * 1e6 ** 1.2
if abs(1.1654e-8 * 10 ** 7.2 - 0.1847) >= 1e-3:
    raise RuntimeError("Fried-parameter constant self-check failed")

ELEVATION_FLOOR = math.radians(5.0)
SLANT_MODES = ("literal", "zenith_r0")

DEFAULT_FIXED_LOSSES_DB = {"optical": 1.5, "antennas": 1.5, "coupling": 5.9, "detection": 3.0}

# Ngari -> Micius reference points: (range m, elevation deg, measured loss dB)
NGARI_REFERENCE_POINTS = ((501e3, 75.9, 42.5), (1385e3, 15.0, 52.3))


@dataclass(frozen=True)
class TurbulenceProfile:
    """Hufnagel–Valley Cn² profile measured from the transmitting site upward."""

    c0: float = 1.7e-14
    wind_rms_mps: float = 21.0
    z_max_m: float = 20000.0
    site_altitude_m: float = 0.0

    def __post_init__(self):
        if not self.c0 > 0:
            raise InvariantError(f"c0 must be positive, got {self.c0}")
        if not self.z_max_m > 0:
            raise InvariantError(f"z_max_m must be positive, got {self.z_max_m}")


@dataclass(frozen=True)
class ChannelParams:
    wavelength_m: float = 780e-9
    r_s_m: float = 0.065
    r_r_m: float = 0.15
    fixed_losses_db: tuple = tuple(DEFAULT_FIXED_LOSSES_DB.items())
    divergence_urad: float = 14.0  # carried for reference only
    min_elevation_rad: float = math.radians(10.0)
    slant_mode: str = "zenith_r0"

    def __post_init__(self):
        if isinstance(self.fixed_losses_db, dict):
            object.__setattr__(self, "fixed_losses_db", tuple(self.fixed_losses_db.items()))
        if not 300e-9 < self.wavelength_m < 2000e-9:
            raise InvariantError(f"wavelength {self.wavelength_m} m outside (300 nm, 2000 nm)")
        if not (self.r_s_m > 0 and self.r_r_m > 0):
            raise InvariantError("aperture radii must be positive")
        for name, db in self.fixed_losses_db:
            if db < 0:
                raise InvariantError(f"fixed loss {name} = {db} dB is negative")
        if self.slant_mode not in SLANT_MODES:
            raise InvariantError(f"slant_mode {self.slant_mode!r} not in {SLANT_MODES}")

    @property
    def fixed_loss_total_db(self) -> float:
        return sum(db for _, db in self.fixed_losses_db)

    @property
    def eta0(self) -> float:
        return 10.0 ** (-self.fixed_loss_total_db / 10.0)


@dataclass(frozen=True)
class LinkBudgetSample:
    t: float
    eta_a: float
    eta_b: float
    loss_a_db: float
    loss_b_db: float
    loss_total_db: float
    omega_a_m: float
    omega_b_m: float
    r0_a_m: float
    r0_b_m: float


def cn2_at(h_m, profile: TurbulenceProfile):
    """Hufnagel–Valley Cn² (m^-2/3) at height ``h_m`` above the site."""
    h = np.asarray(h_m, dtype=float)
    if np.any(h < 0):
        raise DomainError("height must be non-negative")
    w = profile.wind_rms_mps
    value = (
        0.00594 * (w / 27.0) ** 2 * (1e-5 * h) ** 10 * np.exp(-h / 1000.0)
        + 2.7e-16 * np.exp(-h / 1500.0)
        + profile.c0 * np.exp(-h / 100.0)
    )
    return float(value) if value.ndim == 0 else value


def simpson(f, a: float, b: float, rtol: float = 1e-4, max_levels: int = 20) -> tuple[float, int]:
    """Composite Simpson rule, halving the step until successive estimates agree.

    Returns the Richardson-corrected estimate and the final interval count.
    """
    n = 2
    x = np.linspace(a, b, n + 1)
    fx = f(x)
    prev = (b - a) / (3 * n) * (fx[0] + 4 * fx[1:-1:2].sum() + 2 * fx[2:-1:2].sum() + fx[-1])
    for _ in range(max_levels):
        n *= 2
        h = (b - a) / n
        mid = f(a + h * np.arange(1, n, 2))
        new = np.empty(n + 1)
        new[0::2] = fx
        new[1::2] = mid
        fx = new
        est = h / 3 * (fx[0] + 4 * fx[1:-1:2].sum() + 2 * fx[2:-1:2].sum() + fx[-1])
        if abs(est - prev) <= rtol * abs(est):
            return est + (est - prev) / 15.0, n
        prev = est
    raise ConvergenceError(f"Simpson quadrature did not converge in {max_levels} halvings")


@lru_cache(maxsize=256)
def _integrated_cn2(profile: TurbulenceProfile, lower: float, upper: float) -> float:
    value, _ = simpson(lambda h: cn2_at(h, profile), lower, upper)
    return value


def integrated_cn2(profile: TurbulenceProfile, lower: float = 0.0, upper: float | None = None) -> float:
    """Column integral ∫Cn² dh (m^1/3) from ``lower`` to ``upper`` (default z_max)."""
    upper = profile.z_max_m if upper is None else upper
    if lower < 0 or upper < lower:
        raise DomainError(f"bad integration limits [{lower}, {upper}]")
    return _integrated_cn2(profile, float(lower), float(upper))


def fried_parameter(wavelength_m, elevation_rad, profile: TurbulenceProfile, slant_mode: str = "zenith_r0"):
    """Fried parameter r0 (m) for an uplink at the given elevation."""
    elevation_rad = np.asarray(elevation_rad, dtype=float)
    if np.any(elevation_rad <= 0) or np.any(elevation_rad > math.pi / 2 + 1e-12):
        raise DomainError("elevation must lie in (0, π/2]")
    if slant_mode == "literal":
        s = np.sin(elevation_rad) ** 0.6
    elif slant_mode == "zenith_r0":
        s = np.ones_like(elevation_rad)
    else:
        raise DomainError(f"unknown slant_mode {slant_mode!r}")
    r0 = FRIED_CONSTANT * wavelength_m ** 1.2 * s / integrated_cn2(profile) ** 0.6
    return float(r0) if r0.ndim == 0 else r0


def beam_width(range_m, elevation_rad, params: ChannelParams, r0_m):
    """Long-term received beam width (m): diffraction spread times turbulence broadening."""
    L = np.asarray(range_m, dtype=float)
    el = np.asarray(elevation_rad, dtype=float)
    r0 = np.asarray(r0_m, dtype=float)
    if np.any(L <= 0) or np.any(el <= 0) or np.any(r0 <= 0):
        raise DomainError("range, elevation and r0 must be positive")
    diffraction = L * params.wavelength_m / (0.632 * params.r_s_m * math.pi)
    broadening = (1.0 + 0.83 / np.sin(el) * (2.0 * params.r_s_m / r0) ** (5.0 / 3.0)) ** 0.6
    w = diffraction * broadening
    return float(w) if w.ndim == 0 else w


def uplink_transmittance(omega_r_m, r_r_m: float, eta0: float):
    omega = np.asarray(omega_r_m, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("beam width must be positive")
    if not 0 < eta0 <= 1:
        raise DomainError(f"eta0 {eta0} outside (0, 1]")
    eta = eta0 * -np.expm1(-2.0 * r_r_m ** 2 / omega ** 2)
    return float(eta) if eta.ndim == 0 else eta


def loss_db(eta):
    value = -10.0 * np.log10(eta)
    return float(value) if np.ndim(value) == 0 else value


def link_budget(topo, params: ChannelParams, profile: TurbulenceProfile):
    """(eta, loss_db, omega_r, r0) for one uplink at one instant."""
    if topo.elevation < ELEVATION_FLOOR:
        raise DomainError(f"elevation {math.degrees(topo.elevation):.2f}° below the 5° model floor")
    if topo.elevation < params.min_elevation_rad:
        raise BelowHorizonError(
            f"elevation {math.degrees(topo.elevation):.2f}° below minimum "
            f"{math.degrees(params.min_elevation_rad):.2f}°"
        )
    return _budget(topo.range_m, topo.elevation, params, profile)


def _budget(range_m, elevation_rad, params, profile):
    r0 = fried_parameter(params.wavelength_m, elevation_rad, profile, params.slant_mode)
    omega = beam_width(range_m, elevation_rad, params, r0)
    eta = uplink_transmittance(omega, params.r_r_m, params.eta0)
    return eta, loss_db(eta), omega, r0


def dual_link_series(window, params: ChannelParams, profile: TurbulenceProfile,
                     params_b: ChannelParams | None = None,
                     profile_b: TurbulenceProfile | None = None) -> list[LinkBudgetSample]:
    """Per-sample budgets for both uplinks of a common-visibility window."""
    if not window.samples:
        raise DomainError("window has no samples")
    params_b = params if params_b is None else params_b
    profile_b = profile if profile_b is None else profile_b
    out = []
    for topo_a, topo_b in window.samples:
        ea, la, wa, ra = link_budget(topo_a, params, profile)
        eb, lb, wb, rb = link_budget(topo_b, params_b, profile_b)
        out.append(LinkBudgetSample(topo_a.t, ea, eb, la, lb, la + lb, wa, wb, ra, rb))
    return out


def calibrate_slant_mode(params: ChannelParams | None = None,
                         profile: TurbulenceProfile | None = None) -> tuple[str, dict]:
    """Pick the slant mode that best reproduces the Ngari reference losses.

    Returns the winning mode and, per mode, the loss at each reference point
    and the largest absolute error.
    """
    params = ChannelParams() if params is None else params
    profile = TurbulenceProfile() if profile is None else profile
    report = {}
    for mode in SLANT_MODES:
        p = replace(params, slant_mode=mode)
        losses = [_budget(rng, math.radians(el), p, profile)[1] for rng, el, _ in NGARI_REFERENCE_POINTS]
        errors = [abs(l - ref) for l, (_, _, ref) in zip(losses, NGARI_REFERENCE_POINTS)]
        report[mode] = {"losses_db": losses, "max_error_db": max(errors)}
    best = min(SLANT_MODES, key=lambda m: report[m]["max_error_db"])
    return best, report
