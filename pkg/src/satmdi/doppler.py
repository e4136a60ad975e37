"""Per-link Doppler shifts and the sending-time offset that aligns arrivals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

C_LIGHT = 299_792_458.0  # m/s
MAX_RANGE_RATE = 2.0e4  # m/s
# positive shift = satellite approaching (negative range rate)
SIGN_CONVENTION = "shift = -range_rate / wavelength; positive while the satellite approaches"


@dataclass(frozen=True)
class DopplerSample:
    t: float
    shift_a_hz: float
    shift_b_hz: float
    offset_hz: float
    wavelength_m: float


@dataclass(frozen=True)
class SyncSample:
    t: float
    delta_t_s: float
    range_a_m: float
    range_b_m: float


def doppler_shift(range_rate_mps, wavelength_m: float):
    """First-order Doppler shift (Hz) seen on an uplink."""
    rr = np.asarray(range_rate_mps, dtype=float)
    if np.any(np.abs(rr) >= MAX_RANGE_RATE):
        raise DomainError(f"|range rate| must stay below {MAX_RANGE_RATE:g} m/s")
    f = -rr / wavelength_m
    return float(f) if f.ndim == 0 else f


def doppler_series(window, wavelength_m: float) -> list[DopplerSample]:
    """Shifts of both uplinks at every window sample."""
    if not window.samples or len(window.samples[0]) != 2:
        raise DomainError("a two-station window with at least one sample is required")
    out = []
    for topo_a, topo_b in window.samples:
        fa = doppler_shift(topo_a.range_rate_mps, wavelength_m)
        fb = doppler_shift(topo_b.range_rate_mps, wavelength_m)
        out.append(DopplerSample(topo_a.t, fa, fb, fa - fb, wavelength_m))
    return out


def sync_offset(range_a_m: float, range_b_m: float) -> float:
    """ΔT_c = |L_a - L_b| / c."""
    if range_a_m <= 0 or range_b_m <= 0:
        raise DomainError("ranges must be positive")
    return abs(range_a_m - range_b_m) / C_LIGHT


def sync_series(window) -> list[SyncSample]:
    return [
        SyncSample(a.t, sync_offset(a.range_m, b.range_m), a.range_m, b.range_m)
        for a, b in window.samples
    ]


@dataclass(frozen=True)
class ArrivalResiduals:
    send_times: np.ndarray
    uncompensated_s: np.ndarray  # Bob arrival minus Alice arrival, same send time
    compensated_s: np.ndarray  # after shifting Bob's send time by the sampled offset


def compensated_arrivals(window, send_period_s: float) -> ArrivalResiduals:
    """Arrival mismatch at the satellite for a uniform send schedule.

    Ranges are interpolated linearly between window samples. Bob's send
    time is shifted by the signed offset (L_a - L_b)/c taken at the most
    recent sample, i.e. the compensation is piecewise constant.
    """
    if not send_period_s > 0:
        raise DomainError("send_period_s must be positive")
    t = window.times
    ra = window.column(0, "range_m")
    rb = window.column(1, "range_m")
    sends = t[0] + send_period_s * np.arange(int(np.floor((t[-1] - t[0]) / send_period_s + 1e-9)) + 1)
    la = np.interp(sends, t, ra)
    lb = np.interp(sends, t, rb)
    uncompensated = (lb - la) / C_LIGHT

    k = np.clip(np.searchsorted(t, sends, side="right") - 1, 0, len(t) - 1)
    offset = (ra[k] - rb[k]) / C_LIGHT
    lb_shifted = np.interp(sends + offset, t, rb)
    # residual = (send + offset + lb'/c) - (send + la/c), grouped so static geometry cancels exactly
    compensated = offset - (la - lb_shifted) / C_LIGHT
    return ArrivalResiduals(sends, uncompensated, compensated)
