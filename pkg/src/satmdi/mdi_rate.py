"""Decoy-state MDI-QKD gains, error rates and key rate for threshold detectors.

The channel model treats both sources as phase-randomised weak coherent
pulses arriving at a polarisation Bell-state analyser (50:50 beam splitter,
two polarising splitters, four threshold detectors). Misalignment is an
outcome flip with probability ``e_d``. All functions broadcast over numpy
arrays so optimisers can evaluate whole grids at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvariantError, ScheduleGapError

_SERIES_LIMIT = 20.0


@dataclass(frozen=True)
class ProtocolParams:
    e_d: float = 0.015
    e_0: float = 0.5
    f_e: float = 1.16
    y_0: float = 3e-6
    pulse_rate_hz: float = 1e14
    n_sigma: float = 5.0
    finite_size: bool = False

    def __post_init__(self):
        if not 0.0 <= self.e_d <= 0.5:
            raise InvariantError(f"e_d {self.e_d} outside [0, 0.5]")
        if not 0.0 <= self.e_0 <= 1.0:
            raise InvariantError(f"e_0 {self.e_0} outside [0, 1]")
        if self.f_e < 1.0:
            raise InvariantError(f"f_e {self.f_e} < 1")
        if not 0.0 <= self.y_0 < 1.0:
            raise InvariantError(f"y_0 {self.y_0} outside [0, 1)")
        if not self.pulse_rate_hz > 0:
            raise InvariantError("pulse_rate_hz must be positive")
        if self.n_sigma < 0:
            raise InvariantError("n_sigma must be non-negative")


@dataclass(frozen=True)
class IntensitySetting:
    mu_a: float = 0.5
    nu_a: float = 0.1
    mu_b: float = 0.5
    nu_b: float = 0.1
    omega: float = 0.0

    def __post_init__(self):
        for side in ("a", "b"):
            mu, nu = getattr(self, f"mu_{side}"), getattr(self, f"nu_{side}")
            if not (mu > nu >= 0.0):
                raise InvariantError(f"need mu_{side} > nu_{side} >= 0 (got {mu}, {nu})")
            if mu > 1.0:
                raise InvariantError(f"mu_{side} = {mu} exceeds the cap 1.0")
        if self.omega != 0.0:
            raise InvariantError("vacuum intensity omega is fixed at 0")

    def swapped(self) -> "IntensitySetting":
        return IntensitySetting(self.mu_b, self.nu_b, self.mu_a, self.nu_a)


FIXED_SETTING = IntensitySetting(0.5, 0.1, 0.5, 0.1)


@dataclass(frozen=True)
class RatePoint:
    t: float
    q_z: float
    e_z: float
    q_x: float
    e_x: float
    y_11: float
    e_11: float
    p_11: float
    r_per_pulse: float


def _i0_series_terms(z, start_k: int):
    """Σ_{k>=start_k} (z²/4)^k / (k!)², evaluated by forward recurrence."""
    q = np.asarray(z, dtype=float) ** 2 / 4.0
    term = q ** start_k / math.factorial(start_k) ** 2
    total = np.array(term, dtype=float)
    k = start_k
    while True:
        k += 1
        term = term * q / (k * k)
        total = total + term
        if np.all(term <= 1e-17 * total) or k > 500:
            return total


def _i0_asymptotic(z):
    z = np.asarray(z, dtype=float)
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(1, 30):
        term = term * (2 * k - 1) ** 2 / (8.0 * k * z)
        total = total + term
        if np.all(np.abs(term) < 1e-17 * total):
            break
    return np.exp(z) / np.sqrt(2.0 * np.pi * z) * total


def bessel_i0(z):
    """Modified Bessel function I0: power series below |z| = 20, asymptotic above."""
    z = np.abs(np.asarray(z, dtype=float))
    small = z < _SERIES_LIMIT
    out = np.empty_like(z)
    if np.any(small):
        out[small] = _i0_series_terms(z[small], 0)
    if np.any(~small):
        out[~small] = _i0_asymptotic(z[~small])
    return float(out) if out.ndim == 0 else out


def _i0m1(z):
    """I0(z) - 1 without cancellation for small z."""
    z = np.abs(np.asarray(z, dtype=float))
    small = z < _SERIES_LIMIT
    out = np.empty_like(z)
    if np.any(small):
        out[small] = _i0_series_terms(z[small], 1)
    if np.any(~small):
        out[~small] = _i0_asymptotic(z[~small]) - 1.0
    return out


def _i0_2x_minus_4i0_x(x):
    """I0(2x) - 4 I0(x) + 3, which starts at order x⁴ (3x⁴/16)."""
    x = np.asarray(x, dtype=float)
    small = x < _SERIES_LIMIT / 2
    out = np.empty_like(x)
    if np.any(small):
        xs = x[small]
        q = xs * xs
        term = q ** 2 / 4.0  # (x²)^k/(k!)² at k = 2
        total = term * (1.0 - 4.0 ** -1)
        k = 2
        while True:
            k += 1
            term = term * q / (k * k)
            inc = term * (1.0 - 4.0 ** (1 - k))
            total = total + inc
            if np.all(inc <= 1e-17 * total) or k > 500:
                break
        out[small] = total
    if np.any(~small):
        xl = x[~small]
        out[~small] = bessel_i0(2 * xl) - 4 * bessel_i0(xl) + 3.0
    return out


def binary_entropy(x):
    """H2(x) in bits, with H2(0) = H2(1) = 0."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)) or np.any(np.isnan(x)):
        raise DomainError("binary entropy argument outside [0, 1]")
    inner = (x > 0) & (x < 1)
    xs = np.where(inner, x, 0.5)
    h = np.where(inner, -xs * np.log2(xs) - (1 - xs) * np.log2(1 - xs), 0.0)
    return float(h) if h.ndim == 0 else h


def _check_eta(*etas):
    for eta in etas:
        eta = np.asarray(eta, dtype=float)
        if np.any((eta < 0) | (eta > 1)) or np.any(np.isnan(eta)):
            raise DomainError("transmittance outside [0, 1]")


def _check_mu(*mus):
    for mu in mus:
        if np.any(np.asarray(mu, dtype=float) < 0):
            raise DomainError("intensity must be non-negative")


def _scalar(*arrays):
    return tuple(float(a) if np.ndim(a) == 0 else a for a in arrays)


def _safe_ratio(num, den):
    num, den = np.asarray(num, float), np.asarray(den, float)
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def gains_qber_z_raw(mu_a, mu_b, eta_a, eta_b, protocol: ProtocolParams):
    """Z-basis (q_z, e_z) for arbitrary intensity arrays."""
    _check_eta(eta_a, eta_b)
    _check_mu(mu_a, mu_b)
    y0, ed = protocol.y_0, protocol.e_d
    log_d = math.log1p(-y0)
    d = 1.0 - y0
    la = np.asarray(mu_a, float) * eta_a
    lb = np.asarray(mu_b, float) * eta_b
    mup = la + lb
    x = np.sqrt(la * lb) / 2.0
    q_c = 2 * d * d * np.exp(-mup / 2) * -np.expm1(log_d - la / 2) * -np.expm1(log_d - lb / 2)
    bracket = _i0m1(2 * x) - np.expm1(log_d - mup / 2)
    q_e = 2 * y0 * d * d * np.exp(-mup / 2) * bracket
    q_z = q_c + q_e
    e_z = _safe_ratio(ed * q_c + (1 - ed) * q_e, q_z)
    return _scalar(q_z, e_z)


def gains_qber_x_raw(mu_a, mu_b, eta_a, eta_b, protocol: ProtocolParams):
    """X-basis (q_x, e_x) for arbitrary intensity arrays."""
    _check_eta(eta_a, eta_b)
    _check_mu(mu_a, mu_b)
    y0, ed, e0 = protocol.y_0, protocol.e_d, protocol.e_0
    log_d = math.log1p(-y0)
    la = np.asarray(mu_a, float) * eta_a
    lb = np.asarray(mu_b, float) * eta_b
    mup = la + lb
    x = np.sqrt(la * lb) / 2.0
    y = np.exp(log_d - mup / 4)
    u = -np.expm1(log_d - mup / 4)  # 1 - y
    a_x = _i0m1(x)
    b_2x = _i0m1(2 * x)
    # 1 + 2y² - 4y I0(x) + I0(2x) rewritten without cancellation
    core = 2 * u * u + 4 * u * a_x + _i0_2x_minus_4i0_x(x)
    q_x = 2 * y * y * core
    ex_qx = e0 * q_x - (e0 - ed) * 2 * y * y * b_2x
    e_x = _safe_ratio(np.maximum(ex_qx, 0.0), q_x)
    return _scalar(q_x, e_x)


def gains_qber_z(setting: IntensitySetting, eta_a, eta_b, protocol: ProtocolParams):
    return gains_qber_z_raw(setting.mu_a, setting.mu_b, eta_a, eta_b, protocol)


def gains_qber_x(setting: IntensitySetting, eta_a, eta_b, protocol: ProtocolParams):
    return gains_qber_x_raw(setting.mu_a, setting.mu_b, eta_a, eta_b, protocol)


def single_photon_yield_error(eta_a, eta_b, protocol: ProtocolParams):
    """Exact single-photon-pair yield Y11 and X-basis error e11 (infinite decoys)."""
    _check_eta(eta_a, eta_b)
    ea, eb = np.asarray(eta_a, float), np.asarray(eta_b, float)
    y0, ed, e0 = protocol.y_0, protocol.e_d, protocol.e_0
    d2 = (1.0 - y0) ** 2
    both = ea * eb / 2.0
    y11 = d2 * (both + (2 * ea + 2 * eb - 3 * ea * eb) * y0 + 4 * (1 - ea) * (1 - eb) * y0 * y0)
    e11 = _safe_ratio(e0 * y11 - (e0 - ed) * d2 * both, y11)
    return _scalar(y11, e11)


def p11(mu_a, mu_b):
    mu_a, mu_b = np.asarray(mu_a, float), np.asarray(mu_b, float)
    return mu_a * mu_b * np.exp(-mu_a - mu_b)


def key_rate_raw(mu_a, mu_b, eta_a, eta_b, protocol: ProtocolParams, clamp: bool = True):
    q_z, e_z = gains_qber_z_raw(mu_a, mu_b, eta_a, eta_b, protocol)
    y11, e11 = single_photon_yield_error(eta_a, eta_b, protocol)
    r = (p11(mu_a, mu_b) * y11 * (1.0 - binary_entropy(np.minimum(e11, 1.0)))
         - q_z * protocol.f_e * binary_entropy(e_z))
    if clamp:
        r = np.maximum(r, 0.0)
    return float(r) if np.ndim(r) == 0 else r


def key_rate(setting: IntensitySetting, eta_a, eta_b, protocol: ProtocolParams):
    """Asymptotic secret fraction per pulse, clamped at zero."""
    return key_rate_raw(setting.mu_a, setting.mu_b, eta_a, eta_b, protocol)


def _upper_error(e, se, n_sigma):
    # a bound beyond 1/2 would lower H2, so saturate there
    return np.where(e >= 0.5, 0.5, np.minimum(0.5, e + n_sigma * se))


def finite_size_rate_raw(mu_a, nu_a, mu_b, nu_b, eta_a, eta_b, protocol: ProtocolParams, n_pulses):
    """Key rate with Gaussian worst-case bounds on the estimated quantities.

    Half the pulses are taken as signal pairs (gain and error of the Z basis),
    half as decoy pairs in the X basis, from which the single-photon yield and
    error are inferred through the single-photon fraction ``p11(nu_a, nu_b)``.
    A statistical stand-in only; it is not a composable finite-key bound.
    """
    n_pulses = np.asarray(n_pulses, dtype=float)
    if np.any(n_pulses <= 0):
        raise DomainError("n_pulses must be positive")
    ns = protocol.n_sigma
    n_half = n_pulses / 2.0
    q_z, e_z = gains_qber_z_raw(mu_a, mu_b, eta_a, eta_b, protocol)
    y11, e11 = single_photon_yield_error(eta_a, eta_b, protocol)
    q_v, e_v = gains_qber_x_raw(nu_a, nu_b, eta_a, eta_b, protocol)
    p11_v = p11(nu_a, nu_b)

    q_z_u = np.minimum(1.0, q_z + ns * np.sqrt(q_z * (1 - q_z) / n_half))
    e_z_u = _upper_error(e_z, np.sqrt(e_z * (1 - e_z) / np.maximum(n_half * q_z, 1e-300)), ns)
    se_y = np.sqrt(q_v * (1 - q_v) / n_half) / np.maximum(p11_v, 1e-300)
    ev_qv = e_v * q_v
    se_ey = np.sqrt(ev_qv * (1 - ev_qv) / n_half) / np.maximum(p11_v, 1e-300)
    y11_l = np.maximum(0.0, y11 - ns * se_y)
    e11_bound = (e11 * y11 + ns * se_ey) / np.where(y11_l > 0, y11_l, 1.0)
    e11_u = np.where((y11_l > 0) & (e11 < 0.5), np.minimum(0.5, e11_bound), 0.5)
    r = (p11(mu_a, mu_b) * y11_l * (1.0 - binary_entropy(e11_u))
         - q_z_u * protocol.f_e * binary_entropy(e_z_u))
    r = np.maximum(r, 0.0)
    return float(r) if np.ndim(r) == 0 else r


def finite_size_rate(setting: IntensitySetting, eta_a, eta_b, protocol: ProtocolParams, n_pulses):
    return finite_size_rate_raw(setting.mu_a, setting.nu_a, setting.mu_b, setting.nu_b,
                                eta_a, eta_b, protocol, n_pulses)


def rate_for(setting: IntensitySetting, eta_a, eta_b, protocol: ProtocolParams, step_s: float = 1.0):
    """Per-pulse rate under the protocol's mode (finite mode uses pulse_rate·step pulses)."""
    if protocol.finite_size:
        return finite_size_rate(setting, eta_a, eta_b, protocol, protocol.pulse_rate_hz * step_s)
    return key_rate(setting, eta_a, eta_b, protocol)


def rate_point(t: float, setting: IntensitySetting, eta_a: float, eta_b: float,
               protocol: ProtocolParams, step_s: float = 1.0) -> RatePoint:
    q_z, e_z = gains_qber_z(setting, eta_a, eta_b, protocol)
    q_x, e_x = gains_qber_x(setting, eta_a, eta_b, protocol)
    y11, e11 = single_photon_yield_error(eta_a, eta_b, protocol)
    return RatePoint(
        t=t, q_z=q_z, e_z=e_z, q_x=q_x, e_x=e_x, y_11=y11, e_11=e11,
        p_11=float(p11(setting.mu_a, setting.mu_b)),
        r_per_pulse=rate_for(setting, eta_a, eta_b, protocol, step_s),
    )


def orbit_key_total(budget, schedule, protocol: ProtocolParams, step_s: float = 1.0) -> float:
    """Secret bits over a pass: Σ r(t) · pulse_rate · Δt.

    ``schedule`` is one IntensitySetting for every sample or a sequence with
    one entry per budget sample.
    """
    if isinstance(schedule, IntensitySetting):
        schedule = [schedule] * len(budget)
    schedule = list(schedule)
    if len(schedule) < len(budget) or any(s is None for s in schedule[:len(budget)]):
        raise ScheduleGapError("intensity schedule does not cover every sample")
    total = 0.0
    for sample, setting in zip(budget, schedule):
        r = rate_for(setting, sample.eta_a, sample.eta_b, protocol, step_s)
        total += r * protocol.pulse_rate_hz * step_s
    return total
