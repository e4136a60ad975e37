"""Time-slotted intensity optimisation over a dual-uplink pass."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateChannelError, DomainError, EmptyWindowError
from .mdi_rate import (
    FIXED_SETTING, IntensitySetting, ProtocolParams, finite_size_rate_raw, key_rate_raw,
    orbit_key_total, rate_for,
)

GRID_POINTS = 12
MAX_ITER = 200
TOLERANCE = 1e-6


@dataclass(frozen=True)
class Bounds:
    mu_min: float = 0.01
    mu_max: float = 1.0
    nu_min: float = 0.001
    nu_max_fraction: float = 0.5  # ν <= fraction · μ


@dataclass(frozen=True)
class Slot:
    start: float
    end: float
    mean_eta_a: float
    mean_eta_b: float
    sample_count: int
    first_index: int = 0


@dataclass(frozen=True)
class SlotPlan:
    slots: tuple
    settings: tuple
    r_star: tuple  # optimiser's rate at each slot's mean transmittances
    slot_bits: tuple
    total_bits: float
    baseline_bits: float
    fallback_slots: tuple = ()  # slots where the fixed setting beat the optimum

    @property
    def schedule(self) -> list:
        out = []
        for slot, setting in zip(self.slots, self.settings):
            out.extend([setting] * slot.sample_count)
        return out


def slot_partition(budget, slot_seconds: float, step_s: float = 1.0) -> list[Slot]:
    """Contiguous slots anchored at the first sample; the last one may be shorter."""
    if not budget:
        raise EmptyWindowError("no link-budget samples to partition")
    if slot_seconds < 1:
        raise DomainError("slot_seconds must be at least 1")
    t = np.array([s.t for s in budget])
    eta_a = np.array([s.eta_a for s in budget])
    eta_b = np.array([s.eta_b for s in budget])
    t0, t_last = t[0], t[-1]
    span = t_last - t0
    n_slots = max(1, math.ceil(span / slot_seconds - 1e-9))
    idx = np.minimum(np.floor((t - t0) / slot_seconds + 1e-9).astype(int), n_slots - 1)
    slots = []
    for k in range(n_slots):
        members = np.flatnonzero(idx == k)
        if members.size == 0:
            continue
        start = t0 + k * slot_seconds
        end = t_last if k == n_slots - 1 else t0 + (k + 1) * slot_seconds
        if end <= start:
            end = start + step_s
        slots.append(Slot(float(start), float(end), float(eta_a[members].mean()),
                          float(eta_b[members].mean()), int(members.size), int(members[0])))
    return slots


def _nu_from_fraction(mu, s, bounds: Bounds):
    """Map s in [0, 1] log-linearly onto [nu_min, fraction·μ]."""
    hi = bounds.nu_max_fraction * mu
    return bounds.nu_min * (hi / bounds.nu_min) ** s


def asymptotic_nu(mu, bounds: Bounds = Bounds()):
    """Decoy reported when the objective does not depend on it: μ/10, floor-clamped."""
    return max(bounds.nu_min, mu / 10.0)


def _objective_factory(eta_a, eta_b, protocol, bounds, n_pulses):
    if n_pulses is None:
        def rate(v):
            mu_a, mu_b = np.exp(v[0]), np.exp(v[1])
            return key_rate_raw(mu_a, mu_b, eta_a, eta_b, protocol)
        return rate, 2

    def rate(v):
        mu_a, mu_b = np.exp(v[0]), np.exp(v[1])
        nu_a = _nu_from_fraction(mu_a, v[2], bounds)
        nu_b = _nu_from_fraction(mu_b, v[3], bounds)
        return finite_size_rate_raw(mu_a, nu_a, mu_b, nu_b, eta_a, eta_b, protocol, n_pulses)
    return rate, 4


def _to_setting(v, bounds, finite) -> IntensitySetting:
    mu_a = float(np.clip(np.exp(v[0]), bounds.mu_min, bounds.mu_max))
    mu_b = float(np.clip(np.exp(v[1]), bounds.mu_min, bounds.mu_max))
    if finite:
        nu_a = float(_nu_from_fraction(mu_a, float(np.clip(v[2], 0, 1)), bounds))
        nu_b = float(_nu_from_fraction(mu_b, float(np.clip(v[3], 0, 1)), bounds))
    else:
        nu_a, nu_b = asymptotic_nu(mu_a, bounds), asymptotic_nu(mu_b, bounds)
    return IntensitySetting(mu_a, nu_a, mu_b, nu_b)


def _rate_of(setting, eta_a, eta_b, protocol, n_pulses):
    if n_pulses is None:
        return key_rate_raw(setting.mu_a, setting.mu_b, eta_a, eta_b, protocol)
    return finite_size_rate_raw(setting.mu_a, setting.nu_a, setting.mu_b, setting.nu_b,
                                eta_a, eta_b, protocol, n_pulses)


def _optimize(eta_a, eta_b, protocol, bounds, n_pulses):
    finite = n_pulses is not None
    rate, dim = _objective_factory(eta_a, eta_b, protocol, bounds, n_pulses)
    symmetric = eta_a == eta_b
    n_mu = 2
    if symmetric:
        # identical channels: search the symmetric subspace so the answer is exactly symmetric
        full_rate = rate
        rate = lambda v: full_rate([v[0], v[0]] + ([v[1], v[1]] if finite else []))
        dim, n_mu = dim // 2, 1
    log_mu = np.linspace(math.log(bounds.mu_min), math.log(bounds.mu_max), GRID_POINTS)
    axes = [log_mu] * n_mu + [np.linspace(0.0, 1.0, GRID_POINTS)] * (dim - n_mu)
    mesh = np.meshgrid(*axes, indexing="ij")
    values = rate(mesh)
    flat = int(np.argmax(values))
    best_v = np.array([m.ravel()[flat] for m in mesh])
    best_r = float(values.ravel()[flat])

    if best_r > 0:
        scale = best_r
        lo = [math.log(bounds.mu_min)] * n_mu + [0.0] * (dim - n_mu)
        hi = [math.log(bounds.mu_max)] * n_mu + [1.0] * (dim - n_mu)
        res = minimize(
            lambda v: -float(rate(v)) / scale, best_v, method="Nelder-Mead",
            bounds=list(zip(lo, hi)),
            options={"maxiter": MAX_ITER, "xatol": TOLERANCE, "fatol": TOLERANCE},
        )
        if -res.fun * scale > best_r:
            best_v, best_r = np.asarray(res.x), float(-res.fun * scale)

    if symmetric:
        best_v = np.array([best_v[0], best_v[0]] + ([best_v[1], best_v[1]] if finite else []))
    setting = _to_setting(best_v, bounds, finite)
    r = float(_rate_of(setting, eta_a, eta_b, protocol, n_pulses))
    fixed_r = float(_rate_of(FIXED_SETTING, eta_a, eta_b, protocol, n_pulses))
    if fixed_r > r or r == 0:
        setting, r = FIXED_SETTING, fixed_r
    return setting, r


def optimize_slot(mean_eta_a: float, mean_eta_b: float, protocol: ProtocolParams,
                  bounds: Bounds = Bounds(), n_pulses: float | None = None):
    """Best (IntensitySetting, rate) for one slot's mean transmittances.

    A log-spaced grid (12 points per axis) seeds a bounded Nelder–Mead
    refinement. With ``n_pulses`` the finite-size rate is maximised over
    both signal and decoy intensities; otherwise only the signals matter
    and each decoy is reported as μ/10 (floor-clamped).
    """
    if mean_eta_a == 0 and mean_eta_b == 0:
        raise DegenerateChannelError("both channels have zero transmittance")
    if not (0 <= mean_eta_a <= 1 and 0 <= mean_eta_b <= 1):
        raise DomainError("mean transmittance outside [0, 1]")
    # solve in a canonical order so swapping the channels swaps the answer exactly
    if mean_eta_a < mean_eta_b:
        setting, r = _optimize(mean_eta_b, mean_eta_a, protocol, bounds, n_pulses)
        return setting.swapped(), r
    return _optimize(mean_eta_a, mean_eta_b, protocol, bounds, n_pulses)


def optimize_pass(budget, slot_seconds: float, protocol: ProtocolParams,
                  step_s: float = 1.0, bounds: Bounds = Bounds()) -> SlotPlan:
    """Optimise each slot independently and total the bits over the pass."""
    slots = slot_partition(budget, slot_seconds, step_s)
    n_pulses = protocol.pulse_rate_hz * step_s if protocol.finite_size else None
    settings, r_star, slot_bits, fallback = [], [], [], []
    for k, slot in enumerate(slots):
        members = budget[slot.first_index:slot.first_index + slot.sample_count]
        setting, r = optimize_slot(slot.mean_eta_a, slot.mean_eta_b, protocol, bounds, n_pulses)
        bits = orbit_key_total(members, setting, protocol, step_s)
        fixed_bits = orbit_key_total(members, FIXED_SETTING, protocol, step_s)
        if fixed_bits > bits:
            setting, bits = FIXED_SETTING, fixed_bits
            r = rate_for(setting, slot.mean_eta_a, slot.mean_eta_b, protocol, step_s)
            fallback.append(k)
        settings.append(setting)
        r_star.append(float(r))
        slot_bits.append(bits)
    total = float(sum(slot_bits))
    baseline = orbit_key_total(budget, FIXED_SETTING, protocol, step_s)
    return SlotPlan(tuple(slots), tuple(settings), tuple(r_star), tuple(slot_bits),
                    total, baseline, tuple(fallback))
