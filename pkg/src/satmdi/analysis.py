"""Command-level analyses shared by the CLI and the sweep harness.

Each function returns plain rows (lists of values in CSV column order)
plus a dictionary of scalar summaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import doppler as dop
from .channel import LinkBudgetSample, dual_link_series, link_budget
from .errors import ConfigError
from .intensity import SlotPlan, optimize_pass
from .mdi_rate import rate_point
from .orbit import find_access_windows, format_utc
from .scenario import Scenario

COLUMNS = {
    "access": ["window_index", "start_utc", "end_utc", "duration_s"],
    "linkbudget": ["t_utc", "elev_a_deg", "elev_b_deg", "range_a_km", "range_b_km",
                   "loss_a_db", "loss_b_db", "loss_total_db"],
    "keyrate": ["t_utc", "eta_a", "eta_b", "q_z", "e_z", "y_11", "e_11", "r_per_pulse", "bits_this_step"],
    "doppler": ["t_utc", "shift_a_hz", "shift_b_hz", "offset_hz", "delta_t_c_s"],
    "optimize": ["slot_index", "start_utc", "end_utc", "mu_a", "nu_a", "mu_b", "nu_b", "r_star", "slot_bits"],
}

SUMMARY_COLUMNS = {
    "access": ["window_count", "window_duration_s"],
    "linkbudget": ["window_count", "window_duration_s", "min_loss_total_db", "max_loss_total_db"],
    "keyrate": ["window_count", "window_duration_s", "min_loss_total_db", "max_loss_total_db", "total_bits"],
    "doppler": ["window_count", "window_duration_s", "max_abs_shift_hz", "max_delta_t_c_s"],
    "optimize": ["window_count", "window_duration_s", "min_loss_total_db", "max_loss_total_db",
                 "total_bits", "baseline_bits"],
}


@dataclass(frozen=True)
class Result:
    rows: list
    summary: dict
    extra: dict  # additional metadata for run_meta.json


def windows_for(sc: Scenario) -> list:
    return find_access_windows(sc.satellite, sc.stations, sc.min_elevation_rad,
                               (sc.search.t0, sc.search.t1), sc.search.step_s, sc.propagator)


def _require_windows(windows) -> None:
    if not windows:
        raise ConfigError("no visibility window inside the search interval")


def budget_for(sc: Scenario, window) -> list[LinkBudgetSample]:
    if len(sc.stations) == 2:
        return dual_link_series(window, sc.channels[0], sc.turbulences[0], sc.channels[1], sc.turbulences[1])
    out = []
    for (topo,) in window.samples:
        eta, loss, omega, r0 = link_budget(topo, sc.channels[0], sc.turbulences[0])
        out.append(LinkBudgetSample(topo.t, eta, math.nan, loss, math.nan, loss, omega, math.nan, r0, math.nan))
    return out


def _window_summary(windows) -> dict:
    return {"window_count": len(windows),
            "window_duration_s": windows[0].duration_s if windows else 0.0}


def _loss_summary(budgets) -> dict:
    losses = [s.loss_total_db for b in budgets for s in b]
    return {"min_loss_total_db": min(losses), "max_loss_total_db": max(losses)}


def run_access(sc: Scenario, windows=None) -> Result:
    windows = windows_for(sc) if windows is None else windows
    rows = [[i, format_utc(w.start), format_utc(w.end), w.duration_s] for i, w in enumerate(windows)]
    return Result(rows, _window_summary(windows), {})


def run_linkbudget(sc: Scenario, windows=None) -> Result:
    windows = windows_for(sc) if windows is None else windows
    _require_windows(windows)
    budgets = [budget_for(sc, w) for w in windows]
    rows = []
    for w, budget in zip(windows, budgets):
        for topo, b in zip(w.samples, budget):
            a = topo[0]
            second = topo[1] if len(topo) > 1 else None
            rows.append([
                format_utc(b.t), math.degrees(a.elevation),
                math.degrees(second.elevation) if second else None,
                a.range_m / 1e3, second.range_m / 1e3 if second else None,
                b.loss_a_db, b.loss_b_db if second else None, b.loss_total_db,
            ])
    return Result(rows, {**_window_summary(windows), **_loss_summary(budgets)}, {})


def _schedule(sc: Scenario, budget, slot_seconds) -> tuple[list, SlotPlan | None]:
    if sc.optimize:
        plan = optimize_pass(budget, slot_seconds, sc.protocol, sc.search.step_s)
        return plan.schedule, plan
    return [sc.intensities] * len(budget), None


def run_keyrate(sc: Scenario, windows=None, slot_seconds=None) -> Result:
    sc.require_pair("keyrate")
    windows = windows_for(sc) if windows is None else windows
    _require_windows(windows)
    slot_seconds = sc.slot_seconds if slot_seconds is None else slot_seconds
    step, scale = sc.search.step_s, sc.protocol.pulse_rate_hz * sc.search.step_s * sc.availability_factor
    budgets = [budget_for(sc, w) for w in windows]
    rows, total = [], 0.0
    for budget in budgets:
        schedule, _ = _schedule(sc, budget, slot_seconds)
        for b, setting in zip(budget, schedule):
            rp = rate_point(b.t, setting, b.eta_a, b.eta_b, sc.protocol, step)
            bits = rp.r_per_pulse * scale
            total += bits
            rows.append([format_utc(b.t), b.eta_a, b.eta_b, rp.q_z, rp.e_z, rp.y_11, rp.e_11,
                         rp.r_per_pulse, bits])
    summary = {**_window_summary(windows), **_loss_summary(budgets), "total_bits": total}
    return Result(rows, summary, {"intensities": "optimize" if sc.optimize else "fixed"})


def run_optimize(sc: Scenario, windows=None, slot_seconds=None) -> Result:
    sc.require_pair("optimize")
    windows = windows_for(sc) if windows is None else windows
    _require_windows(windows)
    slot_seconds = sc.slot_seconds if slot_seconds is None else slot_seconds
    budgets = [budget_for(sc, w) for w in windows]
    rows, total, baseline, discrepancy, fallback = [], 0.0, 0.0, [], []
    index = 0
    for budget in budgets:
        plan = optimize_pass(budget, slot_seconds, sc.protocol, sc.search.step_s)
        for k, (slot, setting, r, bits) in enumerate(zip(plan.slots, plan.settings, plan.r_star, plan.slot_bits)):
            bits *= sc.availability_factor
            rows.append([index, format_utc(slot.start), format_utc(slot.end), setting.mu_a, setting.nu_a,
                         setting.mu_b, setting.nu_b, r, bits])
            # slot-average prediction versus what the per-second channel actually delivers
            predicted = r * sc.protocol.pulse_rate_hz * sc.search.step_s * slot.sample_count * sc.availability_factor
            discrepancy.append({"slot_index": index, "predicted_bits": predicted, "realised_bits": bits})
            if k in plan.fallback_slots:
                fallback.append(index)
            index += 1
        total += plan.total_bits * sc.availability_factor
        baseline += plan.baseline_bits * sc.availability_factor
    summary = {**_window_summary(windows), **_loss_summary(budgets),
               "total_bits": total, "baseline_bits": baseline}
    extra = {"slot_seconds": slot_seconds, "slot_average_vs_per_second": discrepancy,
             "slots_using_fixed_setting": fallback}
    return Result(rows, summary, extra)


def run_doppler(sc: Scenario, windows=None) -> Result:
    sc.require_pair("doppler")
    windows = windows_for(sc) if windows is None else windows
    _require_windows(windows)
    wavelength = sc.channels[0].wavelength_m
    rows, max_shift, max_dt, residual = [], 0.0, 0.0, 0.0
    for w in windows:
        for d, s in zip(dop.doppler_series(w, wavelength), dop.sync_series(w)):
            rows.append([format_utc(d.t), d.shift_a_hz, d.shift_b_hz, d.offset_hz, s.delta_t_s])
            max_shift = max(max_shift, abs(d.shift_a_hz), abs(d.shift_b_hz))
            max_dt = max(max_dt, s.delta_t_s)
        arr = dop.compensated_arrivals(w, sc.send_period_s)
        residual = max(residual, float(abs(arr.compensated_s).max()))
    summary = {**_window_summary(windows), "max_abs_shift_hz": max_shift, "max_delta_t_c_s": max_dt}
    extra = {"sign_convention": dop.SIGN_CONVENTION, "wavelength_m": wavelength,
             "max_compensated_residual_s": residual}
    return Result(rows, summary, extra)


RUNNERS = {
    "access": run_access,
    "linkbudget": run_linkbudget,
    "keyrate": run_keyrate,
    "doppler": run_doppler,
    "optimize": run_optimize,
}


def summarize(command: str, sc: Scenario, slot_seconds=None) -> dict:
    """Scalar summaries for one sweep point; an empty search yields a zero-count row."""
    windows = windows_for(sc)
    if not windows and command != "access":
        summary = dict.fromkeys(SUMMARY_COLUMNS[command])
        summary.update(_window_summary(windows))
        return summary
    runner = RUNNERS[command]
    kwargs = {"slot_seconds": slot_seconds} if command in ("keyrate", "optimize") else {}
    result = runner(sc, windows, **kwargs)
    return {k: result.summary[k] for k in SUMMARY_COLUMNS[command]}
