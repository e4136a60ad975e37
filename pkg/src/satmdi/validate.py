"""Built-in reproduction checks against the published Micius-era reference values."""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

from .analysis import budget_for, windows_for
from .channel import (
    NGARI_REFERENCE_POINTS, ChannelParams, TurbulenceProfile, _budget, calibrate_slant_mode,
)
from .scenario import Scenario, load_scenario

COLUMNS = ["check", "computed", "expected", "tolerance", "pass"]


@dataclass(frozen=True)
class Check:
    name: str
    computed: float
    expected: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.computed - self.expected) <= self.tolerance

    def row(self) -> list:
        return [self.name, self.computed, self.expected, self.tolerance, "pass" if self.passed else "fail"]


def shipped_scenario(name: str) -> Scenario:
    """Load one of the scenarios packaged under ``satmdi/data/scenarios``."""
    ref = resources.files("satmdi").joinpath(f"data/scenarios/{name}.json")
    with resources.as_file(ref) as path:
        return load_scenario(path)


def run_checks() -> list[Check]:
    checks = []
    mode, _ = calibrate_slant_mode()
    params, profile = ChannelParams(slant_mode=mode), TurbulenceProfile()
    labels = ("ngari_loss_high_elevation_db", "ngari_loss_low_elevation_db")
    for label, (rng, el, ref) in zip(labels, NGARI_REFERENCE_POINTS):
        loss = _budget(rng, math.radians(el), params, profile)[1]
        checks.append(Check(label, loss, ref, 4.0))

    ngari = shipped_scenario("ngari_single_pass")
    window = windows_for(ngari)[0]
    checks.append(Check("ngari_pass_max_elevation_deg",
                        math.degrees(window.column(0, "elevation").max()), 75.9, 2.0))

    dual = shipped_scenario("micius_dual_pass")
    window = windows_for(dual)[0]
    losses = [s.loss_total_db for s in budget_for(dual, window)]
    checks.append(Check("dual_window_duration_s", window.duration_s, 278.0, 90.0))
    checks.append(Check("dual_min_loss_total_db", min(losses), 94.0, 5.0))
    checks.append(Check("dual_max_loss_total_db", max(losses), 100.2, 5.0))

    improved = shipped_scenario("micius_improved_apertures")
    window = windows_for(improved)[0]
    losses = [s.loss_total_db for s in budget_for(improved, window)]
    checks.append(Check("improved_aperture_min_loss_total_db", min(losses), 55.0, 4.0))
    return checks
