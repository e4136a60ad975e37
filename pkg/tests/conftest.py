"""Shared fixtures: shipped scenarios, computed passes and cached expensive results."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from satmdi.analysis import budget_for, windows_for
from satmdi.intensity import optimize_pass
from satmdi.validate import shipped_scenario

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}

SLOT_SIZES = (1, 5, 10, 15, 20, 25)


@pytest.fixture(scope="session")
def dual_scenario():
    return shipped_scenario("micius_dual_pass")


@pytest.fixture(scope="session")
def dual_window(dual_scenario):
    return windows_for(dual_scenario)[0]


@pytest.fixture(scope="session")
def dual_budget(dual_scenario, dual_window):
    return budget_for(dual_scenario, dual_window)


@pytest.fixture(scope="session")
def ngari_scenario():
    return shipped_scenario("ngari_single_pass")


@pytest.fixture(scope="session")
def ngari_window(ngari_scenario):
    return windows_for(ngari_scenario)[0]


@pytest.fixture(scope="session")
def improved_scenario():
    return shipped_scenario("micius_improved_apertures")


@pytest.fixture(scope="session")
def improved_budget(improved_scenario):
    return budget_for(improved_scenario, windows_for(improved_scenario)[0])


@pytest.fixture(scope="session")
def slot_plans(improved_scenario, improved_budget):
    """SlotPlan per slot size on the improved-aperture pass (computed once)."""
    return {s: optimize_pass(improved_budget, s, improved_scenario.protocol) for s in SLOT_SIZES}


def oracle_points(n: int = 20, seed: int = 2024) -> list[dict]:
    """Randomised oracle comparison points plus the reference operating point."""
    rng = np.random.default_rng(seed)
    points = [dict(mu_a=0.5, mu_b=0.5, eta_a=1e-3, eta_b=1e-3, y_0=3e-6, e_d=0.015)]
    for _ in range(n - 1):
        points.append(dict(
            mu_a=float(rng.uniform(0.05, 1.0)), mu_b=float(rng.uniform(0.05, 1.0)),
            eta_a=float(10 ** rng.uniform(-2, math.log10(0.8))),
            eta_b=float(10 ** rng.uniform(-2, math.log10(0.8))),
            y_0=float(10 ** rng.uniform(-7, -2)), e_d=float(rng.uniform(0, 0.05)),
        ))
    return points


@pytest.fixture(scope="session")
def oracle_comparisons():
    """Closed form vs Monte-Carlo z-scores at 1e7 trials for each oracle point."""
    from oracle_support import compare_point
    return [compare_point(p, trials=10_000_000, seed=i) for i, p in enumerate(oracle_points())]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
