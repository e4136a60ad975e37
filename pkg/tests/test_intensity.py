import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from satmdi.channel import LinkBudgetSample
from satmdi.errors import DegenerateChannelError, DomainError, EmptyWindowError
from satmdi.intensity import (
    Bounds, _objective_factory, optimize_pass, optimize_slot, slot_partition,
)
from satmdi.mdi_rate import FIXED_SETTING, ProtocolParams, finite_size_rate, key_rate

P = ProtocolParams()
N_PULSES = 1e14


def _budget(n, eta_a=lambda t: 1e-3, eta_b=lambda t: 1e-3):
    out = []
    for t in range(n):
        a, b = eta_a(t), eta_b(t)
        la, lb = -10 * math.log10(a), -10 * math.log10(b)
        out.append(LinkBudgetSample(float(t), a, b, la, lb, la + lb, 1.0, 1.0, 0.1, 0.1))
    return out


def test_partition_examples():
    budget = _budget(279)  # samples at 0..278 s
    slots = slot_partition(budget, 25)
    assert len(slots) == 12
    assert [s.end - s.start for s in slots[:11]] == [25.0] * 11
    assert slots[-1].end - slots[-1].start == pytest.approx(3.0)
    assert sum(s.sample_count for s in slots) == 279
    one = slot_partition(budget, 1000)
    assert len(one) == 1 and one[0].sample_count == 279


def test_partition_tiles_without_overlap():
    slots = slot_partition(_budget(100), 7)
    for a, b in zip(slots, slots[1:]):
        assert a.end == b.start
        assert b.first_index == a.first_index + a.sample_count
    assert all(s.end > s.start for s in slots)


@given(size=st.integers(1, 60))
def test_partition_means_within_sample_range(size):
    budget = _budget(120, eta_a=lambda t: 1e-3 * (1 + math.sin(t / 9)), eta_b=lambda t: 2e-4 + 1e-6 * t)
    for s in slot_partition(budget, size):
        members = budget[s.first_index:s.first_index + s.sample_count]
        etas = [m.eta_a for m in members]
        assert min(etas) - 1e-18 <= s.mean_eta_a <= max(etas) + 1e-18
        assert s.mean_eta_a == pytest.approx(np.mean(etas))


def test_partition_errors():
    with pytest.raises(EmptyWindowError):
        slot_partition([], 5)
    with pytest.raises(DomainError):
        slot_partition(_budget(5), 0.5)


@pytest.mark.parametrize("n_pulses", [None, N_PULSES])
def test_symmetric_channels_give_symmetric_optimum(n_pulses):
    s, r = optimize_slot(3e-3, 3e-3, P, n_pulses=n_pulses)
    assert abs(s.mu_a - s.mu_b) < 1e-3 and abs(s.nu_a - s.nu_b) < 1e-3
    assert r > 0


@settings(max_examples=25)
@given(la=st.floats(15.0, 35.0), lb=st.floats(15.0, 35.0), finite=st.booleans())
def test_optimum_beats_fixed_and_is_swap_covariant(la, lb, finite):
    ea, eb = 10 ** (-la / 10), 10 ** (-lb / 10)
    n = N_PULSES if finite else None
    s, r = optimize_slot(ea, eb, P, n_pulses=n)
    fixed = finite_size_rate(FIXED_SETTING, ea, eb, P, n) if finite else key_rate(FIXED_SETTING, ea, eb, P)
    assert r >= fixed
    s2, r2 = optimize_slot(eb, ea, P, n_pulses=n)
    assert s2 == s.swapped() and r2 == r
    b = Bounds()
    for mu, nu in ((s.mu_a, s.nu_a), (s.mu_b, s.nu_b)):
        assert b.mu_min <= mu <= b.mu_max and b.nu_min <= nu < mu


def test_matches_exhaustive_grid_oracle():
    """10 dB asymmetric pair against a 40^4 grid over the same parametrisation."""
    ea, eb = 1e-2, 1e-3
    _, r = optimize_slot(ea, eb, P, n_pulses=N_PULSES)
    rate, _ = _objective_factory(ea, eb, P, Bounds(), N_PULSES)
    log_mu = np.linspace(math.log(0.01), 0.0, 40)
    frac = np.linspace(0.0, 1.0, 40)
    best = 0.0
    for lm in log_mu:
        mesh = np.meshgrid([lm], log_mu, frac, frac, indexing="ij")
        best = max(best, float(np.max(rate(mesh))))
    assert r >= best * 0.99


def test_asymptotic_matches_grid_oracle():
    ea, eb = 10 ** -2.5, 10 ** -3.5
    _, r = optimize_slot(ea, eb, P)
    rate, _ = _objective_factory(ea, eb, P, Bounds(), None)
    log_mu = np.linspace(math.log(0.01), 0.0, 400)
    best = float(np.max(rate(np.meshgrid(log_mu, log_mu, indexing="ij"))))
    assert r >= best * 0.99


def test_degenerate_and_domain_errors():
    with pytest.raises(DegenerateChannelError):
        optimize_slot(0.0, 0.0, P)
    with pytest.raises(DomainError):
        optimize_slot(1.5, 0.1, P)


def test_optimize_slot_deterministic():
    assert optimize_slot(2e-3, 7e-4, P, n_pulses=N_PULSES) == optimize_slot(2e-3, 7e-4, P, n_pulses=N_PULSES)


def test_pass_plan_invariants(slot_plans):
    for size, plan in slot_plans.items():
        assert plan.total_bits >= plan.baseline_bits
        assert len(plan.settings) == len(plan.slots)
        assert sum(s.sample_count for s in plan.slots) == len(plan.schedule)
        assert plan.total_bits == pytest.approx(sum(plan.slot_bits))


def test_finer_slots_dominate(slot_plans):
    finest = slot_plans[1].total_bits
    for size, plan in slot_plans.items():
        assert plan.total_bits <= finest * 1.01


def test_pass_is_deterministic(improved_scenario, improved_budget, slot_plans):
    again = optimize_pass(improved_budget, 25, improved_scenario.protocol)
    assert again == slot_plans[25]
