import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from satmdi.doppler import (
    C_LIGHT, compensated_arrivals, doppler_series, doppler_shift, sync_offset, sync_series,
)
from satmdi.errors import DomainError
from satmdi.orbit import AccessWindow, TopoSample


def test_shift_examples():
    assert doppler_shift(-7000.0, 780e-9) == pytest.approx(8.97e9, abs=0.01e9)
    assert doppler_shift(0.0, 780e-9) == 0.0
    assert doppler_shift(-7000.0, 1550e-9) == pytest.approx(4.52e9, abs=0.01e9)
    with pytest.raises(DomainError):
        doppler_shift(2.5e4, 780e-9)


def test_sync_offset_examples():
    assert sync_offset(5e5, 5e5) == 0.0
    assert sync_offset(8e5, 5e5) == pytest.approx(1.0007e-3, abs=1e-7)
    assert sync_offset(8e5, 5e5) == sync_offset(5e5, 8e5)
    with pytest.raises(DomainError):
        sync_offset(0.0, 5e5)


@given(rr=st.floats(-1.9e4, 1.9e4))
def test_wavelength_scaling(rr):
    assert doppler_shift(rr, 1550e-9) == pytest.approx(doppler_shift(rr, 780e-9) * 780 / 1550,
                                                       rel=1e-14, abs=1e-300)


def _swap(window):
    return AccessWindow(window.start, window.end, tuple((b, a) for a, b in window.samples))


def test_pass_envelope_and_antisymmetry(dual_window):
    series = doppler_series(dual_window, 780e-9)
    peak = max(max(abs(d.shift_a_hz), abs(d.shift_b_hz)) for d in series)
    assert 7e9 <= peak <= 11e9
    swapped = doppler_series(_swap(dual_window), 780e-9)
    assert all(s.offset_hz == -d.offset_hz for d, s in zip(series, swapped))
    s1550 = doppler_series(dual_window, 1550e-9)
    assert np.allclose([d.shift_a_hz * 780 / 1550 for d in series], [d.shift_a_hz for d in s1550],
                       rtol=1e-14)


@pytest.mark.parametrize("link", [0, 1])
def test_zero_crossing_at_range_minimum(dual_window, link):
    w = dual_window
    series = doppler_series(w, 780e-9)
    shifts = np.array([d.shift_a_hz if link == 0 else d.shift_b_hz for d in series])
    ranges = w.column(link, "range_m")
    t = w.times
    k = int(np.flatnonzero(np.diff(np.sign(shifts)) != 0)[0])
    t_zero = t[k] - shifts[k] * (t[k + 1] - t[k]) / (shifts[k + 1] - shifts[k])
    assert abs(t_zero - t[int(np.argmin(ranges))]) <= 1.0
    # approaching first (positive shift), receding after
    assert shifts[0] > 0 > shifts[-1]


def test_single_station_window_rejected(ngari_window):
    with pytest.raises(DomainError):
        doppler_series(ngari_window, 780e-9)


def test_sync_series_is_range_difference(dual_window):
    for s in sync_series(dual_window):
        assert s.delta_t_s == pytest.approx(abs(s.range_a_m - s.range_b_m) / C_LIGHT)
        assert s.delta_t_s >= 0


def test_static_geometry_compensates_exactly():
    a = TopoSample(0.0, 1.0, 0.0, 6.0e5, 0.0)
    b = TopoSample(0.0, 1.0, 0.0, 9.0e5, 0.0)
    rows = tuple((TopoSample(float(t), 1.0, 0.0, 6.0e5, 0.0), TopoSample(float(t), 1.0, 0.0, 9.0e5, 0.0))
                 for t in range(11))
    res = compensated_arrivals(AccessWindow(0.0, 10.0, rows), 0.1)
    assert np.all(res.compensated_s == 0.0)
    assert np.allclose(res.uncompensated_s, (b.range_m - a.range_m) / C_LIGHT)


def test_dynamic_residual_bounded(dual_window):
    res = compensated_arrivals(dual_window, 0.01)
    rate = np.abs(dual_window.column(0, "range_rate_mps") - dual_window.column(1, "range_rate_mps")) / C_LIGHT
    step = np.diff(dual_window.times).max()
    assert np.max(np.abs(res.compensated_s)) <= rate.max() * step * 1.01
    assert np.max(np.abs(res.compensated_s)) < 0.05 * np.max(np.abs(res.uncompensated_s))
    # at sample instants the uncompensated mismatch is the sync offset itself
    on_sample = np.isin(res.send_times, dual_window.times)
    expected = np.array([s.delta_t_s for s in sync_series(dual_window)])
    got = np.abs(res.uncompensated_s[on_sample])
    assert np.allclose(got, expected[np.isin(dual_window.times, res.send_times)], rtol=1e-9)
    with pytest.raises(DomainError):
        compensated_arrivals(dual_window, 0.0)
