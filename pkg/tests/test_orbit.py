import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from satmdi.errors import (
    ChecksumError, EmptySearchError, FormatError, PropagationWindowError, RangeError,
)
from satmdi.orbit import (
    GroundStation, OrbitElements, circular_orbit, find_access_windows, format_tle, format_utc,
    parse_tle, parse_tle_file, parse_utc, propagate, propagate_many, sample_geometry, tle_checksum,
)
from satmdi.orbit.elements import MU_EARTH, R_EARTH
from satmdi.orbit.geometry import gmst, look_angles
from satmdi.orbit.propagate import angular_momentum, secular_rates, solve_kepler, specific_energy

ISS = """ISS (ZARYA)
1 25544U 98067A   08264.51782528 -.00002182  00000-0 -11606-4 0  2927
2 25544  51.6416 247.4627 0006703 130.5360 325.0288 15.72125391563537"""


def test_checksum_known_lines():
    l1, l2 = ISS.splitlines()[1:]
    assert tle_checksum(l1) == 7
    assert tle_checksum(l2) == 7


def test_parse_iss_fields():
    el = parse_tle(ISS)
    assert el.catalog_id == 25544
    assert el.name == "ISS (ZARYA)"
    assert math.degrees(el.inclination) == pytest.approx(51.6416)
    assert el.eccentricity == pytest.approx(0.0006703)
    assert el.mean_motion == pytest.approx(15.72125391)
    assert el.drag_term == pytest.approx(-1.1606e-5)
    assert format_utc(el.epoch).startswith("2008-09-20T12:25:")


def test_bad_checksum_reports_line():
    lines = ISS.splitlines()
    bad = lines[2][:-1] + str((int(lines[2][-1]) + 1) % 10)
    with pytest.raises(ChecksumError) as info:
        parse_tle("\n".join([lines[0], lines[1], bad]))
    assert info.value.line == 2


def test_short_line_is_format_error():
    lines = ISS.splitlines()
    with pytest.raises(FormatError):
        parse_tle("\n".join([lines[1][:60], lines[2]]))


def test_parse_tle_file_multiple_records():
    text = ISS + "\n" + "\n".join(ISS.splitlines()[1:]) + "\n"
    records = parse_tle_file(text)
    assert len(records) == 2
    assert records[0].catalog_id == records[1].catalog_id


@given(
    inc=st.floats(0.0, 179.9), raan=st.floats(0.0, 359.9), ecc=st.floats(0.0, 0.2),
    argp=st.floats(0.0, 359.9), ma=st.floats(0.0, 359.9), n=st.floats(11.0, 16.5),
    day=st.floats(1.0, 365.0), cat=st.integers(1, 99999),
)
def test_format_parse_round_trip(inc, raan, ecc, argp, ma, n, day, cat):
    epoch = parse_utc("2016-01-01T00:00:00Z") + (day - 1) * 86400.0
    el = OrbitElements(epoch, math.radians(inc), math.radians(raan), ecc, math.radians(argp),
                       math.radians(ma), n, catalog_id=cat, name="TEST", intl_designator="16001A")
    text = format_tle(el)
    back = parse_tle(text)
    # the text format carries 4 decimals of degrees and 7 of eccentricity
    assert math.degrees(back.inclination) == pytest.approx(inc, abs=6e-5)
    assert back.eccentricity == pytest.approx(ecc, abs=6e-8)
    assert back.mean_motion == pytest.approx(n, abs=6e-9)
    assert back.epoch == pytest.approx(epoch, abs=1e-3)
    assert format_tle(back) == text


def test_shipped_tle_parses():
    from importlib import resources
    text = resources.files("satmdi").joinpath("data/micius_20160925.tle").read_text()
    el = parse_tle_file(text)[0]
    assert el.catalog_id == 41731
    assert 470 < el.semi_major_axis_km - R_EARTH < 520


def test_circular_orbit_period_and_range():
    el = circular_orbit(500.0, 97.4, 0.0, 0.0)
    assert el.period_s == pytest.approx(2 * math.pi * math.sqrt((R_EARTH + 500) ** 3 / MU_EARTH))
    with pytest.raises(RangeError):
        circular_orbit(150.0, 97.4, 0.0, 0.0)
    with pytest.raises(RangeError):
        circular_orbit(2500.0, 97.4, 0.0, 0.0)


@given(m=st.floats(0.0, 2 * math.pi), e=st.floats(0.0, 0.95))
def test_kepler_solution_satisfies_equation(m, e):
    big_e = solve_kepler(np.array([m]), e)[0]
    assert big_e - e * math.sin(big_e) == pytest.approx(m, abs=1e-11)


def test_two_body_energy_and_momentum_conserved():
    el = OrbitElements(0.0, 1.2, 0.5, 0.05, 1.0, 0.3, 14.5)
    t = np.linspace(0.0, 10 * el.period_s, 4001)
    pos, vel = propagate_many(el, t, "two_body")
    energy = 0.5 * np.sum(vel ** 2, axis=1) - MU_EARTH / np.linalg.norm(pos, axis=1)
    h = np.linalg.norm(np.cross(pos, vel), axis=1)
    assert np.max(np.abs(energy / energy[0] - 1)) <= 1e-6
    assert np.max(np.abs(h / h[0] - 1)) <= 1e-6
    s = propagate(el, 1234.0, "two_body")
    assert specific_energy(s) == pytest.approx(-MU_EARTH / (2 * el.semi_major_axis_km), rel=1e-9)
    assert angular_momentum(s) == pytest.approx(h[0], rel=1e-9)


def test_two_body_returns_to_start_after_one_period():
    el = circular_orbit(500.0, 97.4, 10.0, 0.0, 20.0)
    pos, _ = propagate_many(el, np.array([0.0, el.period_s]), "two_body")
    assert np.linalg.norm(pos[1] - pos[0]) < 1e-6


def test_j2_sun_synchronous_precession():
    # a ~97.4 deg orbit at 500 km precesses about 360 deg per year
    el = circular_orbit(500.0, 97.4, 0.0, 0.0)
    raan_dot, _ = secular_rates(el, "j2")
    assert math.degrees(raan_dot) * 365.2422 * 86400 == pytest.approx(360.0, rel=0.03)
    assert secular_rates(el, "two_body") == (0.0, 0.0)


def test_velocity_matches_position_derivative():
    el = circular_orbit(500.0, 97.4, 30.0, 0.0, 10.0)
    t = np.array([100.0 - 0.01, 100.0, 100.0 + 0.01])
    pos, vel = propagate_many(el, t, "j2")
    numeric = (pos[2] - pos[0]) / 0.02
    assert np.allclose(numeric, vel[1], rtol=0, atol=1e-6)


def test_propagation_window_limit():
    el = circular_orbit(500.0, 97.4, 0.0, 0.0)
    with pytest.raises(PropagationWindowError):
        propagate(el, 8 * 86400.0)


def test_gmst_reference_value():
    # GMST at 2000-01-01T12:00:00 UT1 is 280.46061837 deg
    t = parse_utc("2000-01-01T12:00:00Z")
    assert math.degrees(float(gmst(t))) % 360 == pytest.approx(280.46061837, abs=1e-3)


def test_station_normalises_longitude():
    st_ = GroundStation.from_degrees("x", 10.0, 370.0, 0.0)
    assert math.degrees(st_.longitude) == pytest.approx(10.0)


def test_zenith_pass_elevation_and_range():
    station = GroundStation.from_degrees("equator", 0.0, 0.0, 0.0)
    t0 = parse_utc("2016-09-25T00:00:00Z")
    raan = math.degrees(float(gmst(t0)))  # node above longitude 0 at t0
    el = circular_orbit(500.0, 45.0, raan, t0, 0.0)
    elev, _, rng, rr = sample_geometry(el, [station], [t0], "two_body")[0]
    assert math.degrees(elev[0]) == pytest.approx(90.0, abs=1e-6)
    assert rng[0] / 1e3 == pytest.approx(500.0, abs=1e-6)
    assert abs(rr[0]) < 1.0


def test_range_rate_matches_range_derivative(ngari_scenario):
    sc = ngari_scenario
    t = sc.search.t0 + 900 + np.array([-0.05, 0.0, 0.05])
    _, _, rng, rr = sample_geometry(sc.satellite, sc.stations, t)[0]
    assert (rng[2] - rng[0]) / 0.1 == pytest.approx(rr[1], abs=0.05)


def test_access_window_edges_refined(dual_scenario, dual_window):
    sc, w = dual_scenario, dual_window
    tol = sc.search.step_s / 100
    for edge, outward in ((w.start, -tol), (w.end, tol)):
        inside = sample_geometry(sc.satellite, sc.stations, [edge])
        outside = sample_geometry(sc.satellite, sc.stations, [edge + outward])
        assert min(g[0][0] for g in inside) >= sc.min_elevation_rad
        assert min(g[0][0] for g in outside) < sc.min_elevation_rad
    assert all(min(s.elevation for s in row) >= sc.min_elevation_rad - 1e-12 for row in w.samples)


def test_access_windows_shrink_with_elevation(dual_scenario):
    sc = dual_scenario
    durations = []
    for deg in (10.0, 20.0, 30.0):
        ws = find_access_windows(sc.satellite, sc.stations, math.radians(deg),
                                 (sc.search.t0, sc.search.t1), 1.0)
        durations.append(sum(w.duration_s for w in ws))
    assert durations[0] > durations[1] > durations[2]


def test_access_errors(dual_scenario):
    sc = dual_scenario
    with pytest.raises(EmptySearchError):
        find_access_windows(sc.satellite, sc.stations, 0.2, (sc.search.t0, sc.search.t0))
    with pytest.raises(ValueError):
        find_access_windows(sc.satellite, sc.stations, 0.2, (sc.search.t0, sc.search.t1), step_s=20)


def test_look_angles_vectorised_matches_scalar(ngari_scenario):
    sc = ngari_scenario
    t = sc.search.t0 + np.arange(0.0, 600.0, 60.0)
    pos, vel = propagate_many(sc.satellite, t)
    vec = look_angles(t, pos, vel, sc.stations[0])
    for k in range(len(t)):
        one = look_angles(t[k:k + 1], pos[k:k + 1], vel[k:k + 1], sc.stations[0])
        for a, b in zip(vec, one):
            assert a[k] == pytest.approx(b[0], rel=1e-12, abs=1e-9)
