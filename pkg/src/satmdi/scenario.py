"""Scenario files: strict JSON schema, defaults, and construction of model objects."""
from __future__ import annotations

import copy
import itertools
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .channel import DEFAULT_FIXED_LOSSES_DB, ChannelParams, TurbulenceProfile, calibrate_slant_mode
from .errors import ConfigError, InvariantError, ParseError, SatMDIError, SchemaError
from .mdi_rate import FIXED_SETTING, IntensitySetting, ProtocolParams
from .orbit import GroundStation, OrbitElements, circular_orbit, format_tle, format_utc, parse_tle_file, parse_utc

MAX_SWEEP_AXES = 4
MAX_SWEEP_POINTS = 100_000
SWEEP_COMMANDS = ("access", "linkbudget", "keyrate", "doppler", "optimize")

# Device defaults follow the practical parameter list used throughout the package.
DEFAULTS = {
    "channel": {
        "wavelength_m": 780e-9,
        "r_s_m": 0.065,
        "r_r_m": 0.15,
        "fixed_losses_db": dict(DEFAULT_FIXED_LOSSES_DB),
        "divergence_urad": 14.0,
        "min_elevation_deg": 10.0,
        "slant_mode": "auto",
    },
    "turbulence": {"c0": 1.7e-14, "wind_rms_mps": 21.0, "z_max_m": 20000.0, "site_altitude_m": 0.0},
    "protocol": {
        "e_d": 0.015, "e_0": 0.5, "f_e": 1.16, "y_0": 3e-6,
        "pulse_rate_hz": 1e14, "n_sigma": 5.0, "finite_size": False,
    },
    "intensities": {"mode": "fixed", "mu_a": 0.5, "nu_a": 0.1, "mu_b": 0.5, "nu_b": 0.1, "slot_seconds": 25},
    "doppler": {"send_period_s": 0.01},
    "availability_factor": 1.0,
    "seed": 0,
    "propagator": "j2",
}
STATION_DEFAULTS = {"altitude_m": 0.0}
CIRCULAR_DEFAULTS = {"raan_deg": 0.0, "mean_anomaly_deg": 0.0}


def _schema() -> dict:
    text = resources.files("satmdi").joinpath("data/scenario.schema.json").read_text("utf-8")
    return json.loads(text)


_VALIDATOR = jsonschema.Draft202012Validator(_schema())


@dataclass(frozen=True)
class Search:
    t0: float
    t1: float
    step_s: float


@dataclass(frozen=True)
class Scenario:
    satellite: OrbitElements
    stations: tuple
    channels: tuple  # one ChannelParams per station (global values plus overrides)
    turbulences: tuple  # one TurbulenceProfile per station
    protocol: ProtocolParams
    search: Search
    intensities: IntensitySetting | None  # None means "optimize"
    slot_seconds: float
    availability_factor: float
    seed: int
    propagator: str
    send_period_s: float
    config: dict = field(compare=False, repr=False)  # resolved document
    defaults_applied: tuple = field(default=(), compare=False)
    slant_calibration: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def min_elevation_rad(self) -> float:
        return max(c.min_elevation_rad for c in self.channels)

    @property
    def optimize(self) -> bool:
        return self.intensities is None

    def require_pair(self, command: str) -> None:
        if len(self.stations) != 2:
            raise ConfigError(f"'{command}' needs exactly two stations (Alice and Bob); "
                              f"the scenario has {len(self.stations)}")


def _apply_defaults(doc: dict, defaults: dict, prefix: str, log: list) -> None:
    for key, value in defaults.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict) and key != "fixed_losses_db":
            _apply_defaults(doc.setdefault(key, {}), value, path + ".", log)
        elif key not in doc:
            doc[key] = copy.deepcopy(value)
            log.append(path)


def _satellite(sat: dict, base_dir: Path) -> OrbitElements:
    if "circular" in sat:
        c = sat["circular"]
        return circular_orbit(c["altitude_km"], c["inclination_deg"], c["raan_deg"],
                              parse_utc(c["epoch"]), c["mean_anomaly_deg"])
    if "tle_file" in sat:
        path = Path(sat["tle_file"])
        if not path.is_absolute():
            path = base_dir / path
        try:
            text = path.read_text("utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read TLE file {path}: {exc}") from None
    else:
        text = sat["tle"]
    records = parse_tle_file(text)
    if not records:
        raise ConfigError("TLE source holds no element sets")
    return records[0]


def _channel(values: dict, mode: str) -> ChannelParams:
    return ChannelParams(
        wavelength_m=values["wavelength_m"], r_s_m=values["r_s_m"], r_r_m=values["r_r_m"],
        fixed_losses_db=tuple(values["fixed_losses_db"].items()),
        divergence_urad=values["divergence_urad"],
        min_elevation_rad=math.radians(values["min_elevation_deg"]), slant_mode=mode,
    )


def _turbulence(values: dict) -> TurbulenceProfile:
    return TurbulenceProfile(values["c0"], values["wind_rms_mps"], values["z_max_m"], values["site_altitude_m"])


def scenario_from_dict(doc: dict, base_dir: str | Path = ".") -> Scenario:
    """Validate ``doc`` against the schema, fill defaults, and build the model objects."""
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {err.message}")
    doc = copy.deepcopy(doc)
    log: list[str] = []
    _apply_defaults(doc, DEFAULTS, "", log)
    if "circular" in doc["satellite"]:
        _apply_defaults(doc["satellite"]["circular"], CIRCULAR_DEFAULTS, "satellite.circular.", log)
    for i, st in enumerate(doc["stations"]):
        _apply_defaults(st, STATION_DEFAULTS, f"stations.{i}.", log)

    try:
        satellite = _satellite(doc["satellite"], Path(base_dir))
        search = doc.setdefault("search", {})
        if "t0" not in search:
            search["t0"] = format_utc(satellite.epoch)
            log.append("search.t0")
        if "t1" not in search:
            search["t1"] = format_utc(parse_utc(search["t0"]) + 86400.0)
            log.append("search.t1")
        if "step_s" not in search:
            search["step_s"] = 1.0
            log.append("search.step_s")
        t0, t1 = parse_utc(search["t0"]), parse_utc(search["t1"])
        if not t1 > t0:
            raise InvariantError("search.t1 must be after search.t0")

        stations = tuple(
            GroundStation.from_degrees(s["name"], s["latitude_deg"], s["longitude_deg"], s["altitude_m"])
            for s in doc["stations"]
        )
        mode = doc["channel"]["slant_mode"]
        calibration = {"requested": mode, "chosen": mode}
        if mode == "auto":
            # the reference losses were measured with the default devices, so calibrate on those
            mode, report = calibrate_slant_mode()
            calibration = {"requested": "auto", "chosen": mode, "report": report}
        channels, turbs = [], []
        for s in doc["stations"]:
            merged = {**doc["channel"], **s.get("channel", {})}
            channels.append(_channel(merged, mode))
            turbs.append(_turbulence({**doc["turbulence"], **s.get("turbulence", {})}))

        p = doc["protocol"]
        protocol = ProtocolParams(p["e_d"], p["e_0"], p["f_e"], p["y_0"], p["pulse_rate_hz"],
                                  p["n_sigma"], p["finite_size"])
        it = doc["intensities"]
        setting = None
        if it["mode"] == "fixed":
            setting = IntensitySetting(it["mu_a"], it["nu_a"], it["mu_b"], it["nu_b"])
        if not it["slot_seconds"] >= 1:
            raise InvariantError("intensities.slot_seconds must be at least 1")
        if not 0 <= doc["availability_factor"] <= 1:
            raise InvariantError("availability_factor must lie in [0, 1]")
        if not doc["doppler"]["send_period_s"] > 0:
            raise InvariantError("doppler.send_period_s must be positive")
        if not 0 < search["step_s"] <= 10:
            raise InvariantError("search.step_s must lie in (0, 10]")
    except ConfigError:
        raise
    except (SatMDIError, ValueError) as exc:
        raise InvariantError(str(exc)) from None

    return Scenario(
        satellite=satellite, stations=stations, channels=tuple(channels), turbulences=tuple(turbs),
        protocol=protocol, search=Search(t0, t1, float(search["step_s"])), intensities=setting,
        slot_seconds=float(it["slot_seconds"]), availability_factor=float(doc["availability_factor"]),
        seed=int(doc["seed"]), propagator=doc["propagator"],
        send_period_s=float(doc["doppler"]["send_period_s"]),
        config=doc, defaults_applied=tuple(log), slant_calibration=calibration,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read scenario {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from None
    return scenario_from_dict(doc, path.parent)


def scenario_to_dict(scenario: Scenario) -> dict:
    """Resolved document; TLE files are inlined so the result is self-contained."""
    doc = copy.deepcopy(scenario.config)
    if "tle_file" in doc["satellite"]:
        doc["satellite"] = {"tle": format_tle(scenario.satellite)}
    return doc


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n", "utf-8")


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepAxis:
    path: str
    values: tuple


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple
    command: str

    def __post_init__(self):
        if not 1 <= len(self.axes) <= MAX_SWEEP_AXES:
            raise SchemaError(f"a sweep needs 1 to {MAX_SWEEP_AXES} axes")
        if self.command not in SWEEP_COMMANDS:
            raise SchemaError(f"sweep command must be one of {SWEEP_COMMANDS}")
        if any(len(a.values) == 0 for a in self.axes):
            raise SchemaError("sweep axes must have at least one value")
        if math.prod(len(a.values) for a in self.axes) > MAX_SWEEP_POINTS:
            raise SchemaError(f"sweep grid exceeds {MAX_SWEEP_POINTS} points")

    def points(self):
        """Grid points in lexicographic order (last axis varies fastest)."""
        return itertools.product(*(a.values for a in self.axes))


_SWEEP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "axes"],
    "properties": {
        "description": {"type": "string"},
        "command": {"enum": list(SWEEP_COMMANDS)},
        "axes": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["path", "values"],
                "properties": {"path": {"type": "string"}, "values": {"type": "array"}},
            },
        },
    },
}


def load_sweep(path: str | Path) -> SweepSpec:
    try:
        doc = json.loads(Path(path).read_text("utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read sweep spec {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        jsonschema.validate(doc, _SWEEP_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"sweep spec: {exc.message}") from None
    axes = tuple(SweepAxis(a["path"], tuple(a["values"])) for a in doc["axes"])
    return SweepSpec(axes, doc["command"])


def set_path(doc: dict, path: str, value) -> None:
    """Replace the value at a dotted path that must already exist in the resolved document."""
    keys = path.split(".")
    node = doc
    for key in keys[:-1]:
        node = _step(node, key, path)
    last = keys[-1]
    if isinstance(node, list):
        _step(node, last, path)
        node[int(last)] = value
    elif isinstance(node, dict) and last in node:
        node[last] = value
    else:
        raise SchemaError(f"sweep axis path {path!r} does not name a scenario value")


def _step(node, key, path):
    if isinstance(node, dict) and key in node:
        return node[key]
    if isinstance(node, list) and key.isdigit() and int(key) < len(node):
        return node[int(key)]
    raise SchemaError(f"sweep axis path {path!r} does not name a scenario value")


def with_values(scenario: Scenario, assignments: dict, base_dir: str | Path = ".") -> Scenario:
    doc = copy.deepcopy(scenario.config)
    for path, value in assignments.items():
        set_path(doc, path, value)
    return scenario_from_dict(doc, base_dir)


def default_setting(scenario: Scenario) -> IntensitySetting:
    return scenario.intensities if scenario.intensities is not None else FIXED_SETTING
