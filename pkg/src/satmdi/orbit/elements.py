"""Orbital elements, TLE parsing/formatting and circular-orbit construction."""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from ..errors import ChecksumError, FormatError, RangeError

MU_EARTH = 398600.4418  # km^3/s^2
R_EARTH = 6378.137  # km, WGS-84 equatorial radius
J2 = 1.08262668e-3
SECONDS_PER_DAY = 86400.0
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OrbitElements:
    """Mean Keplerian elements in the TLE convention.

    Angles are radians in [0, 2π); ``epoch`` is a POSIX UTC timestamp.
    The trailing fields only exist so a parsed TLE can be written back
    unchanged; the propagator ignores them.
    """

    epoch: float
    inclination: float
    raan: float
    eccentricity: float
    arg_perigee: float
    mean_anomaly: float
    mean_motion: float  # rev/day
    drag_term: float = 0.0  # B*
    catalog_id: int = 0
    name: str = ""
    classification: str = "U"
    intl_designator: str = ""
    ndot: float = 0.0  # rev/day^2, TLE stores ndot/2
    nddot: float = 0.0  # rev/day^3, TLE stores nddot/6
    element_set: int = 999
    rev_number: int = 0

    def __post_init__(self):
        if not 0.0 <= self.eccentricity < 1.0:
            raise RangeError(f"eccentricity {self.eccentricity} outside [0, 1)")
        if not self.mean_motion > 0.0:
            raise RangeError(f"mean motion {self.mean_motion} must be positive")
        for name in ("inclination", "raan", "arg_perigee", "mean_anomaly"):
            value = getattr(self, name)
            if not 0.0 <= value < TWO_PI:
                object.__setattr__(self, name, value % TWO_PI)

    @property
    def mean_motion_rad_s(self) -> float:
        return self.mean_motion * TWO_PI / SECONDS_PER_DAY

    @property
    def semi_major_axis_km(self) -> float:
        n = self.mean_motion_rad_s
        return (MU_EARTH / (n * n)) ** (1.0 / 3.0)

    @property
    def period_s(self) -> float:
        return SECONDS_PER_DAY / self.mean_motion


def tle_checksum(line: str) -> int:
    """Modulo-10 checksum over the first 68 columns (digits, '-' counts 1)."""
    total = 0
    for ch in line[:68]:
        if ch.isdigit():
            total += int(ch)
        elif ch == "-":
            total += 1
    return total % 10


def _epoch_to_timestamp(year2: int, day: float) -> float:
    year = 1900 + year2 if year2 >= 57 else 2000 + year2
    start = datetime(year, 1, 1, tzinfo=timezone.utc).timestamp()
    return start + (day - 1.0) * SECONDS_PER_DAY


def _timestamp_to_epoch(ts: float) -> tuple[int, float]:
    year = datetime.fromtimestamp(ts, tz=timezone.utc).year
    start = datetime(year, 1, 1, tzinfo=timezone.utc).timestamp()
    return year % 100, (ts - start) / SECONDS_PER_DAY + 1.0


def _parse_exp(field: str) -> float:
    """Decode the TLE 'assumed decimal point' exponent notation (e.g. ' 12345-3')."""
    s = field.strip()
    if not s:
        return 0.0
    sign = -1.0 if s[0] == "-" else 1.0
    s = s.lstrip("+-")
    mantissa, exp = s[:-2], s[-2:]
    return sign * float("0." + mantissa.strip()) * 10.0 ** int(exp)


def _format_exp(value: float) -> str:
    if value == 0.0:
        return " 00000-0"
    sign = "-" if value < 0 else " "
    mag = abs(value)
    exp = math.floor(math.log10(mag)) + 1
    mantissa = round(mag / 10.0 ** exp * 1e5)
    if mantissa >= 100000:
        mantissa //= 10
        exp += 1
    exp_sign = "-" if exp < 0 else "+"
    return f"{sign}{mantissa:05d}{exp_sign}{abs(exp):d}"


def _field(line: str, lo: int, hi: int, lineno: int, conv=float):
    text = line[lo - 1:hi]
    try:
        return conv(text)
    except ValueError:
        raise FormatError(f"bad field in columns {lo}-{hi}: {text!r}", lineno) from None


def parse_tle(text: str) -> OrbitElements:
    """Parse one TLE record (two element lines, optionally preceded by a title).

    Raises
    ------
    ChecksumError
        A line's trailing modulo-10 digit does not match its content.
    FormatError
        Wrong line count, length, line number or an undecodable field.
    """
    lines = [ln.rstrip("\r\n") for ln in text.strip("\n").splitlines() if ln.strip()]
    name = ""
    if len(lines) == 3:
        name = lines[0].strip()
        lines = lines[1:]
    if len(lines) != 2:
        raise FormatError(f"expected 2 element lines, got {len(lines)}")
    l1, l2 = (ln.rstrip() for ln in lines)
    for idx, (line, tag) in enumerate(((l1, "1"), (l2, "2")), start=1):
        if len(line) != 69:
            raise FormatError(f"length {len(line)} != 69", idx)
        if line[0] != tag:
            raise FormatError(f"line number {line[0]!r} != {tag!r}", idx)
        if not line[68].isdigit():
            raise FormatError("checksum column is not a digit", idx)
        if tle_checksum(line) != int(line[68]):
            raise ChecksumError(
                f"checksum {line[68]} != computed {tle_checksum(line)}", idx
            )

    catalog = _field(l1, 3, 7, 1, int)
    if _field(l2, 3, 7, 2, int) != catalog:
        raise FormatError("catalog number differs between lines", 2)
    year2 = _field(l1, 19, 20, 1, int)
    day = _field(l1, 21, 32, 1)
    ndot = _field(l1, 34, 43, 1)
    try:
        nddot = _parse_exp(l1[44:52])
        bstar = _parse_exp(l1[53:61])
    except ValueError:
        raise FormatError("bad exponent field", 1) from None
    elset = _field(l1, 65, 68, 1, lambda s: int(s) if s.strip() else 0)

    deg = math.radians
    return OrbitElements(
        epoch=_epoch_to_timestamp(year2, day),
        inclination=deg(_field(l2, 9, 16, 2)),
        raan=deg(_field(l2, 18, 25, 2)),
        eccentricity=_field(l2, 27, 33, 2, lambda s: float("0." + s.strip())),
        arg_perigee=deg(_field(l2, 35, 42, 2)),
        mean_anomaly=deg(_field(l2, 44, 51, 2)),
        mean_motion=_field(l2, 53, 63, 2),
        drag_term=bstar,
        catalog_id=catalog,
        name=name,
        classification=l1[7],
        intl_designator=l1[9:17].strip(),
        ndot=2.0 * ndot,
        nddot=6.0 * nddot,
        element_set=elset,
        rev_number=_field(l2, 64, 68, 2, lambda s: int(s) if s.strip() else 0),
    )


def parse_tle_file(text: str) -> list[OrbitElements]:
    """Parse every record of a 2-line or 3-line TLE file."""
    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip()]
    records, i = [], 0
    while i < len(lines):
        if lines[i].startswith("1 ") and i + 1 < len(lines) and lines[i + 1].startswith("2 "):
            records.append(parse_tle("\n".join(lines[i:i + 2])))
            i += 2
        elif i + 2 < len(lines) and lines[i + 1].startswith("1 "):
            records.append(parse_tle("\n".join(lines[i:i + 3])))
            i += 3
        else:
            raise FormatError(f"unrecognised TLE record at line {i + 1}")
    return records


def _with_checksum(body: str) -> str:
    if len(body) != 68:
        raise FormatError(f"formatted line has {len(body)} columns, expected 68")
    return body + str(tle_checksum(body))


def format_tle(el: OrbitElements, include_name: bool = True) -> str:
    """Write elements back to TLE text; ``parse_tle`` of the result reproduces them."""
    year2, day = _timestamp_to_epoch(el.epoch)
    ndot = el.ndot / 2.0
    ndot_s = ("-" if ndot < 0 else " ") + f"{abs(ndot):.8f}"[1:]
    l1 = (
        f"1 {el.catalog_id:05d}{el.classification} {el.intl_designator:<8s} "
        f"{year2:02d}{day:012.8f} {ndot_s} {_format_exp(el.nddot / 6.0)} "
        f"{_format_exp(el.drag_term)} 0 {el.element_set % 10000:4d}"
    )
    ecc = f"{el.eccentricity:.7f}"[2:]
    l2 = (
        f"2 {el.catalog_id:05d} {math.degrees(el.inclination):8.4f} "
        f"{math.degrees(el.raan):8.4f} {ecc} {math.degrees(el.arg_perigee):8.4f} "
        f"{math.degrees(el.mean_anomaly):8.4f} {el.mean_motion:11.8f}{el.rev_number % 100000:5d}"
    )
    lines = [_with_checksum(l1), _with_checksum(l2)]
    if include_name and el.name:
        lines.insert(0, el.name)
    return "\n".join(lines)


def circular_orbit(altitude_km: float, inclination_deg: float, raan_deg: float,
                   epoch: float, mean_anomaly_deg: float = 0.0) -> OrbitElements:
    """Circular orbit at ``altitude_km`` above the equatorial radius."""
    if not 200.0 <= altitude_km <= 2000.0:
        raise RangeError(f"altitude {altitude_km} km outside [200, 2000]")
    a = R_EARTH + altitude_km
    n_rad = math.sqrt(MU_EARTH / a ** 3)
    return OrbitElements(
        epoch=float(epoch),
        inclination=math.radians(inclination_deg) % TWO_PI,
        raan=math.radians(raan_deg) % TWO_PI,
        eccentricity=0.0,
        arg_perigee=0.0,
        mean_anomaly=math.radians(mean_anomaly_deg) % TWO_PI,
        mean_motion=n_rad * SECONDS_PER_DAY / TWO_PI,
        name=f"CIRCULAR {altitude_km:g} km",
    )


def parse_utc(value) -> float:
    """ISO-8601 string (or number) to POSIX seconds; naive strings are taken as UTC."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip().replace("Z", "+00:00")
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def format_utc(ts: float) -> str:
    dt = datetime(1970, 1, 1, tzinfo=timezone.utc) + timedelta(seconds=ts)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.%fZ")


__all__ = [
    "OrbitElements", "parse_tle", "parse_tle_file", "format_tle", "tle_checksum",
    "circular_orbit", "parse_utc", "format_utc",
    "MU_EARTH", "R_EARTH", "J2",
]
