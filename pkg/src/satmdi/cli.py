"""Command-line entry point: ``satmdi <command> --scenario FILE --out DIR``.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import COLUMNS, RUNNERS, SUMMARY_COLUMNS, summarize
from .errors import ConfigError, DomainError, NumericalError, SatMDIError
from .scenario import load_scenario, load_sweep, with_values
from .validate import COLUMNS as VALIDATE_COLUMNS
from .validate import run_checks

log = logging.getLogger("satmdi")

COMMANDS = ("access", "linkbudget", "keyrate", "doppler", "optimize", "validate", "sweep")
EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERICAL = 1, 2, 3
PULSE_RATE_WARNING_HZ = 1e10


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="satmdi", description="Space-based MDI-QKD pass simulator.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", help="scenario JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--slot-seconds", type=float, default=None,
                   help="slot length for intensity optimisation (overrides the scenario)")
    p.add_argument("--sweep", help="sweep specification JSON (for the sweep command)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def format_value(value) -> str:
    """Shortest round-trip decimal for floats; empty string for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) or hasattr(value, "dtype"):
        value = float(value)
        return "" if math.isnan(value) else repr(value)
    return str(value)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "dtype"):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _meta(command, scenario, summary, extra, started, warnings) -> dict:
    meta = {
        "tool": "satmdi",
        "version": __version__,
        "command": command,
        "summary": summary,
        "details": extra,
        "warnings": warnings,
    }
    if scenario is not None:
        meta["resolved_scenario"] = scenario.config
        meta["defaults_applied"] = list(scenario.defaults_applied)
        meta["slant_mode_calibration"] = scenario.slant_calibration
    meta["wall_clock_s"] = time.perf_counter() - started
    return _jsonable(meta)


def _warnings(scenario) -> list:
    out = []
    if scenario is not None and scenario.protocol.pulse_rate_hz > PULSE_RATE_WARNING_HZ:
        out.append(f"pulse_rate_hz = {scenario.protocol.pulse_rate_hz:g} exceeds present-day sources; "
                   "bit totals scale linearly with it")
    return out


def execute(args) -> dict[str, str]:
    """Run one command and return {file name: contents}."""
    started = time.perf_counter()
    files: dict[str, str] = {}
    scenario = load_scenario(args.scenario) if args.scenario else None
    if scenario is not None:
        for path in scenario.defaults_applied:
            log.info("default applied: %s", path)

    if args.command == "validate":
        checks = run_checks()
        files["validate.csv"] = csv_text(VALIDATE_COLUMNS, [c.row() for c in checks])
        summary = {"checks": len(checks), "passed": sum(c.passed for c in checks)}
        files["run_meta.json"] = json.dumps(_meta("validate", scenario, summary, {}, started, []),
                                            indent=2, sort_keys=True) + "\n"
        return files

    if scenario is None:
        raise _UsageError(f"'{args.command}' requires --scenario")

    if args.command == "sweep":
        if not args.sweep:
            raise _UsageError("'sweep' requires --sweep")
        spec = load_sweep(args.sweep)
        base_dir = Path(args.scenario).parent
        columns = [a.path for a in spec.axes] + SUMMARY_COLUMNS[spec.command]
        rows = []
        for point in spec.points():
            sc = with_values(scenario, dict(zip((a.path for a in spec.axes), point)), base_dir)
            summary = summarize(spec.command, sc, args.slot_seconds)
            rows.append(list(point) + [summary[k] for k in SUMMARY_COLUMNS[spec.command]])
        files["sweep.csv"] = csv_text(columns, rows)
        extra = {"sweep_command": spec.command, "points": len(rows)}
        files["run_meta.json"] = json.dumps(
            _meta("sweep", scenario, {"points": len(rows)}, extra, started, _warnings(scenario)),
            indent=2, sort_keys=True) + "\n"
        return files

    runner = RUNNERS[args.command]
    kwargs = {"slot_seconds": args.slot_seconds} if args.command in ("keyrate", "optimize") else {}
    result = runner(scenario, **kwargs)
    files[f"{args.command}.csv"] = csv_text(COLUMNS[args.command], result.rows)
    files["run_meta.json"] = json.dumps(
        _meta(args.command, scenario, result.summary, result.extra, started, _warnings(scenario)),
        indent=2, sort_keys=True) + "\n"
    return files


class _UsageError(Exception):
    pass


def _write(out_dir: Path, files: dict[str, str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name, text in files.items():
            path = out_dir / name
            with open(path, "w", encoding="utf-8", newline="") as fh:
                written.append(path)
                fh.write(text)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        files = execute(args)
        _write(Path(args.out), files)
    except _UsageError as exc:
        print(f"satmdi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DomainError) as exc:
        print(f"satmdi: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"satmdi: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SatMDIError as exc:
        print(f"satmdi: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"satmdi: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
