"""Command-line front end: ``xxzqfi <command> [options]``.

Every command writes one table (CSV by default, JSON on request) preceded by
a metadata block.  Output is byte-identical for identical configurations
when ``--no-timestamp`` is given.

Option precedence: command-line flags, then ``--config`` (flat
``key = value`` file), then built-in defaults.  ``XXZQFI_OUTPUT_DIR`` sets the
directory used when ``--out`` is omitted; without it the table goes to stdout.

Exit codes: 0 success, 2 validation failure, 3 domain/config error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import math
import os
import sys

from . import __version__
from .ed import Boundary, ed_ground_qfi, verify_block_ground_space
from .errors import XXZQFIError
from .qfi import DEFAULT_H, Observable
from .rgflow import CouplingConstants, flow, ground_amplitude, predicted_beta
from .scaling import (
    DEFAULT_H_CURVE,
    Law,
    build_curve,
    differentiate,
    find_pseudo_critical,
    fit_beta,
    make_grid,
)
from .validation import discrepancy_table, run_checks

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

OUTPUT_DIR_ENV = "XXZQFI_OUTPUT_DIR"
COMMANDS = ("flow", "curve", "deriv", "entropy", "scaling", "ed-check", "validate")

DEFAULTS = {
    "observable": "qfi_full_closed",
    "nr": None,
    "nr_min": 1,
    "nr_max": 4,
    "grid_min": 0.0,
    "grid_max": 2.5,
    "grid_step": 0.005,
    "log_base": "2",
    "format": "csv",
    "out": None,
    "h_state": DEFAULT_H,
    "h_curve": DEFAULT_H_CURVE,
    "no_timestamp": False,
    "sites": 8,
    "boundary": "periodic",
    "tol_scale": 1.0,
}

# Per-command overrides of the built-in defaults.
COMMAND_DEFAULTS = {
    "flow": {"grid_step": 0.1},
    "scaling": {"nr_max": 6},
    "entropy": {"observable": "entropy_site1"},
    "ed-check": {"grid_min": 0.5, "grid_max": 1.5, "grid_step": 0.05},
}

_CASTS = {
    "nr": int,
    "nr_min": int,
    "nr_max": int,
    "sites": int,
    "grid_min": float,
    "grid_max": float,
    "grid_step": float,
    "h_state": float,
    "h_curve": float,
    "tol_scale": float,
    "no_timestamp": lambda v: v if isinstance(v, bool) else str(v).lower() in ("1", "true", "yes"),
}

FULL_STATE_NOTE = (
    "published closed form for the block state differs from the first-principles "
    "pure-state QFI by the factor (2+q^2)/(2(1+q^2)) (1/12 vs 1/8 at Delta=0); "
    "both curves are available as qfi_full_closed and qfi_full_engine"
)


class ConfigError(XXZQFIError, ValueError):
    pass


class CliIOError(XXZQFIError, OSError):
    pass


class PartialOutput(XXZQFIError):
    """Raised with the rows computed before an analysis failure."""

    def __init__(self, metadata, columns, rows, cause):
        super().__init__(str(cause))
        self.table = (metadata, columns, rows)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".12g")
    return str(value)


def _json_value(value):
    if isinstance(value, float):
        if math.isfinite(value):
            return float(format(value, ".12g"))
        return _fmt(value)
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return value


def render(metadata, columns, rows, fmt):
    """Serialize one table to text."""
    if fmt == "json":
        doc = {
            "metadata": _json_value(metadata),
            "columns": list(columns),
            "rows": [dict(zip(columns, map(_json_value, row))) for row in rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key in sorted(metadata):
        buf.write(f"# {key}: {json.dumps(_json_value(metadata[key]), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_output(text, config, command):
    path = config["out"]
    if path is None and os.environ.get(OUTPUT_DIR_ENV):
        path = os.path.join(os.environ[OUTPUT_DIR_ENV], f"{command}.{config['format']}")
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_config_file(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliIOError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def resolve_config(command, flags):
    """Merge defaults < config file < flags and validate the result."""
    config = dict(DEFAULTS)
    config.update(COMMAND_DEFAULTS.get(command, {}))
    if flags.get("config"):
        config.update(read_config_file(flags["config"]))
    config.update({k: v for k, v in flags.items() if k in DEFAULTS and v is not None})
    try:
        for key, cast in _CASTS.items():
            if config[key] is not None:
                config[key] = cast(config[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration value: {exc}") from None
    if config["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {config['format']!r}")
    if str(config["log_base"]) not in ("2", "e"):
        raise ConfigError(f"log base must be 2 or e, got {config['log_base']!r}")
    try:
        Observable(config["observable"])
        Boundary(config["boundary"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not (config["grid_step"] > 0 and config["grid_max"] > config["grid_min"] >= 0):
        raise ConfigError("grid needs 0 <= grid_min < grid_max and grid_step > 0")
    for key in ("nr", "nr_min", "nr_max"):
        if config[key] is not None and config[key] < 0:
            raise ConfigError(f"{key} must be non-negative")
    if not (config["h_state"] > 0 and config["h_curve"] > 0):
        raise ConfigError("step sizes must be positive")
    config["command"] = command
    return config


def _metadata(config, **extra):
    meta = {
        "tool": "xxzqfi",
        "version": __version__,
        "config": {k: config[k] for k in sorted(config)},
    }
    if not config["no_timestamp"]:
        meta["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    meta.update(extra)
    return meta


def _grid(config):
    return make_grid(config["grid_min"], config["grid_max"], config["grid_step"])


def _nr_values(config, lowest=0):
    if config["nr"] is not None:
        return [config["nr"]]
    return list(range(lowest, config["nr_max"] + 1))


def _log_base(config):
    return math.e if config["log_base"] == "e" else 2


def cmd_flow(config):
    """Rows ``(bare_delta, n_r, delta, ln_delta_prime, j)``."""
    rows = []
    n_max = config["nr"] if config["nr"] is not None else config["nr_max"]
    for bare in _grid(config):
        trace = flow(CouplingConstants(1.0, float(bare)), n_max)
        for n, c in enumerate(trace.steps):
            ln_d = math.log(c.delta) if c.delta > 0 else -math.inf
            rows.append((float(bare), n, c.delta, ln_d, c.j))
    meta = _metadata(config, description="RG flow of the anisotropy; ln_delta_prime = ln(Delta after n_r steps)")
    return meta, ("bare_delta", "n_r", "delta", "ln_delta_prime", "j"), rows


def _curve_rows(config, observable, derivative):
    grid = _grid(config)
    rows = []
    for n in _nr_values(config):
        curve = build_curve(observable, n, grid, config["h_state"], _log_base(config))
        if derivative:
            curve = differentiate(curve)
        rows.extend((n, float(d), float(v)) for d, v in zip(curve.grid, curve.values))
    extra = {
        "observable": observable.value,
        "provenance": observable.provenance,
        "n_r": _nr_values(config),
        "quantity": f"d {observable.value} / d Delta" if derivative else observable.value,
    }
    if observable.full_state:
        extra["full_state_discrepancy"] = FULL_STATE_NOTE
    if observable is Observable.ENTROPY_SITE1:
        extra["log_base"] = config["log_base"]
    return _metadata(config, **extra), ("n_r", "delta", "value"), rows


def cmd_curve(config):
    return _curve_rows(config, Observable(config["observable"]), derivative=False)


def cmd_deriv(config):
    return _curve_rows(config, Observable(config["observable"]), derivative=True)


def cmd_entropy(config):
    return _curve_rows(config, Observable.ENTROPY_SITE1, derivative=False)


COLUMNS_SCALING = ("n_r", "N", "delta_m", "min_deriv")


def cmd_scaling(config):
    """Rows ``(n_r, N, delta_m, min_deriv)``; fit results go to the metadata."""
    if config["nr_max"] < 3:
        raise ConfigError("scaling needs nr_max >= 3")
    observable = Observable(config["observable"])
    grid = _grid(config)
    rows, pcs = [], []
    meta_extra = {"observable": observable.value, "provenance": observable.provenance}
    if observable.full_state:
        meta_extra["full_state_discrepancy"] = FULL_STATE_NOTE
    try:
        for n in range(config["nr_min"], config["nr_max"] + 1):
            pc = find_pseudo_critical(observable, n, grid, config["h_state"], config["h_curve"],
                                      _log_base(config))
            pcs.append(pc)
            rows.append((n, pc.effective_sites, pc.delta_m, pc.min_derivative))
        deriv = fit_beta([(p.effective_sites, abs(p.min_derivative)) for p in pcs], Law.DERIVATIVE_GROWTH)
        shift = fit_beta([(p.effective_sites, p.delta_m - 1.0) for p in pcs], Law.DELTA_SHIFT)
    except XXZQFIError as exc:
        meta_extra["error"] = str(exc)
        raise PartialOutput(_metadata(config, **meta_extra), COLUMNS_SCALING, rows, exc) from exc
    meta_extra["fit"] = {
        "n_r_range": [config["nr_min"], config["nr_max"]],
        "beta_derivative": deriv.beta,
        "beta_shift": shift.beta,
        "r2_derivative": deriv.r_squared,
        "r2_shift": shift.r_squared,
        "analytic_beta": predicted_beta(),
    }
    return _metadata(config, **meta_extra), COLUMNS_SCALING, rows


def cmd_ed_check(config):
    """Block ground-space verification and exact-chain QFI over the grid."""
    rows = []
    for d in _grid(config):
        d = float(d)
        gs = verify_block_ground_space(d)
        qfi = ed_ground_qfi(config["sites"], d, boundary=config["boundary"])
        rows.append((d, qfi, gs.energy, ground_amplitude(d) / 2, gs.degeneracy, gs.projector_distance))
    meta = _metadata(config, sites=config["sites"], boundary=config["boundary"])
    cols = ("delta", "ed_qfi", "block_energy", "block_expected_energy", "block_degeneracy",
            "projector_distance")
    return meta, cols, rows


def cmd_validate(config):
    results = run_checks(config["tol_scale"])
    table = [
        {"delta": d, "closed_form": c, "engine": e, "ratio": r, "predicted_ratio": p}
        for d, c, e, r, p in discrepancy_table()
    ]
    meta = _metadata(
        config,
        passed=all(r.passed for r in results),
        full_state_discrepancy=FULL_STATE_NOTE,
        discrepancy_table=table,
    )
    rows = [(r.name, r.measured, r.tolerance, "pass" if r.passed else "FAIL") for r in results]
    return meta, ("check", "measured", "tolerance", "status"), rows


HANDLERS = {
    "flow": cmd_flow,
    "curve": cmd_curve,
    "deriv": cmd_deriv,
    "entropy": cmd_entropy,
    "scaling": cmd_scaling,
    "ed-check": cmd_ed_check,
    "validate": cmd_validate,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xxzqfi",
        description="Renormalized quantum Fisher information of the spin-1/2 XXZ chain.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat key = value file with option defaults")
    parser.add_argument("--observable", choices=[o.value for o in Observable])
    parser.add_argument("--nr", type=int, help="single renormalization step count")
    parser.add_argument("--nr-min", type=int, help="first n_r used by scaling (default 1)")
    parser.add_argument("--nr-max", type=int, help="last n_r (default 4; 6 for scaling)")
    parser.add_argument("--grid-min", type=float)
    parser.add_argument("--grid-max", type=float)
    parser.add_argument("--grid-step", type=float)
    parser.add_argument("--log-base", choices=["2", "e"])
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--out", help="output file ('-' for stdout)")
    parser.add_argument("--h-state", type=float, help="finite-difference step for d(rho)/dDelta")
    parser.add_argument("--h-curve", type=float, help="finite-difference step for curve slopes")
    parser.add_argument("--no-timestamp", action="store_true", default=None)
    parser.add_argument("--sites", type=int, help="chain length for ed-check (even, <= 12)")
    parser.add_argument("--boundary", choices=[b.value for b in Boundary])
    parser.add_argument("--tol-scale", type=float, help="validate: multiply every tolerance")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        config = resolve_config(args.command, flags)
        try:
            meta, columns, rows = HANDLERS[args.command](config)
            status = EXIT_OK
        except PartialOutput as partial:
            meta, columns, rows = partial.table
            status = EXIT_DOMAIN
            print(f"xxzqfi: analysis error: {partial}", file=sys.stderr)
        write_output(render(meta, columns, rows, config["format"]), config, args.command)
    except CliIOError as exc:
        print(f"xxzqfi: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except XXZQFIError as exc:
        print(f"xxzqfi: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.command == "validate" and not meta["passed"]:
        return EXIT_VALIDATION
    return status


if __name__ == "__main__":
    sys.exit(main())
