"""Command-line front end: ``delta-spectra <command> [options]``.

Settings resolve as built-in defaults < JSON config file < flags.  The config
file comes from ``--config`` or ``$DELTA_SPECTRA_CONFIG``; top-level keys apply
to every command that knows them, a section named after the command applies
to that command only.  Every output starts with the resolved settings, so a
file can be regenerated from its own header.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 no bound state,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import warnings
from dataclasses import dataclass
from importlib import resources

from . import __version__
from .asymptotics import SIGMA_MAX, beta, beta_limit0
from .kernels import CouplingTriple, DomainError, bottom_essential
from .oracle import BoxDiscretization, BoxTooSmallWarning, oracle_ground_state
from .pencil import EigensolverError
from .solver import (
    DEFAULT_MARGIN,
    GridSpec,
    SolverError,
    critical_charge,
    ground_state_energy,
    sweep_energy,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_NO_STATE = 3
EXIT_NUMERICAL = 4

CONFIG_ENV = "DELTA_SPECTRA_CONFIG"

log = logging.getLogger("delta_spectra")


class UsageError(ValueError):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    raise UsageError(f"expected true/false, got {value!r}")


@dataclass(frozen=True)
class Option:
    name: str
    kind: object
    default: object
    help: str
    flag: bool = False  # store_true switch


_COMMON = [
    Option("output", str, None, "write to this file instead of stdout"),
    Option("format", str, "csv", "csv or json"),
]
_GRID = [
    Option("grid_n", int, 400, "quadrature nodes per channel"),
    Option("grid_scale", float, 0.1, "tangent-map stretch relative to the threshold momentum"),
    Option("margin", float, DEFAULT_MARGIN, "relative standoff from the continuum threshold"),
]

OPTIONS: dict[str, list[Option]] = {
    "energy": [
        Option("kappa", float, None, "impurity charge (required)"),
        Option("kappa_tilde", float, None, "second impurity coupling (default: kappa)"),
        Option("sigma", float, 0.0, "mass fraction"),
        *_GRID,
        Option("tol", float, 1e-10, "energy tolerance"),
        *_COMMON,
    ],
    "sweep": [
        Option("kappa_min", float, None, "first charge"),
        Option("kappa_max", float, None, "last charge (inclusive)"),
        Option("kappa_step", float, None, "charge increment"),
        Option("kappa_list", _float_list, None, "explicit comma-separated charges"),
        Option("sigma", float, 0.0, "mass fraction"),
        *_GRID,
        Option("tol", float, 1e-10, "energy tolerance"),
        Option("with_asymptote", _bool, False, "fill the asymptote column", flag=True),
        Option("workers", int, 1, "worker processes"),
        *_COMMON,
    ],
    "critical-charge": [
        Option("sigma", float, 0.0, "mass fraction"),
        Option("sigma_list", _float_list, None, "comma-separated mass fractions"),
        Option("tol", float, 1e-3, "width of the final charge bracket"),
        Option("grid_n", int, 800, "quadrature nodes per channel"),
        Option("grid_scale", float, 0.1, "tangent-map stretch relative to the threshold momentum"),
        Option("margin", float, DEFAULT_MARGIN, "relative standoff from the continuum threshold"),
        *_COMMON,
    ],
    "beta": [
        Option("sigma_min", float, 0.05, "first mass fraction"),
        Option("sigma_max", float, 0.65, "last mass fraction (inclusive)"),
        Option("sigma_step", float, 0.05, "mass-fraction increment"),
        *_COMMON,
    ],
    "validate": [
        Option("fast", _bool, False, "reduced grids", flag=True),
        Option("output", str, None, "also write the JSON report to this file"),
        Option("format", str, "table", "table or json (stdout)"),
    ],
    "oracle": [
        Option("kappa", float, 0.5, "impurity charge"),
        Option("kappa_tilde", float, None, "second impurity coupling (default: kappa)"),
        Option("couplings", _float_list, None, "explicit a,b,c contact strengths (zeros allowed)"),
        Option("sigma", float, 0.0, "mass fraction"),
        Option("spacing", float, 0.1, "finite-difference spacing h"),
        Option("box_half_width", float, 20.0, "half width of the Dirichlet box"),
        Option("compare", _bool, False, "also run the pencil solver", flag=True),
        *_COMMON,
    ],
}

FORMATS = {"validate": ("table", "json")}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="delta-spectra", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for command, options in OPTIONS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        for opt in options:
            flag = "--" + opt.name.replace("_", "-")
            if opt.flag:
                p.add_argument(flag, action="store_true", default=argparse.SUPPRESS, help=opt.help)
            else:
                p.add_argument(flag, type=opt.kind, default=argparse.SUPPRESS, help=opt.help)
    return parser


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data


def resolve_config(command: str, flags: dict, config_path: str | None = None) -> dict:
    """Merge defaults, config file and flags for one command."""
    options = {o.name: o for o in OPTIONS[command]}
    data = _load_config(config_path)
    resolved = {name: o.default for name, o in options.items()}
    section = data.get(command, {})
    if not isinstance(section, dict):
        raise UsageError(f"config section {command!r} must be an object")
    unknown = set(section) - set(options)
    if unknown:
        raise UsageError(f"unknown keys in config section {command!r}: {sorted(unknown)}")
    layered = {k: v for k, v in data.items() if k in options}
    layered.update(section)
    for name, value in layered.items():
        kind = options[name].kind
        try:
            if value is None:
                resolved[name] = None
            elif kind is _float_list and isinstance(value, list):
                resolved[name] = [float(x) for x in value]
            else:
                resolved[name] = kind(value)
        except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"bad config value for {name}: {value!r}") from exc
    resolved.update({k: v for k, v in flags.items() if k in options})
    fmt = resolved.get("format")
    allowed = FORMATS.get(command, ("csv", "json"))
    if fmt not in allowed:
        raise UsageError(f"--format must be one of {allowed}")
    return resolved


# ---------------------------------------------------------------- formatting

def _num(x):
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    if isinstance(x, int):
        return x
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}" if math.isfinite(x) else "nan"
    return str(x)


def _header(command: str, config: dict) -> list[str]:
    return [
        f"# delta-spectra {__version__}",
        f"# command: {command}",
        "# config: " + json.dumps(config, sort_keys=True),
    ]


def render_csv(command: str, config: dict, columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write("\n".join(_header(command, config)) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(command: str, config: dict, result) -> str:
    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [clean(v) for v in obj]
        if isinstance(obj, (float, int)) and not isinstance(obj, bool):
            return _num(obj)
        return obj

    doc = {"version": __version__, "command": command, "config": config, "result": clean(result)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_schema(command: str) -> dict:
    name = f"{command}.schema.json"
    return json.loads(resources.files("delta_spectra").joinpath("schemas", name).read_text())


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write(command, config, columns, rows, result=None):
    if config["format"] == "json":
        text = render_json(command, config, rows if result is None else result)
    else:
        text = render_csv(command, config, columns, rows)
    _emit(text, config.get("output"))


# ---------------------------------------------------------------- commands

def _check_sigma(sigma: float, upper: float = 1.0) -> None:
    if not 0.0 <= sigma < upper:
        raise UsageError(f"sigma must lie in [0, {upper:.6g}), got {sigma}")


def _check_grid(config: dict) -> GridSpec:
    if config["grid_n"] < 16 or config["grid_n"] % 2:
        raise UsageError("--grid-n must be an even integer >= 16")
    if config["grid_scale"] <= 0:
        raise UsageError("--grid-scale must be positive")
    if not 0 < config["margin"] < 1:
        raise UsageError("--margin must lie in (0, 1)")
    return GridSpec(n=config["grid_n"], rel_scale=config["grid_scale"])


def _inclusive_range(lo: float, hi: float, step: float, what: str) -> list[float]:
    if step is None or lo is None or hi is None:
        raise UsageError(f"give --{what}-min, --{what}-max and --{what}-step")
    if not step > 0:
        raise UsageError(f"--{what}-step must be positive")
    if hi < lo:
        raise UsageError(f"empty range: --{what}-max < --{what}-min")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [float(f"{lo + i * step:.12g}") for i in range(count)]


ENERGY_COLUMNS = ["kappa", "kappa_tilde", "sigma", "energy", "bottom_essential", "residual",
                  "n", "scale", "refined", "converged", "status"]


def cmd_energy(config: dict) -> int:
    kappa = config["kappa"]
    if kappa is None:
        raise UsageError("--kappa is required")
    kappa_tilde = kappa if config["kappa_tilde"] is None else config["kappa_tilde"]
    if kappa <= 0 or kappa_tilde <= 0:
        raise UsageError("charges must be positive")
    _check_sigma(config["sigma"])
    if not config["tol"] > 0:
        raise UsageError("--tol must be positive")
    spec = _check_grid(config)
    couplings = CouplingTriple.impurity(kappa, kappa_tilde)
    res = ground_state_energy(couplings, config["sigma"], spec, config["tol"],
                              margin=config["margin"])
    row = {"kappa": kappa, "kappa_tilde": kappa_tilde, "sigma": config["sigma"],
           "bottom_essential": bottom_essential(min(kappa, kappa_tilde), config["sigma"]),
           "energy": None, "residual": None, "n": None, "scale": None,
           "refined": None, "converged": None, "status": "none"}
    if res is not None:
        row.update(energy=res.energy, residual=res.residual, n=res.n, scale=res.scale,
                   refined=res.refined, converged=res.converged,
                   status="ok" if res.converged else "unconverged")
    _write("energy", config, ENERGY_COLUMNS, [row], row)
    if res is None:
        return EXIT_NO_STATE
    return EXIT_OK if res.converged else EXIT_NUMERICAL


SWEEP_COLUMNS = ["kappa", "energy", "bottom_essential", "asymptote", "residual", "status"]


def cmd_sweep(config: dict) -> int:
    if config["kappa_list"] is not None:
        kappas = list(config["kappa_list"])
        if not kappas:
            raise UsageError("empty --kappa-list")
    else:
        kappas = _inclusive_range(config["kappa_min"], config["kappa_max"], config["kappa_step"],
                                  "kappa")
    if any(k <= 0 for k in kappas) or any(b <= a for a, b in zip(kappas, kappas[1:])):
        raise UsageError("charges must be positive and strictly increasing")
    _check_sigma(config["sigma"])
    if config["workers"] < 1:
        raise UsageError("--workers must be at least 1")
    spec = _check_grid(config)
    table = sweep_energy(kappas, config["sigma"], spec, config["tol"],
                         with_asymptote=config["with_asymptote"], margin=config["margin"],
                         workers=config["workers"])
    rows = [{c: getattr(r, c) for c in SWEEP_COLUMNS} for r in table.records]
    _write("sweep", config, SWEEP_COLUMNS, rows)
    failed = sum(r.status.startswith("error") for r in table.records)
    return EXIT_NUMERICAL if failed == len(rows) else EXIT_OK


CRITICAL_COLUMNS = ["sigma", "kappa_c", "bracket_lo", "bracket_hi", "margin"]


def cmd_critical_charge(config: dict) -> int:
    sigmas = config["sigma_list"] if config["sigma_list"] is not None else [config["sigma"]]
    if not sigmas:
        raise UsageError("empty --sigma-list")
    for s in sigmas:
        _check_sigma(s, SIGMA_MAX)
    if not config["tol"] > 0:
        raise UsageError("--tol must be positive")
    spec = _check_grid(config)
    rows = []
    for s in sigmas:
        res = critical_charge(s, config["tol"], spec, config["margin"])
        rows.append({"sigma": s, "kappa_c": res.kappa_c, "bracket_lo": res.bracket[0],
                     "bracket_hi": res.bracket[1], "margin": res.margin})
    _write("critical-charge", config, CRITICAL_COLUMNS, rows)
    return EXIT_OK


def cmd_beta(config: dict) -> int:
    lo, hi = config["sigma_min"], config["sigma_max"]
    sigmas = _inclusive_range(lo, hi, config["sigma_step"], "sigma")
    if not (0 < lo and hi < SIGMA_MAX):
        raise UsageError(f"mass fractions must lie in (0, {SIGMA_MAX:.6g})")
    rows = [{"sigma": 0.0, "beta": beta_limit0()}]
    rows += [{"sigma": s, "beta": beta(s)} for s in sigmas]
    _write("beta", config, ["sigma", "beta"], rows)
    return EXIT_OK


def format_table(results) -> str:
    lines = [f"{'check':<22} {'status':<6} {'value':>12} {'limit':>10} {'seconds':>8}  detail"]
    for r in results:
        lines.append(f"{r.name:<22} {'PASS' if r.passed else 'FAIL':<6} {r.value:>12.4g} "
                     f"{r.limit:>10.3g} {r.seconds:>8.2f}  {r.detail}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"


def cmd_validate(config: dict) -> int:
    from .validation import run_checks

    results = run_checks(fast=config["fast"])
    report = {"passed": all(r.passed for r in results),
              "checks": [r.as_dict() for r in results]}
    text = render_json("validate", config, report)
    if config["format"] == "json":
        sys.stdout.write(text)
    else:
        sys.stdout.write(format_table(results))
    if config["output"]:
        _emit(text, config["output"])
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


ORACLE_COLUMNS = ["a", "b", "c", "sigma", "spacing", "box_half_width", "energy",
                  "pencil_energy", "box_warning"]


def cmd_oracle(config: dict) -> int:
    _check_sigma(config["sigma"])
    if config["couplings"] is not None:
        if len(config["couplings"]) != 3:
            raise UsageError("--couplings needs exactly three values a,b,c")
        a, b, c = config["couplings"]
    else:
        kappa = config["kappa"]
        kappa_tilde = kappa if config["kappa_tilde"] is None else config["kappa_tilde"]
        if kappa <= 0 or kappa_tilde <= 0:
            raise UsageError("charges must be positive")
        a, b, c = -kappa, kappa_tilde, -1.0
    try:
        box = BoxDiscretization(config["box_half_width"], config["spacing"], (a, b, c),
                                config["sigma"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BoxTooSmallWarning)
        energy = oracle_ground_state(box=box)
    box_warning = any(issubclass(w.category, BoxTooSmallWarning) for w in caught)
    pencil = None
    if config["compare"]:
        if 0.0 in (a, b, c):
            raise UsageError("--compare needs three nonzero couplings")
        res = ground_state_energy(CouplingTriple(a, b, c), config["sigma"])
        pencil = None if res is None else res.energy
    row = {"a": a, "b": b, "c": c, "sigma": config["sigma"], "spacing": config["spacing"],
           "box_half_width": config["box_half_width"], "energy": energy,
           "pencil_energy": pencil, "box_warning": box_warning}
    _write("oracle", config, ORACLE_COLUMNS, [row], row)
    return EXIT_OK


COMMANDS = {
    "energy": cmd_energy,
    "sweep": cmd_sweep,
    "critical-charge": cmd_critical_charge,
    "beta": cmd_beta,
    "validate": cmd_validate,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config", "verbose")}
    try:
        config = resolve_config(ns.command, flags, ns.config)
        return COMMANDS[ns.command](config)
    except UsageError as exc:
        print(f"delta-spectra {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, EigensolverError, DomainError, ArithmeticError) as exc:
        print(f"delta-spectra {ns.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
