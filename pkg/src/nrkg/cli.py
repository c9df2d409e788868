"""Command-line front end.

Subcommands:

  simulate   run one case and dump everything: oscillatory-field snapshots,
             envelope profiles, a two-column energy table, and the record CSV
  sweep      run an eps matrix from a config file and persist records.csv
             plus a text summary
  fit        re-fit a stored records.csv and print the rate line
  report     re-fit a stored records.csv and emit an SVG plot plus summary

Configuration is a single JSON file; every field has a default (see
DEFAULT_CONFIG) and unknown keys are rejected.  Exit codes: 0 on success,
2 for configuration problems (bad config keys, bad values, unusable fit
input), 3 for a numerical-validity failure such as a conservation breach.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .data import DataSpec
from .errors import ConfigurationError, FitError, NumericalValidityError
from .klein_gordon import KGOptions, kg_solve
from .profiles import save_trajectory, solve_profiles
from .reporting import (
    read_records_csv,
    summarize,
    write_loglog_svg,
    write_records_csv,
    write_summary,
)
from .spectral import Grid, make_grid, write_field
from .sweep import (
    ABSCISSA_KINDS,
    RESPONSE_FIELDS,
    SolverOptions,
    fit_order,
    run_case,
    run_sweep,
)

DEFAULT_CONFIG: dict = {
    "grid": {"dim": 1, "points_per_axis": 256, "half_width": 16.0},
    "data": {
        "family": "gaussian",
        "a0": 2.0,
        "alpha": None,
        "delta0": 0.5,
        "u1_mode": "zero",
        "path": None,
    },
    "eps": [0.25, 0.125, 0.0625, 0.03125],
    "times": [0.25, 0.5, 1.0, 2.0],
    "solver": {
        "dt_kg": None,
        "dt_v": None,
        "dt_w": None,
        "formulation": "physical",
        "composition": "fourth_order",
        "energy_tol": 1e-6,
    },
    "workers": 1,
    "output_dir": "nrkg-out",
}


def _merge_section(defaults: dict, override: object, where: str) -> dict:
    if not isinstance(override, dict):
        raise ConfigurationError(f"config section {where!r} must be an object")
    unknown = set(override) - set(defaults)
    if unknown:
        raise ConfigurationError(
            f"unknown config key(s) in {where!r}: {sorted(unknown)}"
        )
    merged = dict(defaults)
    merged.update(override)
    return merged


def load_config(path: str | Path | None) -> dict:
    """Read a JSON config, fill defaults, and reject unknown keys."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    if path is None:
        return config
    src = Path(path)
    try:
        raw = json.loads(src.read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {src}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {src} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {src} must be a JSON object")
    unknown = set(raw) - set(DEFAULT_CONFIG)
    if unknown:
        raise ConfigurationError(f"unknown config key(s): {sorted(unknown)}")
    for section in ("grid", "data", "solver"):
        if section in raw:
            config[section] = _merge_section(config[section], raw[section], section)
    for key in ("eps", "times", "workers", "output_dir"):
        if key in raw:
            config[key] = raw[key]
    return config


def _grid_from(config: dict) -> Grid:
    section = config["grid"]
    return make_grid(
        int(section["dim"]),
        int(section["points_per_axis"]),
        float(section["half_width"]),
    )


def _data_from(config: dict) -> DataSpec:
    section = config["data"]
    return DataSpec(
        family=section["family"],
        a0=float(section["a0"]),
        alpha=None if section["alpha"] is None else float(section["alpha"]),
        delta0=float(section["delta0"]),
        u1_mode=section["u1_mode"],
        path=section["path"],
    )


def _solver_from(config: dict) -> SolverOptions:
    section = config["solver"]

    def opt(name: str) -> float | None:
        return None if section[name] is None else float(section[name])

    return SolverOptions(
        dt_kg=opt("dt_kg"),
        dt_v=opt("dt_v"),
        dt_w=opt("dt_w"),
        formulation=section["formulation"],
        composition=section["composition"],
        energy_tol=float(section["energy_tol"]),
    )


def _float_list(value: object, name: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigurationError(f"config {name!r} must be a nonempty list")
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"config {name!r} must hold numbers: {exc}") from exc


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    grid = _grid_from(config)
    spec = _data_from(config)
    solver = _solver_from(config)
    times = _float_list(config["times"], "times")
    eps_list = _float_list(config["eps"], "eps")
    eps = float(args.eps) if args.eps is not None else eps_list[0]
    out = Path(args.output or config["output_dir"]) / f"simulate-eps{eps:g}"
    out.mkdir(parents=True, exist_ok=True)

    from .data import initial_data  # deferred: keeps CLI import light

    u0, u1, v0 = initial_data(grid, spec)
    # the single-case path arms the drift guard: a breach is a hard failure
    kg = kg_solve(
        u0,
        u1,
        eps,
        times,
        KGOptions(
            dt=solver.dt_kg,
            formulation=solver.formulation,
            composition=solver.composition,
            energy_tol=solver.energy_tol,
        ),
    )
    profiles = solve_profiles(v0, times, dt_v=solver.dt_v, dt_w=solver.dt_w)
    for i, t in enumerate(kg.sample_times):
        write_field(kg.states[i].u, out / f"u_{i:04d}", time=float(t), eps=eps)
        write_field(kg.states[i].ut, out / f"ut_{i:04d}", time=float(t), eps=eps)
    save_trajectory(profiles, out / "profiles", eps=eps)
    energy_lines = [
        f"{float(t)!r} {float(e)!r}" for t, e in zip(kg.sample_times, kg.energies)
    ]
    (out / "energies.txt").write_text("\n".join(energy_lines) + "\n")
    records = run_case(spec, eps, times, grid, solver)
    write_records_csv(records, out / "records.csv")
    print(f"simulate: {len(records)} records, artifacts in {out}")
    print(summarize(records), end="")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    grid = _grid_from(config)
    spec = _data_from(config)
    solver = _solver_from(config)
    times = _float_list(config["times"], "times")
    eps_values = _float_list(config["eps"], "eps")
    workers = int(args.workers or config["workers"])
    out = Path(args.output or config["output_dir"])
    out.mkdir(parents=True, exist_ok=True)

    records = run_sweep(
        spec,
        eps_values,
        times,
        grid,
        solver,
        workers=workers,
        progress=lambda line: print(line, file=sys.stderr),
    )
    csv_path = write_records_csv(records, out / "records.csv")
    write_summary(records, (), out / "summary.txt")
    print(f"sweep: {len(records)} records -> {csv_path}")
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    records = read_records_csv(args.csv)
    fit = fit_order(records, args.abscissa, args.response)
    print(fit.describe())
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    records = read_records_csv(args.csv)
    out = Path(args.output or Path(args.csv).parent)
    out.mkdir(parents=True, exist_ok=True)
    fits = []
    try:
        fits.append(fit_order(records, args.abscissa, args.response))
    except FitError as exc:
        print(f"report: skipping fit ({exc})", file=sys.stderr)
    svg = write_loglog_svg(
        records, fits, out / "report.svg", args.abscissa, args.response
    )
    summary = write_summary(records, fits, out / "summary.txt")
    print(f"report: wrote {svg} and {summary}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nrkg",
        description="Oscillatory Klein-Gordon expansion experiments",
    )
    parser.add_argument("--version", action="version", version=f"nrkg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one case with full dumps")
    sim.add_argument("-c", "--config", help="JSON config file (defaults apply)")
    sim.add_argument("--eps", type=float, help="override eps (default: first of config list)")
    sim.add_argument("-o", "--output", help="output directory")
    sim.set_defaults(func=_cmd_simulate)

    swp = sub.add_parser("sweep", help="run the configured eps matrix")
    swp.add_argument("-c", "--config", help="JSON config file (defaults apply)")
    swp.add_argument("-o", "--output", help="output directory")
    swp.add_argument("--workers", type=int, help="process-pool size (1 = serial)")
    swp.set_defaults(func=_cmd_sweep)

    fit = sub.add_parser("fit", help="fit a rate from a stored records.csv")
    fit.add_argument("csv", help="records.csv produced by sweep/simulate")
    fit.add_argument("--abscissa", choices=ABSCISSA_KINDS, default="eps")
    fit.add_argument("--response", choices=RESPONSE_FIELDS, default="second_order_error_l2")
    fit.set_defaults(func=_cmd_fit)

    rep = sub.add_parser("report", help="emit SVG plot and summary from a CSV")
    rep.add_argument("csv", help="records.csv produced by sweep/simulate")
    rep.add_argument("--abscissa", choices=ABSCISSA_KINDS, default="eps")
    rep.add_argument("--response", choices=RESPONSE_FIELDS, default="second_order_error_l2")
    rep.add_argument("-o", "--output", help="output directory (default: CSV's directory)")
    rep.set_defaults(func=_cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, FitError) as exc:
        print(f"nrkg: configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalValidityError as exc:
        print(f"nrkg: numerical validity failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
