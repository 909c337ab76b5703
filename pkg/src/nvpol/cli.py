"""``nvpol`` command line: surfaces, bounds, polarization sweeps, validation.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 I/O error,
4 no admissible grid point.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig
from .dynamics import delta_surface, write_surface_csv
from .environment import audit_rows, generate_environment, save_environment
from .errors import AllPointsExcluded, ConfigError, NonPositiveOmega
from .estimator import Method, bound_vs_polarization, estimate, per_tau_curve
from .validation import run_validation

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_IO, EXIT_EMPTY = 0, 1, 2, 3, 4


def _header(config: RunConfig) -> list[str]:
    return [f"nvpol {__version__}", f"config {config.dumps()}"]


def read_header_config(path: str | Path) -> RunConfig:
    """Recover the RunConfig recorded in an output file's ``#`` header."""
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            if line.startswith("# config "):
                return RunConfig.from_dict(json.loads(line[len("# config "):]))
    raise ConfigError(f"{path} has no config header")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def cmd_surface(config: RunConfig, out: Path) -> int:
    env = config.build_environment()
    tau, t = config.grids()
    surface = delta_surface(env, tau, t)
    write_surface_csv(surface, out, _header(config))
    return EXIT_OK


def cmd_bound(config: RunConfig, out: Path | None, curve_out: Path | None = None) -> int:
    env = config.build_environment()
    tau, t = config.grids()
    surface = delta_surface(env, tau, t)
    bound = estimate(env, config.method, sin_floor=config.sin_floor, surface=surface)
    text = json.dumps(bound.to_record(), indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    if curve_out is not None:
        curve = per_tau_curve(surface, len(env))
        with open(curve_out, "w", newline="") as fh:
            for line in _header(config):
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tau_us", "bound"])
            for x, y in zip(surface.tau_grid, curve):
                w.writerow([_fmt(x), _fmt(y)])
    return EXIT_OK


def cmd_sweep_p(config: RunConfig, out: Path) -> int:
    p_values = config.p_values if config.p_values is not None else [round(0.1 * k, 10) for k in range(11)]
    env = config.base_environment()
    tau, t = config.grids()
    rows = bound_vs_polarization(env, p_values, config.method, None, tau, t, config.sin_floor)
    with open(out, "w", newline="") as fh:
        for line in _header(config):
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p_actual", "bound", "method", "n", "b_gauss"])
        for p, b in rows:
            w.writerow([_fmt(p), _fmt(b), config.method, len(env), _fmt(config.b_gauss)])
    return EXIT_OK


def cmd_validate(max_n: int, cases: int, seed: int, out: Path | None = None, corrupted: bool = False) -> int:
    results = run_validation(max_n, cases, seed, corrupted)
    lines = [f"nvpol validate max_n={max_n} cases={cases} seed={seed}"] + [r.line() for r in results]
    ok = all(r.ok for r in results)
    lines.append("OK" if ok else "FAILED")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out is not None:
        Path(out).write_text(text)
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_gen_env(seed: int, n: int, r_min: float, r_max: float, out: Path) -> int:
    env = generate_environment(seed, n, r_min, r_max)
    bad = [row for row in audit_rows(env) if not row["ok"]]
    if bad:
        sys.stderr.write(f"generated couplings fail the dipolar norm audit: {bad}\n")
        return EXIT_VALIDATION
    save_environment(env, out)
    return EXIT_OK


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config field (dotted keys)")
    p.add_argument("--b-gauss", type=float)
    p.add_argument("--n-spins", type=int, help="use the first N reference spins")
    p.add_argument("--tau-max-us", type=float)
    p.add_argument("--t-max-us", type=float)
    p.add_argument("--grid-points", type=int)
    p.add_argument("--method", choices=[m.value for m in Method])
    p.add_argument("--sin-floor", type=float)
    p.add_argument("--out", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nvpol", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nvpol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("surface", help="write |drho01| on a (tau, t) grid as CSV")
    _add_run_options(p)

    p = sub.add_parser("bound", help="polarization lower bound as a JSON record")
    _add_run_options(p)
    p.add_argument("--curve-out", type=Path, help="also write the per-tau curve (max over t, / N)")

    p = sub.add_parser("sweep-p", help="bound vs. true uniform polarization")
    _add_run_options(p)
    p.add_argument("--p-values", help="comma-separated polarizations")

    p = sub.add_parser("validate", help="randomized consistency battery")
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", type=Path)
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("gen-env", help="random lattice environment as JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r-min-nm", type=float, default=0.3)
    p.add_argument("--r-max-nm", type=float, default=2.5)
    p.add_argument("--out", type=Path, required=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    sets = list(args.set)
    flag_map = {
        "b_gauss": "b_gauss",
        "tau_max_us": "tau_grid.max_us",
        "t_max_us": "t_grid.max_us",
        "method": "method",
        "sin_floor": "sin_floor",
    }
    for attr, key in flag_map.items():
        value = getattr(args, attr)
        if value is not None:
            sets.append(f"{key}={json.dumps(value)}")
    if args.grid_points is not None:
        sets += [f"tau_grid.points={args.grid_points}", f"t_grid.points={args.grid_points}"]
    if args.n_spins is not None:
        sets.append("environment=" + json.dumps({"source": "table1", "n": args.n_spins}))
    if getattr(args, "p_values", None):
        sets.append(f"p_values={json.dumps([float(v) for v in args.p_values.split(',')])}")
    return config.with_overrides(sets) if sets else config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args.max_n, args.cases, args.seed, args.out, args.corrupt)
        if args.command == "gen-env":
            return cmd_gen_env(args.seed, args.n, args.r_min_nm, args.r_max_nm, args.out)
        config = config_from_args(args)
        if args.command == "surface":
            if args.out is None:
                raise ConfigError("surface needs --out")
            return cmd_surface(config, args.out)
        if args.command == "bound":
            return cmd_bound(config, args.out, args.curve_out)
        if args.command == "sweep-p":
            if args.out is None:
                raise ConfigError("sweep-p needs --out")
            return cmd_sweep_p(config, args.out)
    except (AllPointsExcluded, NonPositiveOmega) as exc:
        sys.stderr.write(f"nvpol: {exc}\n")
        return EXIT_EMPTY
    except OSError as exc:
        sys.stderr.write(f"nvpol: {exc}\n")
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        sys.stderr.write(f"nvpol: {exc}\n")
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
