"""JSON-config command line runner.

Subcommands: ``solve <config>`` marches the configured problem and exports
CSV snapshots with a JSON metadata sidecar; ``verify <config>`` runs the
requested experiments and appends their reports to a results ledger;
``list`` prints the experiment registry.  Exit codes: 0 success, 1
configuration or runtime error, 2 at least one experiment failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .expressions import ExpressionError
from .experiments import EXPERIMENTS, PreconditionError, append_to_ledger, run_experiment
from .fields import ScalarField
from .grid import GridSpec
from .groups import GroupSpecError, group_preset, make_group
from .solver import CauchyDirichletProblem, SolverConfig, SolverError, solve_parabolic

THREADS_ENV = "CARNOTPDE_THREADS"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    group: object
    grid: GridSpec
    h: float
    psi: ScalarField
    g: ScalarField
    experiments: list
    output_dir: str
    cfl_factor: float
    steady_tolerance: float
    seed: int
    snapshot_times: list
    direction_samples: int

    def problem(self):
        return CauchyDirichletProblem(self.group, self.grid, self.h,
                                      self.psi, self.g)

    def solver_config(self):
        return SolverConfig(cfl_factor=self.cfl_factor,
                            steady_tolerance=self.steady_tolerance,
                            direction_samples=self.direction_samples)


def _require(data, key, kind):
    if key not in data:
        raise ConfigError(f"missing required key '{key}'")
    value = data[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"key '{key}' must be of type {kind.__name__}")
    return value


def parse_config(text):
    """Parse and validate a JSON run configuration."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")

    spec = data.get("group", "euclidean1")
    if isinstance(spec, str):
        group = group_preset(spec)
    elif isinstance(spec, dict):
        group = make_group(spec.get("layers", ()),
                           [tuple(b) for b in spec.get("brackets", ())],
                           label=spec.get("label", "custom"))
    else:
        raise ConfigError("'group' must be a preset name or a custom spec object")

    box = _require(data, "box", list)
    cells = _require(data, "cells", list)
    h = _require(data, "h", float)
    if h < 1.0:
        raise ConfigError(
            f"h = {h} violates the homogeneity constraint h >= 1")
    horizon = float(data.get("T", 1.0))
    grid = GridSpec(box=tuple(tuple(b) for b in box), cells=tuple(cells),
                    horizon=horizon)
    if grid.ndim != group.total_dim:
        raise ConfigError(
            f"box has {grid.ndim} axes but group '{group.label}' has "
            f"{group.total_dim} coordinates")

    dim = group.total_dim
    psi = ScalarField.from_expression(_require(data, "psi", str), dim)
    g = ScalarField.from_expression(_require(data, "g", str), dim)
    for name, fld in (("psi", psi), ("g", g)):
        probe = fld(grid.coords()[:: max(1, grid.node_count // 64)], 0.0)
        if not np.all(np.isfinite(probe)):
            raise ConfigError(f"expression '{name}' is not finite on the box")

    experiments = data.get("experiments", sorted(EXPERIMENTS))
    unknown = [e for e in experiments if e not in EXPERIMENTS]
    if unknown:
        raise ConfigError(f"unknown experiments: {', '.join(unknown)}")

    snapshot_times = [float(s) for s in data.get("snapshot_times", [horizon])]
    return RunConfig(
        group=group, grid=grid, h=h, psi=psi, g=g,
        experiments=list(experiments),
        output_dir=data.get("output_dir", "."),
        cfl_factor=float(data.get("cfl_factor", 0.5)),
        steady_tolerance=float(data.get("steady_tolerance", 1e-8)),
        seed=int(data.get("seed", 0)),
        snapshot_times=snapshot_times,
        direction_samples=int(data.get("direction_samples", 16)),
    )


def export_snapshot_csv(snapshot, path):
    """One node per line, lexicographic order, fixed column layout."""
    grid = snapshot.grid
    coords = grid.coords()
    header = ",".join([f"axis_{i}" for i in range(grid.ndim)] + ["t", "u"])
    with open(path, "w") as handle:
        handle.write(header + "\n")
        t = snapshot.time_level
        for row, value in zip(coords, snapshot.values):
            cells = [f"{c:.17g}" for c in row] + [f"{t:.17g}", f"{value:.17g}"]
            handle.write(",".join(cells) + "\n")


def run_solve(config, out_dir, quiet):
    problem = config.problem()
    result = solve_parabolic(problem, config.solver_config(),
                             snapshot_times=config.snapshot_times)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for idx, snap in enumerate(result.snapshots):
        export_snapshot_csv(snap, out / f"snapshot_{idx:03d}.csv")
    metadata = {
        "group": problem.group.label,
        "h": problem.h,
        "delta": problem.grid.delta,
        "dt": result.dt_last,
        "cfl_factor": config.cfl_factor,
        "steps": result.steps,
        "snapshots": [s.time_level for s in result.snapshots],
    }
    with open(out / "metadata.json", "w") as handle:
        json.dump(metadata, handle, sort_keys=True, indent=2)
        handle.write("\n")
    if not quiet:
        print(f"solved in {result.steps} steps; "
              f"{len(result.snapshots)} snapshot(s) written to {out}")
    return 0


def run_verify(config, out_dir, quiet):
    problem = config.problem()
    solver_config = config.solver_config()
    rng = np.random.default_rng(config.seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ledger = out / "results.jsonl"
    all_passed = True
    for name in config.experiments:
        report = run_experiment(name, problem, solver_config, rng)
        append_to_ledger(report, ledger)
        all_passed = all_passed and report.passed
        if not quiet:
            status = "PASS" if report.passed else "FAIL"
            print(f"{status} {name} ({report.runtime_seconds:.2f}s)")
    return 0 if all_passed else 2


def list_experiments():
    """Names of all registered experiments, one per line."""
    return "\n".join(sorted(EXPERIMENTS))


def _apply_thread_limit():
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(int(raw))
    except (ImportError, ValueError):
        pass


def build_parser():
    parser = argparse.ArgumentParser(
        prog="carnotpde",
        description="Solve and verify parabolic infinite-Laplace problems "
                    "on Carnot groups.")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_solve = sub.add_parser("solve", help="run the configured solve, export CSV")
    p_solve.add_argument("config", help="path to a JSON config file")
    p_verify = sub.add_parser("verify", help="run the configured experiments")
    p_verify.add_argument("config", help="path to a JSON config file")
    sub.add_parser("list", help="list available experiments")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    _apply_thread_limit()
    if args.command == "list":
        print(list_experiments())
        return 0
    try:
        config = parse_config(Path(args.config).read_text())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ExpressionError, GroupSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        config.seed = args.seed
    out_dir = args.out if args.out is not None else config.output_dir
    try:
        if args.command == "solve":
            return run_solve(config, out_dir, args.quiet)
        return run_verify(config, out_dir, args.quiet)
    except (PreconditionError, ExpressionError, GroupSpecError, SolverError,
            ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
