"""Command-line entry points.

    simulate run            --config cfg.txt --out results/
    simulate sweep          --config cfg.txt --param theta --values 0,0.3,0.5,0.7 --out sweep/
    simulate validate       --suite assembly
    simulate print-defaults

Exit codes: 0 success, 1 validation or configuration error, 2 solver
failure, 3 I/O error.
"""

import argparse
import csv
import datetime
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .config import (ConfigError, config_to_text, default_config, parse_config,
                     validate_assumptions)
from .driver import SimulationAbort, run, setup_problem
from .mesh import ScalarField
from .output import RunManifest, write_manifest, write_observables_csv, write_probe_csv, write_vtk
from .phenotype import build_grid
from .validation import run_suite

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_IO = 3

SWEEP_PARAMS = ("theta", "ic_f.y_bar0", "alpha")


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _ensure_writable(out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    probe = os.path.join(out_dir, ".write_probe")
    with open(probe, "w", encoding="utf-8") as fh:
        fh.write("ok")
    os.remove(probe)


def _run_into(cfg, config_text: str, out_dir: str) -> int:
    """Run one configured simulation and serialize everything into out_dir."""
    problem = setup_problem(cfg)
    report = validate_assumptions(cfg, problem.fns)
    if not report.ok:
        print(report.format(), file=sys.stderr)
        return EXIT_CONFIG

    started = _now()
    status = EXIT_OK
    try:
        result = run(cfg, problem=problem)
    except SimulationAbort as exc:
        print(f"aborted: {exc} (last good step {exc.step})", file=sys.stderr)
        result = exc.partial
        status = EXIT_SOLVER

    outputs = []
    obs_path = os.path.join(out_dir, "observables.csv")
    write_observables_csv(result.records, obs_path)
    outputs.append(obs_path)

    times = [rec.time for rec in result.records]
    if result.records:
        grid = build_grid(cfg.y_min, cfg.y_max, cfg.n_y)
        for name in ("A", "B", "C"):
            series = np.asarray(result.probe_distributions[name])
            if series.size == 0:
                continue
            path = os.path.join(out_dir, f"phenotype_probe_{name}.csv")
            write_probe_csv(times[:series.shape[0]], series, grid.y_values, path)
            outputs.append(path)

    mesh = problem.ops.mesh
    for step, (phi_vals, sigma_vals) in sorted(result.snapshots.items()):
        phi_path = os.path.join(out_dir, f"field_phi_{step}.vtk")
        sigma_path = os.path.join(out_dir, f"field_sigma_{step}.vtk")
        write_vtk(ScalarField(phi_vals, "phi"), mesh, phi_path)
        write_vtk(ScalarField(sigma_vals, "sigma"), mesh, sigma_path)
        outputs.extend([phi_path, sigma_path])

    manifest = RunManifest(config_text=config_text, version=__version__,
                           started=started, finished=_now(), outputs=outputs,
                           exit_status=status)
    write_manifest(manifest, out_dir)
    return status


def cmd_run(config_path: str, out_dir: str | None = None) -> int:
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            config_text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(config_text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = out_dir or cfg.output.dir
    try:
        _ensure_writable(out_dir)
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return EXIT_IO
    return _run_into(cfg, config_text, out_dir)


def cmd_sweep(config_path: str, param: str, values: list[float], out_dir: str) -> int:
    """One sub-run per value plus a combined comparison table.

    A failing sub-run marks the sweep failed but the remaining values still
    execute.
    """
    if param not in SWEEP_PARAMS:
        print(f"error: sweep parameter must be one of {', '.join(SWEEP_PARAMS)}",
              file=sys.stderr)
        return EXIT_CONFIG
    if not values:
        print("error: empty sweep value list", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            parse_text = fh.read()
        base_cfg = parse_config(parse_text)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _ensure_writable(out_dir)
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return EXIT_IO

    tag = param.replace(".", "_")
    worst = EXIT_OK
    sub_results = []
    for value in values:
        if param == "theta":
            cfg = replace(base_cfg, theta=value)
        elif param == "alpha":
            cfg = replace(base_cfg, alpha=value)
        else:
            cfg = replace(base_cfg, ic_f=replace(base_cfg.ic_f, y_bar0=value))
        sub_dir = os.path.join(out_dir, f"{tag}_{value:g}")
        try:
            _ensure_writable(sub_dir)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            worst = max(worst, EXIT_IO)
            continue
        status = _run_into(cfg, config_to_text(cfg), sub_dir)
        worst = max(worst, status)
        sub_results.append((value, sub_dir))

    _write_comparison(sub_results, out_dir)
    return worst


def _write_comparison(sub_results, out_dir: str) -> None:
    """Tumour measure and centre-probe statistics across sub-runs, by time."""
    columns = []
    times = None
    for value, sub_dir in sub_results:
        obs = os.path.join(sub_dir, "observables.csv")
        if not os.path.exists(obs):
            continue
        with open(obs, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if times is None or len(rows) < len(times):
            times = [r["time"] for r in rows]
        columns.append((value, rows))
    if times is None:
        return
    header = ["time"]
    for value, _ in columns:
        header.extend([f"tumour_measure_{value:g}", f"probeA_mean_{value:g}",
                       f"probeA_var_{value:g}"])
    lines = [",".join(header)]
    for i in range(len(times)):
        row = [times[i]]
        for _, rows in columns:
            row.extend([rows[i]["tumour_measure"], rows[i]["probeA_mean"],
                        rows[i]["probeA_var"]])
        lines.append(",".join(row))
    with open(os.path.join(out_dir, "comparison.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_validate(suite: str) -> int:
    try:
        checks = run_suite(suite)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    failed = 0
    for name, passed, detail in checks:
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
        failed += 0 if passed else 1
    return EXIT_OK if failed == 0 else EXIT_CONFIG


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="simulate",
                                     description="phase-field tumour growth simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None,
                       help="output directory (default: output.dir from the config)")

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated list, e.g. 0,0.3,0.5,0.7")
    p_sweep.add_argument("--out", required=True)

    p_val = sub.add_parser("validate", help="run an invariant suite")
    p_val.add_argument("--suite", required=True)

    sub.add_parser("print-defaults", help="emit the reference configuration")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out)
    if args.command == "sweep":
        try:
            values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            print("error: --values must be a comma-separated list of numbers",
                  file=sys.stderr)
            return EXIT_CONFIG
        return cmd_sweep(args.config, args.param, values, args.out)
    if args.command == "validate":
        return cmd_validate(args.suite)
    if args.command == "print-defaults":
        print(config_to_text(default_config()), end="")
        return EXIT_OK
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
