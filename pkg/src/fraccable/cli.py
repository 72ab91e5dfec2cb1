"""Command-line front end.

Exit codes: 0 success, 1 a study or check missed its tolerance, 2 input error
(bad flags, bad config, invalid parameters), 3 I/O error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .basis import Basis
from .config import ConfigError, RunConfig, build_discretization, build_params, build_study, echo_items, parse_config
from .experiments import covariance_study, run_study
from .kernel import kernel_table
from .model import HurstPair
from .noise import RNG_NAME, derive_seed, sample_sheet
from .solver import SolverError, run

EXIT_OK, EXIT_TOLERANCE, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3

HELP = {
    "simulate": """\
Run one sample of the fully discrete scheme.

Writes trajectory.csv with columns
  n    step index
  t    time n * tau
  k    mode index (1-based)
  u_k  spectral coefficient of mode k
and, unless field_points = 0, field.csv with columns
  t    time
  x    point in [0, length] (field_points equispaced points)
  u    value of the spectral sum at (x, t)
Rows are written for every record_every-th step and for the last step.""",
    "kernel-table": """\
Tabulate the relaxation functions u_k(t).

Writes kernel.csv with columns
  k      mode index
  rho_k  Dirichlet eigenvalue (k pi / length)^2
  t      time (from kernel_times)
  u_k    relaxation value u_k(t)""",
    "noise-check": """\
Compare the empirical covariance of sampled sheet increments on a
noise_m x noise_m_space grid with the analytic product covariance.

Writes noise.csv with columns
  i, j        flattened cell indices (row-major: time cell * noise_m_space + space cell)
  empirical   sample second moment
  analytic    exact covariance
  stderr      analytic standard error of the estimate
  z           |empirical - analytic| / stderr
and noise_summary.csv with columns max_z, coarsening_error, passed.
Fails (exit 1) if any |z| > 5 or the coarsening identity is off by more than 1e-12.""",
    "convergence": """\
Monte-Carlo strong-error study against the finest grid.

The ladder key lists, per study_kind: n_steps (temporal, deterministic),
WZ cell counts (wz_mesh; wz_coarsen selects time or space), n_modes
(spatial_modes).  Writes convergence.csv with columns
  level      ladder index
  mesh       tau, WZ cell size or N
  rms_error  root-mean-square L2 coefficient error at error_time
  stderr     standard error of rms_error
and summary.csv with columns slope, stderr, theoretical, passed.
Fails (exit 1) if the fitted slope leaves
[theoretical - tolerance_low, theoretical + tolerance_high]
(squared-error slope and exponent when squared = true).""",
}


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if not math.isfinite(v):
        raise SolverError(f"non-finite value {v} in output")
    return "%.17g" % (v + 0.0)  # no "-0"


class CsvWriter:
    def __init__(self, path: str, meta: list, columns: list):
        self.path = path
        self.f = open(path, "w", encoding="utf-8", newline="\n")
        for key, value in meta:
            self.f.write(f"# {key} = {value}\n")
        self.f.write(",".join(columns) + "\n")

    def row(self, *values):
        self.f.write(",".join(_fmt(v) for v in values) + "\n")

    def close(self):
        self.f.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _metadata(cfg: RunConfig, started: float) -> list:
    meta = [("subcommand", cfg.subcommand)]
    meta += echo_items(cfg)
    meta += [("version", __version__), ("rng", RNG_NAME),
             ("wall_time_s", "%.3f" % (time.perf_counter() - started))]
    return meta


def cmd_simulate(cfg, threads, started):
    params = build_params(cfg)
    disc = build_discretization(cfg)
    sheet = sample_sheet(params.hurst, disc.wz_time, disc.wz_space, params.horizon,
                         params.length, derive_seed(cfg.seed, 0))
    traj = run(params, disc, sheet, record_every=cfg.get("record_every"))
    meta = _metadata(cfg, started)
    with CsvWriter(os.path.join(cfg.out, "trajectory.csv"), meta, ["n", "t", "k", "u_k"]) as w:
        for n, row in zip(traj.steps, traj.coeffs):
            t = n * traj.tau
            for k, c in enumerate(row, start=1):
                w.row(int(n), t, k, c)
    n_pts = cfg.get("field_points")
    if n_pts:
        xs = np.linspace(0.0, params.length, n_pts)
        synth = traj.basis.synthesis_matrix(xs)
        with CsvWriter(os.path.join(cfg.out, "field.csv"), meta, ["t", "x", "u"]) as w:
            for n, row in zip(traj.steps, traj.coeffs):
                for x, u in zip(xs, synth @ row):
                    w.row(n * traj.tau, x, u)
    return EXIT_OK


def cmd_kernel_table(cfg, threads, started):
    params = build_params(cfg)
    basis = Basis(params.length, cfg.get("n_modes"))
    modes = cfg.values.get("kernel_modes")
    try:
        tab = kernel_table(params, basis, sorted(cfg.get("kernel_times")), modes,
                           cfg.get("kernel_method"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    with CsvWriter(os.path.join(cfg.out, "kernel.csv"), _metadata(cfg, started),
                   ["k", "rho_k", "t", "u_k"]) as w:
        for i, k in enumerate(tab.modes):
            for j, t in enumerate(tab.times):
                w.row(int(k), tab.rho[i], t, tab.values[i, j])
    return EXIT_OK


def cmd_noise_check(cfg, threads, started):
    try:
        hurst = HurstPair(cfg.get("hurst_h1"), cfg.get("hurst_h2"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rep = covariance_study(hurst, cfg.get("noise_m"), cfg.get("noise_m_space"),
                           cfg.get("noise_samples"), cfg.seed,
                           horizon=cfg.get("horizon"), length=cfg.get("length"))
    meta = _metadata(cfg, started)
    z = np.abs(rep.empirical - rep.analytic) / rep.stderr
    with CsvWriter(os.path.join(cfg.out, "noise.csv"), meta,
                   ["i", "j", "empirical", "analytic", "stderr", "z"]) as w:
        dim = rep.analytic.shape[0]
        for i in range(dim):
            for j in range(dim):
                w.row(i, j, rep.empirical[i, j], rep.analytic[i, j], rep.stderr[i, j], z[i, j])
    with CsvWriter(os.path.join(cfg.out, "noise_summary.csv"), meta,
                   ["max_z", "coarsening_error", "passed"]) as w:
        w.row(rep.max_z, rep.coarsening_error, int(rep.passed))
    return EXIT_OK if rep.passed else EXIT_TOLERANCE


def cmd_convergence(cfg, threads, started):
    spec = build_study(cfg)
    report = run_study(spec, threads=threads)
    squared = cfg.get("squared")
    passed = report.within(cfg.get("tolerance_low"), cfg.get("tolerance_high"), squared=squared)
    meta = _metadata(cfg, started) + [("degenerate", str(report.degenerate).lower())]
    with CsvWriter(os.path.join(cfg.out, "convergence.csv"), meta,
                   ["level", "mesh", "rms_error", "stderr"]) as w:
        for i in range(report.meshes.size):
            w.row(i, report.meshes[i], report.rms_errors[i], report.stderr[i])
    with CsvWriter(os.path.join(cfg.out, "summary.csv"), meta,
                   ["slope", "stderr", "theoretical", "passed"]) as w:
        if not report.degenerate:
            scale = 2.0 if squared else 1.0
            theory = report.theoretical_mse if squared else report.theoretical
            w.row(scale * report.slope, scale * report.slope_stderr, theory, int(passed))
    return EXIT_OK if passed else EXIT_TOLERANCE


COMMANDS = {
    "simulate": cmd_simulate,
    "kernel-table": cmd_kernel_table,
    "noise-check": cmd_noise_check,
    "convergence": cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraccable",
        description="Solver and experiment harness for the stochastic fractional cable equation.",
        epilog="exit codes: 0 success, 1 tolerance failure, 2 input error, 3 I/O error",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    for name, text in HELP.items():
        p = sub.add_parser(name, help=text.splitlines()[0], description=text,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", required=True, help="path to a key = value config file")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--seed", type=int, help="overrides the config seed (unsigned 64-bit)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads; affects speed only, never results")
    return parser


def _err(msg):
    print(f"fraccable: error: {msg}", file=sys.stderr)


def main(argv=None) -> int:
    started = time.perf_counter()
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return EXIT_IO
    try:
        cfg = parse_config(text, args.command)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg.values["seed"] = args.seed
            cfg.raw["seed"] = str(args.seed)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg.out = args.out
        os.makedirs(cfg.out, exist_ok=True)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except OSError as exc:
        _err(f"cannot create output directory: {exc}")
        return EXIT_IO
    try:
        return COMMANDS[args.command](cfg, args.threads, started)
    except (ConfigError, SolverError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    except OSError as exc:
        _err(f"I/O failure: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
