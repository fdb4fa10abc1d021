"""Experiment orchestration: `memheat verify|solve|sweep|rate|liouville`.

Configs are flat `key = value` text with dotted section prefixes
(`solver.dt0 = 1e-3`); unknown keys are rejected.  Reports embed the full
resolved configuration under a `config.` prefix, so a report file can be
fed back to --config and reproduces its run byte for byte.  Exit codes:
0 success, 1 check failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from memheat import analysis, verify
from memheat.core import (
    Grid,
    GridFunction,
    ValidationError,
    gaussian_bump,
    make_params,
    random_band_limited,
)
from memheat.liouville import certificate_scan
from memheat.solver import STATUS_BLEW_UP, SolverConfig, run_simulation

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


KNOWN_KEYS = {
    "params.n",
    "params.m",
    "params.gamma",
    "params.p",
    "grid.L",
    "grid.N",
    "solver.dt0",
    "solver.dt_min",
    "solver.threshold",
    "solver.t_end",
    "solver.snapshot_stride",
    "solver.c_adapt",
    "init.kind",
    "init.value",
    "init.height",
    "init.width",
    "init.amplitude",
    "init.seed",
    "output.dir",
    "seed",
    "liouville.regime",
    "liouville.T_values",
    "liouville.R",
    "liouville.sigma",
    "liouville.points",
}

DEFAULTS = {
    "params.n": "1",
    "params.m": "1",
    "grid.L": "10",
    "grid.N": "512",
    "solver.dt0": "1e-3",
    "solver.dt_min": "1e-12",
    "solver.threshold": "1e8",
    "solver.t_end": "10",
    "solver.snapshot_stride": "10",
    "solver.c_adapt": "0.1",
    "init.kind": "zero",
    "seed": "0",
}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat key = value lines; `config.`-prefixed keys (embedded in
    reports) are unwrapped, `result.` keys are ignored."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in stripped.split("=", 1))
        raw[key] = value
    if any(k.startswith("config.") for k in raw):
        raw = {
            k[len("config."):]: v for k, v in raw.items() if k.startswith("config.")
        }
    else:
        raw = {k: v for k, v in raw.items() if not k.startswith("result.")}
    for key in raw:
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    return raw


def load_config(path: str | Path) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text())


@dataclass
class Experiment:
    """Fully resolved single-run configuration."""

    entries: dict[str, str]

    def get(self, key: str) -> str:
        if key in self.entries:
            return self.entries[key]
        if key in DEFAULTS:
            return DEFAULTS[key]
        raise ConfigError(f"missing required config key {key!r}")

    def getfloat(self, key: str) -> float:
        try:
            return float(self.get(key))
        except ValueError as exc:
            raise ConfigError(f"key {key!r} is not a number") from exc

    def getint(self, key: str) -> int:
        try:
            return int(self.get(key))
        except ValueError as exc:
            raise ConfigError(f"key {key!r} is not an integer") from exc

    def resolved(self) -> dict[str, str]:
        out = dict(DEFAULTS)
        out.update(self.entries)
        return dict(sorted(out.items()))

    def build(self):
        try:
            params = make_params(
                self.getint("params.n"),
                self.getint("params.m"),
                self.getfloat("params.gamma"),
                self.getfloat("params.p"),
            )
            grid = Grid(
                dim=params.n,
                half_width=self.getfloat("grid.L"),
                points_per_axis=self.getint("grid.N"),
            )
            solver_cfg = SolverConfig(
                params=params,
                grid=grid,
                dt0=self.getfloat("solver.dt0"),
                t_end=self.getfloat("solver.t_end"),
                dt_min=self.getfloat("solver.dt_min"),
                blowup_threshold=self.getfloat("solver.threshold"),
                snapshot_stride=self.getint("solver.snapshot_stride"),
                c_adapt=self.getfloat("solver.c_adapt"),
            )
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc
        return params, grid, solver_cfg

    def initial_field(self, grid: Grid, seed_override: int | None = None):
        kind = self.get("init.kind")
        if kind == "zero":
            return GridFunction.zeros(grid)
        if kind == "constant":
            return GridFunction.constant(grid, self.getfloat("init.value"))
        if kind == "bump":
            return gaussian_bump(
                grid, self.getfloat("init.height"), self.getfloat("init.width")
            )
        if kind == "random":
            seed = (
                seed_override
                if seed_override is not None
                else int(self.entries.get("init.seed", self.get("seed")))
            )
            return random_band_limited(grid, seed, self.getfloat("init.amplitude"))
        raise ConfigError(f"unknown init.kind {kind!r}")


def fmt(x) -> str:
    """Shortest round-trip decimal representation."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_gnuplot(path: Path, csv_name: str, title: str, logscale: bool) -> None:
    lines = [
        "set datafile separator ','",
        f"set title '{title}'",
        "set key autotitle columnhead",
    ]
    if logscale:
        lines.append("set logscale y")
    lines.append(f"plot '{csv_name}' using 1:2 with lines")
    path.write_text("\n".join(lines) + "\n")


def _report_lines(exp: Experiment, results: dict[str, str]) -> list[str]:
    lines = ["# memheat report"]
    lines += [f"config.{k} = {v}" for k, v in exp.resolved().items()]
    lines += [f"result.{k} = {v}" for k, v in results.items()]
    return lines


# ---------------------------------------------------------------------------
# Subcommands


def cmd_verify(args) -> int:
    suites = (
        list(verify.SUITES) if args.suite == "all" else [args.suite]
    )
    for s in suites:
        if s not in verify.SUITES:
            print(f"unknown suite {s!r}; choose from {verify.SUITES} or all",
                  file=sys.stderr)
            return EXIT_CONFIG
    half_width, points = 20.0, 2048
    if args.config:
        exp = Experiment(load_config(args.config))
        half_width = exp.getfloat("grid.L")
        points = exp.getint("grid.N")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_checks = []
    for s in suites:
        all_checks.extend(verify.run_suite(s, half_width, points))
    report = out_dir / "verify_report.txt"
    report.write_text(
        "name, expected, got, tol, pass\n"
        + "\n".join(c.line() for c in all_checks)
        + "\n"
    )
    failed = [c for c in all_checks if not c.passed]
    for c in all_checks:
        print(c.line())
    if failed:
        print(f"{len(failed)} of {len(all_checks)} checks failed", file=sys.stderr)
        return EXIT_CHECK_FAILED
    print(f"all {len(all_checks)} checks passed")
    return EXIT_OK


def _run_experiment(exp: Experiment, seed: int | None):
    params, grid, solver_cfg = exp.build()
    u0 = exp.initial_field(grid, seed)
    traj = run_simulation(solver_cfg, u0)
    return params, traj


def _rate_results(traj) -> dict[str, str]:
    results = {
        "status": traj.status,
        "t_last": fmt(traj.t_last),
        "final_sup": fmt(float(traj.sup_norms[-1])),
        "boundary_peak": fmt(traj.boundary_peak),
    }
    if traj.status == STATUS_BLEW_UP:
        try:
            t_star = analysis.estimate_blowup_time(traj)
            report = analysis.fit_blowup_rate(traj, t_star)
            results.update(
                t_star=fmt(report.t_star),
                alpha_hat=fmt(report.alpha_hat),
                alpha1=fmt(report.alpha1),
                rel_err=fmt(report.rel_err),
                fit_points=fmt(report.n_points),
                fit_residual=fmt(report.residual),
            )
        except (analysis.BlowupFitError, analysis.RefinementNeeded) as exc:
            results["rate_fit_error"] = str(exc)
    return results


def cmd_solve(args) -> int:
    exp = Experiment(load_config(args.config))
    seed = args.seed if args.seed is not None else None
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    params, traj = _run_experiment(exp, seed)

    rows = zip(traj.times, traj.sup_norms, traj.l1_norms, traj.means, traj.dts)
    write_csv(out_dir / "trajectory.csv",
              ["t", "sup_norm", "l1_norm", "mean", "dt"], rows)
    write_gnuplot(out_dir / "trajectory.gp", "trajectory.csv",
                  "sup-norm history", logscale=True)
    results = _rate_results(traj)
    (out_dir / "report.txt").write_text("\n".join(_report_lines(exp, results)) + "\n")
    (out_dir / "resolved_config.cfg").write_text(
        "\n".join(f"{k} = {v}" for k, v in exp.resolved().items()) + "\n"
    )
    print(f"status = {traj.status}, t_last = {fmt(traj.t_last)}")
    return EXIT_OK


def _sweep_keys(entries: dict[str, str]) -> list[str]:
    return sorted(k for k, v in entries.items() if "," in v and k != "liouville.T_values")


def _sweep_row(task):
    entries, seed = task
    exp = Experiment(entries)
    params, traj = _run_experiment(exp, seed)
    results = _rate_results(traj)
    return results


def cmd_sweep(args) -> int:
    base = load_config(args.config)
    keys = _sweep_keys(base)
    if not keys:
        print("sweep config has no ranged keys", file=sys.stderr)
        return EXIT_CONFIG
    ranges = []
    for k in keys:
        vals = [v.strip() for v in base[k].split(",") if v.strip()]
        if not vals:
            print(f"empty range for {k!r}", file=sys.stderr)
            return EXIT_CONFIG
        ranges.append(vals)
    combos = list(itertools.product(*ranges))
    tasks = []
    for combo in combos:
        entries = dict(base)
        entries.update(dict(zip(keys, combo)))
        tasks.append((entries, args.seed))

    threads = args.threads or int(os.environ.get("MEMHEAT_THREADS", "1"))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_row, tasks))
    else:
        results = [_sweep_row(t) for t in tasks]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = keys + ["status", "t_star", "alpha_hat", "rel_err"]
    rows = []
    for combo, res in zip(combos, results):
        rows.append(
            list(combo)
            + [
                res.get("status", ""),
                res.get("t_star", ""),
                res.get("alpha_hat", ""),
                res.get("rel_err", ""),
            ]
        )
    write_csv(out_dir / "sweep.csv", header, rows)
    print(f"{len(rows)} sweep rows written")
    return EXIT_OK


def cmd_rate(args) -> int:
    exp = Experiment(load_config(args.config))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    params, traj = _run_experiment(exp, args.seed)
    results = _rate_results(traj)
    if traj.status == STATUS_BLEW_UP and "t_star" in results:
        t_star = float(results["t_star"])
        cert = analysis.lower_bound_certificate(traj, t_star)
        results["lower_bound_pass_fraction"] = fmt(cert.pass_fraction)
        results["lower_bound_constant"] = fmt(cert.implied_constant)
        t0 = 0.5 * (traj.times[0] + t_star) + 0.45 * (t_star - traj.times[0])
        t0 = min(t0, traj.t_last)
        diag = analysis.rescaled_diagnostics(traj, t0, A=1.0)
        results["rescale_origin_value"] = fmt(diag.origin_value)
        results["rescale_bound_check"] = fmt(diag.bound_check)
        results["rescale_partial"] = str(diag.partial)
        mask = (traj.sup_norms >= 1e2) & (traj.sup_norms <= 1e6)
        rows = zip(traj.times[mask], traj.sup_norms[mask])
        write_csv(out_dir / "rate_window.csv", ["t", "sup_norm"], rows)
        write_gnuplot(out_dir / "rate_window.gp", "rate_window.csv",
                      "fit window", logscale=True)
    (out_dir / "rate_report.txt").write_text(
        "\n".join(_report_lines(exp, results)) + "\n"
    )
    print("\n".join(f"{k} = {v}" for k, v in results.items()))
    return EXIT_OK


def cmd_liouville(args) -> int:
    exp = Experiment(load_config(args.config))
    params, _, _ = exp.build()
    regime = exp.get("liouville.regime")
    try:
        T_values = [float(v) for v in exp.get("liouville.T_values").split(",")]
    except ValueError as exc:
        raise ConfigError("liouville.T_values must be a comma list of numbers") from exc
    R_fixed = (
        exp.getfloat("liouville.R") if "liouville.R" in exp.entries else None
    )
    sigma = (
        exp.getfloat("liouville.sigma") if "liouville.sigma" in exp.entries else None
    )
    points = (
        exp.getint("liouville.points") if "liouville.points" in exp.entries else 1024
    )
    try:
        scan = certificate_scan(
            params, regime, T_values, R_fixed=R_fixed, sigma=sigma, points=points
        )
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [
        (r.T, r.rhs_total, r.head_term, r.kernel_term, r.R, r.lhs) for r in scan.rows
    ]
    write_csv(out_dir / "liouville_scan.csv",
              ["T", "rhs_total", "head_term", "kernel_term", "R", "lhs"], rows)
    write_gnuplot(out_dir / "liouville_scan.gp", "liouville_scan.csv",
                  "certificate decay", logscale=True)
    results = {
        "regime": regime,
        "fitted_slope": fmt(scan.fitted_slope),
        "predicted_slope": fmt(scan.predicted_slope),
    }
    (out_dir / "liouville_report.txt").write_text(
        "\n".join(_report_lines(exp, results)) + "\n"
    )
    print(f"fitted slope {fmt(scan.fitted_slope)} "
          f"(predicted {fmt(scan.predicted_slope)})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memheat",
        description="memory-driven polyharmonic heat equation laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--threads", type=int, default=None,
                       help="worker count (MEMHEAT_THREADS fallback)")

    p_verify = sub.add_parser("verify", help="run module self-check suites")
    p_verify.add_argument("suite", help="fractional|spectral|memory|liouville|all")
    common(p_verify)
    for name in ("solve", "sweep", "rate", "liouville"):
        common(sub.add_parser(name))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "verify": cmd_verify,
        "solve": cmd_solve,
        "sweep": cmd_sweep,
        "rate": cmd_rate,
        "liouville": cmd_liouville,
    }
    if args.command != "verify" and not args.config:
        print("--config is required for this subcommand", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return handlers[args.command](args)
    except (ConfigError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
