"""Command line entry point: ``pasfhn <study> [--config c.json] [--out dir]``.

Exit status is 0 when every declared check passes, 1 when a check fails and
2 when a simulation blows up.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import platform
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import STUDY_KINDS, ConfigError, RunConfig, build_config, load_config
from .experiments import (approximation_study, oscillatory_decay_check, phase_locked_times,
                          verify_pas_derivation)
from .model import PreconditionError, check_admissible, equilibrium_for, solve_equilibrium
from .rectangles import face_flux_margin, find_rectangle
from .solver import BlowUpError, FieldState, Grid, build_system, simulate
from .solver import kernels
from .solver.io import run_manifest, write_json, write_trajectory_csv
from .source import grid_sup_amplitude, sup_amplitude

log = logging.getLogger("pasfhn")

EXIT_OK, EXIT_CHECK, EXIT_BLOWUP = 0, 1, 2


def initial_profile(spec: dict, grid: Grid):
    if spec.get("kind", "zero") == "zero":
        z = np.zeros(grid.n_points)
        return z, z.copy()
    amp, width = float(spec.get("amplitude", 0.0)), float(spec.get("width", 1.0))
    return amp * np.exp(-(grid.x / width) ** 2), np.zeros(grid.n_points)


def _grid(cfg: RunConfig) -> Grid:
    return Grid(cfg.half_extent(), cfg.grid.n_points)


def run_equilibrium(cfg, out, rng):
    o = cfg.study.options
    eq = solve_equilibrium(cfg.model.beta, cfg.model.gamma, o["tol"], o["delta_grid"])
    rec = eq.as_record()
    write_json(out / "equilibrium.json", rec)
    checks = {"bounds_satisfied": eq.bounds_satisfied, "residual_within_tol": eq.residual_h <= o["tol"]}
    return checks, {"equilibrium": rec}


def run_admissible(cfg, out, rng):
    adm = check_admissible(cfg.model.beta, cfg.model.gamma, cfg.study.options["delta_grid"])
    rec = {"beta": cfg.model.beta, "gamma": cfg.model.gamma, "admissible": adm.admissible,
           "witness": adm.witness, "discriminant": adm.discriminant, "best_margin": adm.best_margin}
    write_json(out / "admissible.json", rec)
    return {"admissible": adm.admissible}, {"admissible": rec}


def run_rectangle(cfg, out, rng):
    o = cfg.study.options
    eq = equilibrium_for(cfg.model)
    Delta = sup_amplitude(cfg.source) if o["Delta"] is None else o["Delta"]
    rect = find_rectangle(eq.v0, cfg.model.gamma, Delta, o["bound"])
    rec = {"rect": rect.as_record() if rect else None, "Delta": Delta,
           "grid_Delta": grid_sup_amplitude(cfg.source, _grid(cfg).x),
           "samples": {"x": o["x_samples"], "t_per_period": o["t_samples"], "n_face": o["n_face"]},
           "margin": None}
    if rect is not None:
        X = cfg.half_extent()
        jitter = None
        if rng is not None:
            jitter = rng.uniform(-0.5, 0.5, o["x_samples"]) * (2 * X / (o["x_samples"] - 1))
        rec["margin"] = face_flux_margin("H", rect, cfg.model, eq, cfg.source, o["x_samples"],
                                         o["t_samples"], half_extent=X, n_face=o["n_face"],
                                         x_jitter=jitter)
    write_json(out / "rectangle.json", rec)
    ok = rect is not None and rec["margin"] < 0
    return {"rectangle_found": rect is not None, "faces_inward": ok}, {"rectangle": rec}


def run_simulate(cfg, out, rng):
    o = cfg.study.options
    eq = equilibrium_for(cfg.model)
    grid = _grid(cfg)
    tag = o["system"]
    u1, u2 = initial_profile(o["initial"], grid)
    if tag == "full":
        u1, u2 = u1 + eq.v0, u2 + eq.w0
    refs = ()
    if tag in ("linear_error", "nonlinear_error"):
        # coupled V comes from a PAS run on the same grid
        pas = build_system("pas", cfg.model, cfg.source, eq, grid)
        V0, W0 = initial_profile(o["initial"], grid)
        dt_pas = 2 * math.pi / (cfg.source.eta * cfg.time.pas_per_period)
        from .solver import TrajectoryInterpolant
        vt = simulate(pas, grid, FieldState(0.0, V0, W0), cfg.time.T, min(dt_pas, 0.05))
        refs = (TrajectoryInterpolant(vt),)
        u1, u2 = np.zeros(grid.n_points), np.zeros(grid.n_points)
    spec = build_system(tag, cfg.model, cfg.source, eq, grid, *refs)
    if tag == "pas":
        dt = 2 * math.pi / (cfg.source.eta * cfg.time.pas_per_period)
    else:
        dt = 2 * math.pi / (cfg.source.omega2 * cfg.time.n_per_period)
    sample_every = cfg.time.sample_every or max(1, int(round(0.1 / dt)))
    observer = None
    rect = None
    if o["rect_bound"] is not None and tag == "pas":
        from .rectangles import InvarianceMonitor
        rect = find_rectangle(eq.v0, cfg.model.gamma, sup_amplitude(cfg.source), o["rect_bound"])
        if rect is not None:
            observer = InvarianceMonitor(rect)
    traj = simulate(spec, grid, FieldState(0.0, u1, u2), cfg.time.T, dt, sample_every, observer)
    if "csv" in cfg.output.formats:
        write_trajectory_csv(out / f"trajectory_{tag}.csv", traj, grid)
    diag = run_manifest(traj, grid, cfg.source)
    checks = {"finite": True}
    if observer is not None:
        rep = observer.report()
        diag["invariance"] = {"rect": rect.as_record(), **rep.as_record()}
        checks["invariant"] = rep.invariant
    elif o["rect_bound"] is not None:
        checks["rectangle_found"] = False
    return checks, {"solver": diag}


def run_average_check(cfg, out, rng):
    o = cfg.study.options
    eq = equilibrium_for(cfg.model)
    eta = cfg.source.eta
    ratios_wanted = o["omega_ratios"]
    base = ratios_wanted[0]
    times = phase_locked_times(eta, o["t_index"], base_ratio=base)
    rows, worst = [], (math.inf, -math.inf)
    for V in o["V"]:
        for x in o["x"]:
            for t in times:
                res = [verify_pas_derivation(cfg.model, cfg.source.with_omega(r * eta), eq, V, o["W"], x, t)
                       ["residual1"] for r in ratios_wanted]
                for a, b in zip(res, res[1:]):
                    if a > 0:
                        worst = (min(worst[0], b / a), max(worst[1], b / a))
                rows.append([V, x, float(t)] + [float(r) for r in res])
    if "csv" in cfg.output.formats:
        with (out / "average_check.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["V", "x", "t"] + [f"residual1_omega{r:g}eta" for r in ratios_wanted])
            w.writerows(rows)
    ok = math.isfinite(worst[0]) and 0.4 <= worst[0] and worst[1] <= 0.6
    return {"halving_ratio_in_range": ok}, {"ratio_min": worst[0], "ratio_max": worst[1]}


def run_oscillatory(cfg, out, rng):
    o = cfg.study.options
    eq = equilibrium_for(cfg.model)
    res = oscillatory_decay_check(o["d"], o["omega_list"], o["profile"], o["x"], o["t"], eq.v0)
    if "csv" in cfg.output.formats:
        with (out / "oscillatory.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["omega", "abs_I", "omega_times_abs_I"])
            for row in zip(res.omegas, res.values, res.scaled):
                w.writerow([repr(float(v)) for v in row])
    ok = -1.3 <= res.order <= -0.7
    return {"order_in_range": ok}, {"fitted_order": res.order}


def run_sweep(cfg, out, rng, threads=1):
    o = cfg.study.options
    eq = equilibrium_for(cfg.model)
    grid = _grid(cfg)
    rect = find_rectangle(eq.v0, cfg.model.gamma, sup_amplitude(cfg.source), o["bound"])
    V0, W0 = initial_profile(o["initial"], grid)
    res = approximation_study(cfg.model, cfg.source, o["omega_list"], cfg.time.T, grid, (V0, W0),
                              rect=rect, n_per_period=cfg.time.n_per_period,
                              store_interval=o["store_interval"], crosscheck=o["crosscheck"],
                              workers=threads)
    if "csv" in cfg.output.formats:
        with (out / "sweep.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["omega1", "error_v", "error_w", "alpha", "Fv_ynorm_times_omega"])
            for row in res.rows():
                w.writerow([repr(float(v)) for v in row])
    fv = res.fv_scaled
    checks = {
        "order_in_range": bool(0.7 <= res.fitted_order <= 1.3),
        "errors_monotone": res.monotone,
        "Fv_scaled_bounded": bool(np.max(fv) < 3 * np.min(fv)),
        "alpha_below_one_when_small": all(p.alpha < 1 for p in res.points if p.small_data_ok),
        "pas_invariant": rect is not None and all(p.invariant for p in res.points),
    }
    diag = {"fitted_order": res.fitted_order, "fitted_order_w": res.fitted_order_w,
            "rect": rect.as_record() if rect else None,
            "grid": {"half_extent": grid.half_extent, "n_points": grid.n_points, "dx": grid.dx},
            "points": [{"omega1": p.omega1, "error_v": p.error_v, "error_w": p.error_w,
                        "alpha": p.alpha, "Fv_ynorm_times_omega": p.fv_scaled,
                        "small_data_ok": p.small_data_ok, "small_data_slack": list(p.small_data_slack),
                        "invariant": p.invariant, "max_gauge": p.max_gauge, "V_stats": p.v_stats,
                        "E_crosscheck": p.e_crosscheck, "n_steps": p.n_steps, "dt": p.dt,
                        "wall_time": p.wall_time} for p in res.points]}
    return checks, diag


RUNNERS = {
    "equilibrium": run_equilibrium, "admissible": run_admissible, "rectangle": run_rectangle,
    "simulate": run_simulate, "average-check": run_average_check, "oscillatory": run_oscillatory,
    "sweep": run_sweep,
}


def run(cfg: RunConfig, out_dir: Optional[str] = None, threads: int = 1,
        seed: Optional[int] = None) -> int:
    """Execute the configured study, write artifacts and manifest.json; return the exit status."""
    out = Path(out_dir or cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed) if seed is not None else None
    start = time.perf_counter()
    manifest = {"config": cfg.echo(), "version": __version__, "backend": kernels.backend_name(),
                "python": platform.python_version(), "numpy": np.__version__, "seed": seed}
    kind = cfg.study.kind
    status = EXIT_OK
    try:
        if kind == "sweep":
            checks, diag = run_sweep(cfg, out, rng, threads=threads)
        else:
            checks, diag = RUNNERS[kind](cfg, out, rng)
        checks = {k: bool(v) for k, v in checks.items()}
        manifest["diagnostics"] = diag
        manifest["checks"] = checks
        if not all(checks.values()):
            status = EXIT_CHECK
    except BlowUpError as exc:
        manifest["error"] = {"kind": "blow-up", "t": exc.t, "message": str(exc),
                             "omega1": getattr(exc, "omega1", None)}
        status = EXIT_BLOWUP
    except PreconditionError as exc:
        manifest["error"] = {"kind": "precondition", "message": str(exc)}
        status = EXIT_CHECK
    manifest["wall_time"] = time.perf_counter() - start
    manifest["exit_status"] = status
    manifest["passed"] = status == EXIT_OK
    write_json(out / "manifest.json", manifest)
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pasfhn", description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None, help="JSON run configuration")
    ap.add_argument("--out", default=None, help="artifact directory (overrides output.directory)")
    ap.add_argument("--threads", type=int, default=1, help="parallel sweep points")
    ap.add_argument("--seed", type=int, default=None,
                    help="jitter seed for certification sample points (default: no jitter)")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("study", choices=STUDY_KINDS)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CHECK
    try:
        cfg = load_config(args.config, args.study) if args.config else build_config({}, args.study)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    status = run(cfg, args.out, args.threads, args.seed)
    out = Path(args.out or cfg.output.directory)
    summary = json.loads((out / "manifest.json").read_text())
    for name, ok in summary.get("checks", {}).items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    if "error" in summary:
        print(f"ERROR {summary['error']['message']}", file=sys.stderr)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
