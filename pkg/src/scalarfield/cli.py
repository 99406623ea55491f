"""Command line driver: config in, JSON report and CSV artifacts out.

Exit codes: 0 success, 2 configuration error, 3 hypothesis violation
(nonnegativity of the potential fails at a node), 4 the main solve did not
converge (a partial, well-formed report is still written).

The run report is deterministic for a fixed config: keys are sorted and all
wall-clock timings go to a separate timings.json.
"""

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import RunConfig
from .errors import (
    ConfigurationError,
    GridMismatchError,
    HypothesisViolationError,
    ScalarFieldError,
    SolverError,
)
from .fieldio import read_field, write_field, write_history
from .functionals import energy_J, mass_I
from .eigen import principal_eigenpair, second_eigenpair
from .potentials import (
    EXPONENT_CONVENTION,
    PotentialSpec,
    hypothesis_report,
    make_potential,
)
from .variational import (
    SolverOptions,
    ground_state,
    h_eval,
    lambda2_bounds,
    loop_minimax_upper,
    nodal_minimax,
)
from .verification import decay_fit, nodality, radial_deviation, residual_eq

log = logging.getLogger("scalarfield")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_NONCONVERGED = 4


def _setup_logging():
    level = os.environ.get("NODAL_MINIMAX_LOG", "quiet").lower()
    levels = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise ConfigurationError(
            f"NODAL_MINIMAX_LOG = {level!r}; expected quiet, info, or debug"
        )
    logging.basicConfig(level=levels[level], format="%(levelname)s %(name)s: %(message)s")


def _solver_options(cfg):
    s = cfg["solver"]
    return SolverOptions(
        max_iter=s["max_iter"],
        tol_residual=s["tol_residual"],
        tol_h=s["tol_h"],
        eigen_tol=s["eigen_tol"],
        eigen_res=s["eigen_res"],
        seed_separation=s["seed_separation"],
        nodal_delta=s["nodal_delta"],
    )


def _ground_options(cfg):
    s = cfg["solver"]
    return SolverOptions(
        max_iter=s["ground_max_iter"],
        tol_residual=s["ground_tol"],
        eigen_tol=s["eigen_tol"],
        eigen_res=s["eigen_res"],
    )


def _bool(text):
    return str(text).strip().lower() in ("true", "yes", "1", "on")


class _Timer:
    def __init__(self):
        self.entries = {}

    def time(self, name):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.entries[name] = time.perf_counter() - self.t0

        return _Ctx()


def _ensure_dirs(outdir):
    os.makedirs(os.path.join(outdir, "fields"), exist_ok=True)
    os.makedirs(os.path.join(outdir, "history"), exist_ok=True)


def _ground_pair(cfg, outdir, timer):
    """Ground states for the configured potential and the constant reference."""
    grid = cfg.grid
    p = cfg.params.p
    V = make_potential(cfg.potential_spec, grid)
    opts = _ground_options(cfg)
    with timer.time("ground_state"):
        gs = ground_state(grid, V, p, opts=opts)
    spec_inf = PotentialSpec("constant", cfg.potential_spec.V_inf)
    V_inf = make_potential(spec_inf, grid)
    with timer.time("ground_state_inf"):
        gs_inf = ground_state(grid, V_inf, p, opts=opts)
    if outdir is not None:
        write_field(os.path.join(outdir, "fields", "w1.csv"), gs.u, name="w1")
        write_field(os.path.join(outdir, "fields", "w1_inf.csv"), gs_inf.u, name="w1_inf")
        write_history(os.path.join(outdir, "history", "ground_J.csv"), gs.J_history)
    return V, gs, gs_inf


def cmd_ground(cfg, outdir, timer):
    grid = cfg.grid
    p = cfg.params.p
    V, gs, gs_inf = _ground_pair(cfg, outdir, timer)
    fit = decay_fit(grid, gs.u, cfg.potential_spec.V_inf, cfg.params.N_eff)
    results = {
        "lambda1": gs.lam,
        "lambda1_inf": gs_inf.lam,
        "ground": gs.to_dict(),
        "ground_inf": gs_inf.to_dict(),
        "decay_fit": {
            "fitted_rate": fit.fitted_rate,
            "expected_rate": math.sqrt(cfg.potential_spec.V_inf),
            "r_squared": fit.r_squared,
        },
        "mass": mass_I(grid, gs.u, p),
    }
    code = EXIT_OK if gs.flags["converged"] and gs_inf.flags["converged"] else EXIT_NONCONVERGED
    return results, code


def cmd_linearize(cfg, outdir, timer):
    u, _ = read_field(cfg["run"]["field_path"])
    grid = u.grid
    if grid.key != cfg.grid.key:
        raise GridMismatchError(
            "stored field grid does not match the configured grid"
        )
    p = cfg.params.p
    V = make_potential(cfg.potential_spec, grid)
    s = cfg["solver"]
    with timer.time("eigenpairs"):
        pair1 = principal_eigenpair(grid, V, u, p, tol=s["eigen_tol"],
                                    res_target=s["eigen_res"])
        pair2 = second_eigenpair(grid, V, u, p, pair1, tol=s["eigen_tol"],
                                 res_target=s["eigen_res"])
    write_field(os.path.join(outdir, "fields", "v1.csv"), pair1.v, name="v1")
    write_field(os.path.join(outdir, "fields", "v2.csv"), pair2.v, name="v2")
    results = {
        "mu1": pair1.mu,
        "mu2": pair2.mu,
        "residual_v1": pair1.residual,
        "residual_v2": pair2.residual,
        "k_norm_v1": pair1.k_norm,
        "k_norm_v2": pair2.k_norm,
        "v1_min": float(np.min(pair1.v.values)),
    }
    return results, EXIT_OK


def cmd_bounds(cfg, outdir, timer):
    grid = cfg.grid
    p = cfg.params.p
    V, gs, gs_inf = _ground_pair(cfg, outdir, timer)
    lower, upper = lambda2_bounds(gs.lam, gs_inf.lam, p)
    with timer.time("loop_upper"):
        loop = loop_minimax_upper(grid, V, gs.u, p,
                                  n_samples=cfg["run"]["loop_samples"],
                                  opts=_solver_options(cfg))
    hyp = hypothesis_report(cfg.potential_spec, cfg.params, gs_inf.lam, grid=grid)
    results = {
        "lambda1": gs.lam,
        "lambda1_inf": gs_inf.lam,
        "lambda2_lower": lower,
        "lambda2_upper": upper,
        "loop_upper_at_ground": loop,
        "hypotheses": json.loads(hyp.to_json()),
    }
    return results, EXIT_OK


def cmd_nodal(cfg, outdir, timer):
    grid = cfg.grid
    p = cfg.params.p
    V, gs, gs_inf = _ground_pair(cfg, outdir, timer)
    hyp = hypothesis_report(cfg.potential_spec, cfg.params, gs_inf.lam, grid=grid)
    lower, upper = lambda2_bounds(gs.lam, gs_inf.lam, p)

    opts = _solver_options(cfg)
    with timer.time("nodal_minimax"):
        nodal = nodal_minimax(grid, V, p, opts=opts)
    write_field(os.path.join(outdir, "fields", "u2.csv"), nodal.u, name="u2")
    write_history(os.path.join(outdir, "history", "nodal_J.csv"), nodal.J_history)

    nod = nodality(grid, nodal.u, p, delta=opts.nodal_delta)
    res = residual_eq(grid, V, nodal.u, nodal.lam, p)
    with timer.time("loop_upper"):
        loop = loop_minimax_upper(grid, V, nodal.u, p,
                                  n_samples=cfg["run"]["loop_samples"], opts=opts)

    results = {
        "lambda1": gs.lam,
        "lambda1_inf": gs_inf.lam,
        "lambda2": nodal.lam,
        "lambda2_lower": lower,
        "lambda2_upper": upper,
        "loop_upper": loop,
        "hypotheses": json.loads(hyp.to_json()),
        "nodal": nodal.to_dict(),
        "verification": {
            "residual": res,
            "pos_mass": nod.pos_mass,
            "neg_mass": nod.neg_mass,
            "is_nodal": nod.is_nodal,
            "within_bounds": bool(lower < nodal.lam < upper),
        },
    }
    if _bool(cfg["run"]["radial_check"]) and grid.mode == "cartesian2d":
        results["verification"]["radial_deviation_w1"] = radial_deviation(grid, gs.u)
        results["verification"]["radial_deviation_u2"] = radial_deviation(grid, nodal.u)
    code = EXIT_OK if nodal.flags["converged"] else EXIT_NONCONVERGED
    return results, code


def cmd_verify(cfg, outdir, timer):
    u, name = read_field(cfg["run"]["field_path"])
    grid = u.grid
    p = cfg.params.p
    V = make_potential(cfg.potential_spec, grid)
    lam = cfg["run"]["lambda"]
    I_val = mass_I(grid, u, p)
    if lam is None:
        # a solution satisfies J = lambda I, so the quotient recovers lambda
        lam = energy_J(grid, V, u) / I_val
    with timer.time("verify"):
        res = residual_eq(grid, V, u, lam, p)
        nod = nodality(grid, u, p, delta=cfg["solver"]["nodal_delta"])
        h = h_eval(grid, V, u, p) if nod.is_nodal else None
    results = {
        "field": name,
        "lambda": lam,
        "residual": res,
        "mass": I_val,
        "on_M": bool(abs(I_val - 1.0) <= 1e-8),
        "pos_mass": nod.pos_mass,
        "neg_mass": nod.neg_mass,
        "is_nodal": nod.is_nodal,
        "h_value": h,
        "certified": bool(res <= cfg["solver"]["tol_residual"]),
    }
    code = EXIT_OK if results["certified"] else EXIT_NONCONVERGED
    return results, code


def _sweep_one(task):
    """Worker for one (c0, a) sweep point; returns a flat result row."""
    grid_args, V_inf, p, c0, a, solver = task
    from .grid import build_grid
    from .potentials import ProblemParams

    grid = build_grid(*grid_args)
    row = {"c0": c0, "a": a}
    try:
        spec = PotentialSpec("exp_well", V_inf, c0=c0, a=a)
        V = make_potential(spec, grid)
        gopts = SolverOptions(max_iter=solver["ground_max_iter"],
                              tol_residual=solver["ground_tol"])
        gs = ground_state(grid, V, p, opts=gopts)
        spec_inf = PotentialSpec("constant", V_inf)
        gs_inf = ground_state(grid, make_potential(spec_inf, grid), p, opts=gopts)
        hyp = hypothesis_report(spec, ProblemParams(p, grid.dim, V_inf),
                                gs_inf.lam, grid=grid)
        opts = SolverOptions(max_iter=solver["max_iter"],
                             tol_residual=solver["tol_residual"],
                             tol_h=solver["tol_h"],
                             nodal_delta=solver["nodal_delta"])
        nodal = nodal_minimax(grid, V, p, opts=opts)
        row.update({
            "lambda1": gs.lam,
            "lambda1_inf": gs_inf.lam,
            "lambda2": nodal.lam,
            "converged": nodal.flags["converged"],
            "is_nodal": nodal.flags["nodal"],
            "smallness_pass": hyp["smallness"]["pass"],
            "diagnosis": nodal.diagnosis or "",
        })
    except ScalarFieldError as exc:
        row.update({"lambda1": None, "lambda1_inf": None, "lambda2": None,
                    "converged": False, "is_nodal": False,
                    "smallness_pass": False, "diagnosis": f"error: {exc}"})
    return row


def cmd_sweep(cfg, outdir, timer, jobs=1):
    c0s = cfg.sweep_values("sweep_c0")
    a_list = cfg.sweep_values("sweep_a") or [cfg["potential"]["a"]]
    g = cfg["grid"]
    grid_args = (g["mode"], g["R"], g["h"],
                 g["N"] if g["mode"] == "radial" else None)
    tasks = [
        (grid_args, cfg["potential"]["V_inf"], cfg.params.p, c0, a, cfg["solver"])
        for c0 in c0s for a in a_list
    ]
    with timer.time("sweep"):
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(_sweep_one, tasks))
        else:
            rows = [_sweep_one(t) for t in tasks]

    cols = ["c0", "a", "lambda1", "lambda1_inf", "lambda2", "converged",
            "is_nodal", "smallness_pass", "diagnosis"]
    with open(os.path.join(outdir, "sweep.csv"), "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join("" if row[c] is None else str(row[c]) for c in cols) + "\n")
    return {"rows": rows, "n_points": len(rows)}, EXIT_OK


def run(cfg, outdir, jobs=1):
    """Execute the configured command; returns (report_dict, exit_code)."""
    _ensure_dirs(outdir)
    timer = _Timer()
    command = cfg["run"]["command"]
    report = {
        "command": command,
        "adopted-exponent-convention": EXPONENT_CONVENTION,
        "config": cfg.echo,
        "results": None,
        "error": None,
    }
    code = EXIT_OK
    try:
        if command == "ground":
            report["results"], code = cmd_ground(cfg, outdir, timer)
        elif command == "linearize":
            report["results"], code = cmd_linearize(cfg, outdir, timer)
        elif command == "bounds":
            report["results"], code = cmd_bounds(cfg, outdir, timer)
        elif command == "nodal":
            report["results"], code = cmd_nodal(cfg, outdir, timer)
        elif command == "verify":
            report["results"], code = cmd_verify(cfg, outdir, timer)
        elif command == "sweep":
            report["results"], code = cmd_sweep(cfg, outdir, timer, jobs=jobs)
    except HypothesisViolationError as exc:
        report["error"] = {"type": "hypothesis", "message": str(exc)}
        code = EXIT_HYPOTHESIS
    except SolverError as exc:
        report["error"] = {"type": "solver", "message": str(exc)}
        code = EXIT_NONCONVERGED

    with open(os.path.join(outdir, "run_report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(outdir, "timings.json"), "w") as fh:
        json.dump(timer.entries, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report, code


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nodal-minimax",
        description="Ground states, linearized spectra and sign-changing "
                    "solutions of -lap u + V u = lambda |u|^(p-2) u.",
    )
    parser.add_argument("--config", required=True, help="path to a run config file")
    parser.add_argument("--out", default=None, help="output directory (default from config)")
    parser.add_argument("--command", default=None,
                        help="override run.command (ground, linearize, nodal, "
                             "bounds, verify, sweep)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes for sweep")
    args = parser.parse_args(argv)

    try:
        _setup_logging()
        cfg = RunConfig.from_file(args.config)
        if args.command is not None:
            cfg.sections["run"]["command"] = args.command
            cfg._validate()
    except (ConfigurationError, GridMismatchError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisViolationError as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS

    outdir = args.out or cfg["run"]["out"]
    try:
        report, code = run(cfg, outdir, jobs=args.jobs)
    except (ConfigurationError, GridMismatchError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if report.get("error"):
        print(f"{report['error']['type']} error: {report['error']['message']}",
              file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
