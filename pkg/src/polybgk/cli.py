"""Command line entry point.

Subcommands: ``run``, ``check``, ``constants``, ``picard``, ``reduce-theta0``.
Each exits with status 0 exactly when every assertion it performs passes.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from .config import RunConfig, load_config, with_overrides
from .diagnostics import (
    DiagnosticsReport,
    check_h_monotonicity,
    check_lemma_suite,
    format_value,
    run_report,
)
from .errors import PolyBGKError
from .gaussian import evaluate_gaussian
from .grid import build_grid
from .initial import init_distribution
from .moments import compute_moments, relaxation_fields
from .params import RelaxationParams, constants_listing, lambda_delta, lambda_delta_quadrature
from .randomfields import random_bump_field
from .solver import (
    SimulationAborted,
    marginalize_internal,
    monatomic_relaxation_step,
    picard_iterate,
    relaxation_step,
    run_simulation,
)

log = logging.getLogger("polybgk")

CSV_HEADER = (
    "t,x,rho,ux,uy,uz,T_tr,T_int,T_total,H,"
    "mass_defect,momentum_defect,energy_defect,linf_q_norm"
)
LAMBDA_TOLERANCE = 1e-10
RANK1_TOLERANCE = 1e-12
THETA0_TOLERANCE = 1e-8


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def cross_check_lambda(delta: float) -> None:
    closed, quad = lambda_delta(delta), lambda_delta_quadrature(delta)
    rel = abs(closed - quad) / closed
    if rel > LAMBDA_TOLERANCE:
        raise PolyBGKError(f"Lambda_delta cross-check failed: gamma {closed!r} vs quadrature {quad!r}")
    log.info("Lambda_delta = %.15g (quadrature agrees to %.1e)", closed, rel)


def write_run_csv(path, result, grid) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in result.records:
            m = rec.macro
            for k in range(grid.x_count):
                d = rec.defect[k]
                row = (
                    rec.t, grid.x_nodes[k], m.rho[k], m.U[k, 0], m.U[k, 1], m.U[k, 2],
                    m.T_tr[k], m.T_int[k], m.T_total[k], rec.H[k],
                    d[0], np.max(np.abs(d[1:4])), d[4], rec.norm[k],
                )
                fh.write(",".join(f"{float(x):.17g}" for x in row) + "\n")


def cmd_run(cfg: RunConfig) -> int:
    if cfg.solver.mode == "picard":
        return cmd_picard(cfg, None)
    params = cfg.params
    grid = build_grid(cfg.grid, params.delta)
    f0 = init_distribution(cfg.init, grid)
    try:
        result = run_simulation(cfg.solver, grid, params, f0, threads=cfg.threads)
    except SimulationAborted as exc:
        return _fail(str(exc))
    write_run_csv(cfg.output_path, result, grid)

    rho0 = compute_moments(f0, grid).rho.min()
    rep = run_report(result, params, rho0)
    rep.run["drift_mass"], rep.run["drift_momentum"], rep.run["drift_energy"] = map(float, result.drift())
    ok_h, worst = check_h_monotonicity(result.H)
    rep.run["H_worst_increase"] = worst
    if grid.homogeneous:
        # relaxation-only dynamics: the discrete H-theorem is asserted
        rep.run["H_nonincreasing"] = ok_h
        h_ok = ok_h
    else:
        rep.run["H_nonincreasing_reported"] = ok_h
        h_ok = True
    if result.clipped_mass:
        rep.run["clipped_mass"] = result.clipped_mass
    print(rep.to_text(), end="")
    return 0 if rep.passed and h_ok else 1


def lemma_report(params: RelaxationParams, grid, seed: int, samples: int) -> DiagnosticsReport:
    rng = np.random.default_rng(seed)
    rep = DiagnosticsReport(samples=samples)
    rep.run = {"seed": seed, "nu": params.nu, "theta": params.theta, "delta": params.delta, "q": params.q}
    for _ in range(samples):
        f = random_bump_field(grid, rng)
        rep.checks.extend(check_lemma_suite(f, params, grid))
    return rep


def cmd_check(cfg: RunConfig, out) -> int:
    params = cfg.params
    grid = build_grid(replace(cfg.grid, x_count=1), params.delta)
    rep = lemma_report(params, grid, cfg.seed, cfg.samples)
    print(rep.to_text(), end="")
    if out:
        with open(out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(rep.to_csv())
    return 0 if rep.passed else 1


def format_constants(params: RelaxationParams) -> str:
    return "".join(f"{name}={value:.15g}\n" for name, value in constants_listing(params))


def cmd_constants(params: RelaxationParams) -> int:
    print(format_constants(params), end="")
    return 0


def cmd_picard(cfg: RunConfig, t: float | None) -> int:
    params = cfg.params
    grid = build_grid(replace(cfg.grid, x_count=1), params.delta)
    f0 = init_distribution(cfg.init, grid)
    t = cfg.solver.t_final if t is None else t
    res = picard_iterate(f0, t, params, grid, cfg.solver.picard_iterations,
                         cfg.solver.picard_time_nodes, threads=cfg.threads)
    print(f"A_t: {format_value(params.A * t)}")
    for k, d in enumerate(res.d):
        print(f"d_{k}: {format_value(d)}")
    decreasing = bool(np.all(np.diff(res.d[1:]) < 0)) if res.d.size > 2 else True
    print(f"decreasing_after_1: {str(decreasing).lower()}")
    if params.A * t <= 0.5:
        return 0 if decreasing else 1
    return 0


def rank_one_defect(table: np.ndarray) -> float:
    """Max pointwise relative gap between ``table`` (ni, n) and its rank-1 fit through the largest entry."""
    i0, j0 = np.unravel_index(np.argmax(table), table.shape)
    fit = np.outer(table[:, j0], table[i0, :]) / table[i0, j0]
    mask = table > 0
    return float(np.max(np.abs(fit[mask] - table[mask]) / table[mask]))


def theta0_consistency(params: RelaxationParams, grid, f, dt: float):
    """(rank-1 defect of the theta=0 Gaussian, max relative gap between the two reductions)."""
    p0 = replace(params, theta=0.0)
    m = compute_moments(f, grid)
    M = evaluate_gaussian(m, relaxation_fields(m, p0), grid).values[0]
    rank = rank_one_defect(M.reshape(grid.i_count, -1))
    full = marginalize_internal(relaxation_step(f, dt, p0, grid), grid).g
    mono = monatomic_relaxation_step(marginalize_internal(f, grid, p0.nu), dt)
    mask = mono > 0
    gap = float(np.max(np.abs(full[mask] - mono[mask]) / mono[mask]))
    return rank, gap


def cmd_reduce_theta0(cfg: RunConfig) -> int:
    params = cfg.params
    grid = build_grid(replace(cfg.grid, x_count=1), params.delta)
    f = init_distribution(cfg.init, grid)
    rank, gap = theta0_consistency(params, grid, f, cfg.solver.dt)
    ok_rank, ok_gap = rank <= RANK1_TOLERANCE, gap <= THETA0_TOLERANCE
    print(f"rank1_defect: {format_value(rank)}")
    print(f"rank1_passed: {str(ok_rank).lower()}")
    print(f"reduction_gap: {format_value(gap)}")
    print(f"reduction_passed: {str(ok_gap).lower()}")
    return 0 if ok_rank and ok_gap else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polybgk", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log defaults and progress")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("config", help="key = value configuration file")
        else:
            p.add_argument("config", nargs="?", help="configuration file (or give --nu/--theta/--delta/--q)")
        p.add_argument("--threads", type=int, help="worker threads (overrides [solver] threads)")
        p.add_argument("--seed", type=int, help="random seed (overrides [solver] seed)")
        p.add_argument("--out", help="output path (overrides [output] path)")
        return p

    common(sub.add_parser("run", help="evolve and write the per-cell CSV"))
    common(sub.add_parser("check", help="randomized lemma suite"))
    c = common(sub.add_parser("constants", help="print the explicit constants"), config_required=False)
    for name in ("nu", "theta", "delta", "q"):
        c.add_argument(f"--{name}", type=float)
    p = common(sub.add_parser("picard", help="successive approximations of the mild form"))
    p.add_argument("--t", type=float, help="final time (default [solver] t_final)")
    common(sub.add_parser("reduce-theta0", help="theta = 0 monatomic consistency check"))
    return ap


def _constants_params(args) -> RelaxationParams:
    flags = {k: getattr(args, k) for k in ("nu", "theta", "delta", "q")}
    if args.config:
        base = load_config(args.config).params
        flags = {k: (getattr(base, k) if v is None else v) for k, v in flags.items()}
    missing = [k for k, v in flags.items() if v is None]
    if missing:
        raise PolyBGKError(f"constants needs a config file or --{' --'.join(missing)}")
    return RelaxationParams(**flags)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "constants":
            params = _constants_params(args)
            cross_check_lambda(params.delta)
            return cmd_constants(params)
        cfg = with_overrides(load_config(args.config), threads=args.threads, seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, output_path=args.out)
        cross_check_lambda(cfg.params.delta)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "check":
            return cmd_check(cfg, args.out)
        if args.command == "picard":
            return cmd_picard(cfg, args.t)
        return cmd_reduce_theta0(cfg)
    except (PolyBGKError, OSError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
