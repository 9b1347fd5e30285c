"""Entropy, the explicit-constant inequality suite, and pass/fail reports.

Every inequality check is reported as a :class:`CheckResult` carrying the
measured quantity, the bound it is compared with, and ``margin``: the factor
by which the bound is met (``bound/measured`` for upper bounds,
``measured/bound`` for lower bounds).  A check passes iff its margin is at
least one.  Bounds that hold with equality in exact arithmetic (isotropic
fields at theta = 1) are relaxed by ``EQUALITY_SLACK`` before comparison.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisViolated, ThetaZero
from .gaussian import evaluate_gaussian
from .grid import PhaseSpaceGrid, cell_weighted_sup_norm
from .moments import compute_moments, relaxation_fields, sym3_eigvalsh
from .params import RelaxationParams, density_constant, lemma_constants, momentum_constant, tail_constant

EQUALITY_SLACK = 1e-9


def entropy_density(f, grid: PhaseSpaceGrid) -> np.ndarray:
    """Per-cell sum of w f ln f over (v, I) with 0 ln 0 = 0; shape (nx,)."""
    f = np.asarray(f, dtype=float).reshape(grid.shape)
    pos = f > 0
    flnf = np.where(pos, f * np.log(np.where(pos, f, 1.0)), 0.0)
    w = grid.i_weights[:, None, None, None] * grid.w_v3[None]
    return (flnf * w[None]).reshape(grid.x_count, -1).sum(axis=1)


def entropy(f, grid: PhaseSpaceGrid) -> float:
    return float(np.sum(grid.x_weights * entropy_density(f, grid)))


@dataclass
class CheckResult:
    name: str
    measured: float
    bound: float
    margin: float
    passed: bool
    cell: int = 0
    skipped: str = ""


def _upper(name, measured, bound, slack=0.0):
    """Worst cell of measured <= bound*(1+slack)."""
    b = bound * (1.0 + slack)
    with np.errstate(divide="ignore", invalid="ignore"):
        margin = np.where(measured > 0, b / measured, np.inf)
    k = int(np.argmin(margin))
    m = float(margin[k])
    return CheckResult(name, float(measured[k]), float(b[k]), m, bool(m >= 1.0), k)


def _lower(name, measured, bound, slack=0.0):
    """Worst cell of measured >= bound*(1-slack)."""
    b = bound * (1.0 - slack)
    with np.errstate(divide="ignore", invalid="ignore"):
        margin = np.where(b > 0, measured / b, np.inf)
    k = int(np.argmin(margin))
    m = float(margin[k])
    return CheckResult(name, float(measured[k]), float(b[k]), m, bool(m >= 1.0), k)


def _skipped(name, reason):
    return CheckResult(name, math.nan, math.nan, math.nan, True, skipped=reason)


def check_temperature_bounds(m, params: RelaxationParams):
    """Two-sided bounds on the tensor spectrum and of T_theta (needs theta > 0)."""
    if not params.theta > 0:
        raise HypothesisViolated("temperature bounds need theta > 0")
    if not (np.all(m.T_tr > 0) and np.all(m.T_int > 0)):
        raise HypothesisViolated("temperature bounds need T_tr > 0 and T_int > 0")
    nu, theta, delta = params.nu, params.theta, params.delta
    gp = relaxation_fields(m, params)
    eig = sym3_eigvalsh(gp.tensor)
    T = m.T_total
    c_nu = max(1.0 - nu, 1.0 + 2.0 * nu)
    return [
        _lower("tensor_min_eig", eig[:, 0], theta * T, EQUALITY_SLACK),
        _upper("tensor_max_eig", eig[:, 2], c_nu * (3.0 + delta * (1.0 - theta)) / 3.0 * T, EQUALITY_SLACK),
        _lower("T_theta_lower", gp.T_theta, theta * T, EQUALITY_SLACK),
        _upper("T_theta_upper", gp.T_theta, (delta + 3.0 * (1.0 - theta)) / delta * T, EQUALITY_SLACK),
    ]


def check_gaussian_bound(f, params: RelaxationParams, grid: PhaseSpaceGrid, m=None, norm=None):
    """||M(f)||_q <= c_gaussian ||f||_q per cell; undefined at theta = 0."""
    if params.theta <= 0:
        raise HypothesisViolated("the Gaussian norm bound is not available at theta = 0")
    m = compute_moments(f, grid) if m is None else m
    norm = cell_weighted_sup_norm(f, grid, params.q) if norm is None else norm
    M = evaluate_gaussian(m, relaxation_fields(m, params), grid)
    lhs = cell_weighted_sup_norm(M.values, grid, params.q)
    return _upper("gaussian_norm", lhs, lemma_constants(params).c_gaussian * norm)


def check_lemma_suite(f, params: RelaxationParams, grid: PhaseSpaceGrid) -> list[CheckResult]:
    """All explicit-constant inequalities for ``f``; worst cell reported per check."""
    f = np.asarray(f, dtype=float).reshape(grid.shape)
    m = compute_moments(f, grid)
    norm = cell_weighted_sup_norm(f, grid, params.q)
    delta, q = params.delta, params.q
    out = []
    try:
        out.extend(check_temperature_bounds(m, params))
    except HypothesisViolated as exc:
        out.extend(_skipped(n, str(exc)) for n in
                   ("tensor_min_eig", "tensor_max_eig", "T_theta_lower", "T_theta_upper"))
    try:
        lc = lemma_constants(params)
    except ThetaZero:
        lc = None
    c_den = lc.c_density if lc else density_constant(delta)
    c_tail = lc.c_tail if lc else tail_constant(delta, q)
    c_mom = lc.c_momentum if lc else momentum_constant(delta, q)

    T, rho = m.T_total, m.rho
    U2 = np.sum(m.U ** 2, axis=1)
    out.append(_upper("density", rho, c_den * norm * T ** ((3.0 + delta) / 2.0)))
    out.append(_upper("tail", rho * (T + U2) ** ((q - delta - 3.0) / 2.0), c_tail * norm))
    out.append(_upper("momentum", rho * U2 ** ((3.0 + delta + q) / 2.0),
                      c_mom * norm * ((T + U2) * T) ** ((3.0 + delta) / 2.0)))
    try:
        out.append(check_gaussian_bound(f, params, grid, m, norm))
    except HypothesisViolated as exc:
        out.append(_skipped("gaussian_norm", str(exc)))
    return out


def check_h_monotonicity(H, tol: float | None = None):
    """(passed, worst increase) for H[n+1] <= H[n] + tol; tol defaults to 1e-9 |H[0]|."""
    H = np.asarray(H, dtype=float)
    if tol is None:
        tol = 1e-9 * abs(H[0])
    if H.size < 2:
        return True, 0.0
    worst = float(np.max(np.diff(H)))
    return bool(worst <= tol), worst


def growth_envelope(times, norms, norm0: float, c_growth: float, slack: float = 1e-6):
    """Check ||f(t_n)||_q <= exp(c_growth t_n) ||f0||_q (1 + slack) at every step."""
    times = np.asarray(times)
    with np.errstate(over="ignore"):
        bound = np.exp(c_growth * times) * norm0 * (1.0 + slack)
    return _upper("growth_envelope", np.asarray(norms), bound)


@dataclass
class DiagnosticsReport:
    checks: list[CheckResult] = field(default_factory=list)
    run: dict = field(default_factory=dict)
    samples: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> list[CheckResult]:
        """Worst-margin entry per check name (skips reported only if every entry skipped)."""
        best: dict[str, CheckResult] = {}
        for c in self.checks:
            cur = best.get(c.name)
            if cur is None or (cur.skipped and not c.skipped):
                best[c.name] = c
            elif not c.skipped and c.margin < cur.margin:
                best[c.name] = c
        return list(best.values())

    def to_text(self) -> str:
        lines = [f"samples: {self.samples}"] if self.samples else []
        lines.append(f"passed: {str(self.passed).lower()}")
        for key, val in self.run.items():
            lines.append(f"{key}: {format_value(val)}")
        for c in self.summary():
            lines.append("")
            lines.append(f"check: {c.name}")
            if c.skipped:
                lines.append(f"skipped: {c.skipped}")
                continue
            lines.append(f"measured: {format_value(c.measured)}")
            lines.append(f"bound: {format_value(c.bound)}")
            lines.append(f"margin: {format_value(c.margin)}")
            lines.append(f"passed: {str(c.passed).lower()}")
        n_fail = len(self.failures())
        lines.append("")
        lines.append(f"failures: {n_fail}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "measured", "bound", "margin", "passed", "skipped"])
        for c in self.summary():
            w.writerow([c.name, format_value(c.measured), format_value(c.bound), format_value(c.margin),
                        int(c.passed), c.skipped])
        return buf.getvalue()


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def run_report(result, params: RelaxationParams, rho0_min: float) -> DiagnosticsReport:
    """Run-level record of a completed simulation.

    Reports the measured positivity/boundedness of the macroscopic fields,
    checks the density lower bound min rho(t) >= exp(-A t) min rho(0) and,
    for theta > 0, the growth envelope of the weighted norm.  H is checked
    strictly only when the caller passes a relaxation-only run.
    """
    A = params.A
    t_end = float(result.times[-1])
    rep = DiagnosticsReport()
    rep.run = {
        "t_final": t_end,
        "min_rho": float(result.min_rho.min()),
        "min_T_total": float(result.min_T.min()),
        "max_rho_U_T": float(result.max_sum.max()),
        "H_initial": float(result.H[0]),
        "H_final": float(result.H[-1]),
        "norm_initial": float(result.norm[0]),
        "norm_final": float(result.norm[-1]),
    }
    bound = np.exp(-A * result.times) * rho0_min * (1.0 - 1e-6)
    rep.checks.append(_lower("density_floor", result.min_rho, bound))
    if params.theta > 0:
        c_growth = lemma_constants(params).c_growth
        rep.checks.append(growth_envelope(result.times, result.norm, result.norm[0], c_growth))
    return rep
