"""Time evolution: semi-Lagrangian transport, exponential relaxation, Picard
iteration of the mild form, and the theta = 0 monatomic reduction.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .diagnostics import entropy_density
from .errors import ValidationError
from .gaussian import GaussianField, conservation_defect, conservative_correction, evaluate_gaussian, quadratic_form
from .grid import PhaseSpaceGrid, cell_weighted_sup_norm, integrate_internal, weighted_sup_norm
from .moments import GaussianParams, MacroFields, compute_moments, relaxation_fields, velocity_moments
from .parallel import map_cells
from .params import RelaxationParams, lambda_delta

log = logging.getLogger(__name__)

INTERPOLATIONS = ("linear", "cubic")
SPLITTINGS = ("lie", "strang")
MODES = ("evolve", "picard")


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 0.05
    t_final: float = 1.0
    transport_interp: str = "linear"
    conservation_fix: bool = False
    mode: str = "evolve"
    picard_iterations: int = 8
    picard_time_nodes: int = 33
    splitting: str = "lie"
    output_interval: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError("dt must be positive")
        if not self.dt <= self.t_final:
            raise ValidationError("dt must not exceed t_final")
        if self.transport_interp not in INTERPOLATIONS:
            raise ValidationError(f"transport_interp must be one of {INTERPOLATIONS}")
        if self.splitting not in SPLITTINGS:
            raise ValidationError(f"splitting must be one of {SPLITTINGS}")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}")
        if self.picard_iterations < 1 or self.picard_time_nodes < 2:
            raise ValidationError("picard_iterations >= 1 and picard_time_nodes >= 2 required")
        if self.output_interval < 1:
            raise ValidationError("output_interval must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_final / self.dt - 1e-9))


# -- transport -----------------------------------------------------------------

def _shift_weights(s: float, interp: str):
    """Stencil [(roll, weight), ...] evaluating f at index position i - s."""
    n = math.floor(s)
    alpha = s - n
    if alpha < 1e-12 or alpha > 1.0 - 1e-12:
        return [(int(round(s)), 1.0)]
    if interp == "linear":
        return [(n, 1.0 - alpha), (n + 1, alpha)]
    xi = 1.0 - alpha
    return [
        (n + 2, -xi * (xi - 1.0) * (xi - 2.0) / 6.0),
        (n + 1, (xi + 1.0) * (xi - 1.0) * (xi - 2.0) / 2.0),
        (n, -(xi + 1.0) * xi * (xi - 2.0) / 2.0),
        (n - 1, (xi + 1.0) * xi * (xi - 1.0) / 6.0),
    ]


def _transport(f, dt, grid: PhaseSpaceGrid, interp="linear", threads=1):
    if grid.homogeneous:
        return f.copy(), 0.0
    out = np.empty_like(f)

    def column(j):
        col = f[:, :, j]
        stencil = _shift_weights(grid.v_nodes[j] * dt / grid.dx, interp)
        if len(stencil) == 1:
            out[:, :, j] = np.roll(col, stencil[0][0], axis=0)
        else:
            out[:, :, j] = sum(w * np.roll(col, shift, axis=0) for shift, w in stencil)

    map_cells(column, grid.v_count, threads)
    clipped = 0.0
    if interp == "cubic":
        neg = out < 0
        if neg.any():
            w = grid.x_weights[:, None, None, None, None] * grid.i_weights[None, :, None, None, None] * grid.w_v3
            clipped = float(-np.sum(np.where(neg, out, 0.0) * w))
            out[neg] = 0.0
    return out, clipped


def transport_step(f, dt, grid: PhaseSpaceGrid, interp: str = "linear", threads: int = 1) -> np.ndarray:
    """Free streaming f(x, v, I) -> f(x - v1 dt, v, I) on the periodic x grid.

    Identity when the grid is homogeneous.  Cubic interpolation can create
    negative values; they are clipped to zero and the clipped mass logged.
    """
    out, clipped = _transport(f, dt, grid, interp, threads)
    if clipped:
        log.warning("cubic transport clipped mass %.3e", clipped)
    return out


# -- theta = 0 monatomic reduction ----------------------------------------------

@dataclass(frozen=True, eq=False)
class MonatomicState:
    """Marginal g = int f dI with its ellipsoidal relaxation tensor."""

    g: np.ndarray
    nu: float
    grid: PhaseSpaceGrid = field(repr=False)

    @property
    def A0(self) -> float:
        return 1.0 / (1.0 - self.nu)

    @cached_property
    def fields(self):
        rho, U, Theta = velocity_moments(self.g, self.grid)
        T_tr = np.trace(Theta, axis1=1, axis2=2) / 3.0
        tensor = (1.0 - self.nu) * T_tr[:, None, None] * np.eye(3)[None] + self.nu * Theta
        return rho, U, Theta, T_tr, tensor


def marginalize_internal(f, grid: PhaseSpaceGrid, nu: float = 0.0) -> MonatomicState:
    f = np.asarray(f).reshape(grid.shape)
    return MonatomicState(integrate_internal(f, grid), nu, grid)


def monatomic_gaussian(state: MonatomicState, threads: int = 1) -> np.ndarray:
    """rho det(2 pi T_nu)^(-1/2) exp(-(v-U)^T T_nu^{-1} (v-U) / 2), shape (nx, nv, nv, nv)."""
    grid = state.grid
    rho, U, _, _, tensor = state.fields
    chol = np.linalg.cholesky(tensor)

    def cell(k):
        L = chol[k]
        quad = quadratic_form(L, U[k], grid)
        log_det = 2.0 * np.log(np.diag(L)).sum()
        return math.exp(math.log(rho[k]) - 1.5 * math.log(2.0 * math.pi) - 0.5 * log_det) * np.exp(-0.5 * quad)

    return np.stack(map_cells(cell, grid.x_count, threads))


def monatomic_relaxation_step(state: MonatomicState, dt: float, threads: int = 1) -> np.ndarray:
    """g+ = exp(-A0 dt) g + (1 - exp(-A0 dt)) M_nu(g) with A0 = 1/(1 - nu)."""
    decay = math.exp(-state.A0 * dt)
    return decay * state.g + (-math.expm1(-state.A0 * dt)) * monatomic_gaussian(state, threads)


def theta0_gaussian(f, m: MacroFields, params: RelaxationParams, grid: PhaseSpaceGrid,
                    threads: int = 1) -> GaussianField:
    """Gaussian at theta = 0 assembled as (monatomic velocity part) x (internal profile)."""
    state = marginalize_internal(f, grid, params.nu)
    mv = monatomic_gaussian(state, threads)
    T_I = m.T_int
    lam = lambda_delta(grid.delta)
    prof = lam * T_I[:, None] ** (-0.5 * grid.delta) * np.exp(-grid.i_energy[None, :] / T_I[:, None])
    # mv carries rho; the internal profile integrates to one
    values = mv[:, None] * prof[:, :, None, None, None]
    _, _, _, _, tensor = state.fields
    chol = np.linalg.cholesky(tensor)
    log_det = 2.0 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1)
    return GaussianField(values, GaussianParams(T_I.copy(), tensor, chol, log_det), m.rho, m.U)


# -- relaxation -----------------------------------------------------------------

def attractor(f, params: RelaxationParams, grid: PhaseSpaceGrid, conservation_fix: bool = False,
              route_theta0: bool = False, threads: int = 1):
    """(moments of f, Gaussian used by the relaxation step)."""
    m = compute_moments(f, grid)
    if route_theta0 and params.theta == 0.0:
        M = theta0_gaussian(f, m, params, grid, threads)
    else:
        M = evaluate_gaussian(m, relaxation_fields(m, params), grid, threads)
    if conservation_fix:
        M = conservative_correction(M, m, grid, threads=threads)
    return m, M


def relaxation_step(f, dt, params: RelaxationParams, grid: PhaseSpaceGrid,
                    conservation_fix: bool = False, threads: int = 1) -> np.ndarray:
    """Exact integration of df/dt = A(M - f) with M frozen at the step start."""
    _, M = attractor(f, params, grid, conservation_fix, threads=threads)
    return _blend(f, M.values, params.A * dt)


def _blend(f, M, a_dt):
    return math.exp(-a_dt) * f + (-math.expm1(-a_dt)) * M


# -- evolution ------------------------------------------------------------------

@dataclass
class OutputRecord:
    step: int
    t: float
    macro: MacroFields
    H: np.ndarray
    defect: np.ndarray
    norm: np.ndarray


@dataclass
class SimulationResult:
    times: np.ndarray
    H: np.ndarray
    norm: np.ndarray
    invariants: np.ndarray
    min_rho: np.ndarray
    min_T: np.ndarray
    max_sum: np.ndarray
    records: list[OutputRecord]
    f_final: np.ndarray
    clipped_mass: float = 0.0

    def drift(self) -> np.ndarray:
        """Relative change of total (mass, momentum, energy) from t = 0 to the end."""
        inv0, inv1 = self.invariants[0], self.invariants[-1]
        mom_scale = math.sqrt(2.0 * inv0[0] * inv0[4])
        return np.array([
            abs(inv1[0] - inv0[0]) / inv0[0],
            np.max(np.abs(inv1[1:4] - inv0[1:4])) / mom_scale,
            abs(inv1[4] - inv0[4]) / inv0[4],
        ])


class SimulationAborted(RuntimeError):
    def __init__(self, step, cause):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


def run_simulation(config: SolverConfig, grid: PhaseSpaceGrid, params: RelaxationParams,
                   f0: np.ndarray, threads: int = 1, keep_records: bool = True) -> SimulationResult:
    """Split-step evolution from f0 to config.t_final.

    Run-level series (H, norm, invariants, field bounds) are recorded at every
    step; full per-cell output records every ``config.output_interval`` steps
    and at the final step.
    """
    f = np.array(f0, dtype=float).reshape(grid.shape)
    n = config.n_steps
    xw = grid.x_weights
    series = {k: [] for k in ("t", "H", "norm", "inv", "min_rho", "min_T", "max_sum")}
    records = []
    clipped = 0.0
    route = params.theta == 0.0

    def observe(step, t, f):
        m = compute_moments(f, grid)
        H = entropy_density(f, grid)
        norms = cell_weighted_sup_norm(f, grid, params.q)
        series["t"].append(t)
        series["H"].append(float(np.sum(xw * H)))
        series["norm"].append(float(norms.max()))
        series["inv"].append(np.sum(xw[:, None] * m.invariants(), axis=0))
        series["min_rho"].append(float(m.rho.min()))
        series["min_T"].append(float(m.T_total.min()))
        series["max_sum"].append(float(np.max(m.rho + np.linalg.norm(m.U, axis=1) + m.T_total)))
        if keep_records and (step % config.output_interval == 0 or step == n):
            _, M = attractor(f, params, grid, config.conservation_fix, route, threads)
            defect = conservation_defect(f, M, grid).relative
            records.append(OutputRecord(step, t, m, H, defect, norms))

    try:
        observe(0, 0.0, f)
    except ArithmeticError as exc:
        raise SimulationAborted(0, exc) from exc
    half = config.splitting == "strang"
    for step in range(1, n + 1):
        dt = min(config.dt, config.t_final - (step - 1) * config.dt)
        try:
            f, c1 = _transport(f, 0.5 * dt if half else dt, grid, config.transport_interp, threads)
            _, M = attractor(f, params, grid, config.conservation_fix, route, threads)
            f = _blend(f, M.values, params.A * dt)
            c2 = 0.0
            if half:
                f, c2 = _transport(f, 0.5 * dt, grid, config.transport_interp, threads)
            clipped += c1 + c2
            observe(step, step * config.dt if step < n else config.t_final, f)
        except ArithmeticError as exc:
            raise SimulationAborted(step, exc) from exc

    if clipped:
        log.warning("cubic transport clipped a total mass of %.3e", clipped)
    return SimulationResult(
        times=np.array(series["t"]), H=np.array(series["H"]), norm=np.array(series["norm"]),
        invariants=np.array(series["inv"]), min_rho=np.array(series["min_rho"]),
        min_T=np.array(series["min_T"]), max_sum=np.array(series["max_sum"]),
        records=records, f_final=f, clipped_mass=clipped,
    )


# -- Picard iteration of the mild form -------------------------------------------

@dataclass
class PicardResult:
    t: float
    d: np.ndarray
    norms: np.ndarray
    final: np.ndarray

    def ratios(self) -> np.ndarray:
        return self.d[1:] / self.d[:-1]


def picard_iterate(f0, t: float, params: RelaxationParams, grid: PhaseSpaceGrid,
                   K: int, S: int, threads: int = 1) -> PicardResult:
    """Successive approximations of the homogeneous mild form on S time nodes.

    f^(0) = 0 and M(f^(0)) = 0; each sweep sets
    f^(k+1)(t_j) = e^{-A t_j} f0 + A int_0^{t_j} e^{-A(t_j - s)} M(f^(k)(s)) ds
    with the time integral by the trapezoid rule.  ``d[k]`` is
    ||f^(k+1)(t) - f^(k)(t)||_q at the final node.
    """
    if not grid.homogeneous:
        raise ValidationError("picard_iterate needs a homogeneous grid (x_count = 1)")
    if K < 1 or S < 2:
        raise ValidationError("picard_iterate needs K >= 1 and S >= 2")
    A = params.A
    f0 = np.asarray(f0, dtype=float).reshape(grid.cell_shape)
    times = np.linspace(0.0, t, S)
    h = times[1] - times[0]
    decay = np.exp(-A * times)
    growth = np.exp(A * times)

    prev = np.zeros((S,) + grid.cell_shape)
    d = np.empty(K)
    norms = np.empty(K + 1)
    norms[0] = 0.0
    for k in range(K):
        if k == 0:
            src = np.zeros_like(prev)
        else:
            def gauss(j):
                m = compute_moments(prev[j][None], grid)
                return evaluate_gaussian(m, relaxation_fields(m, params), grid).values[0]
            src = np.stack(map_cells(gauss, S, threads))
        src *= growth[:, None, None, None, None]
        cum = np.zeros_like(src)
        for j in range(1, S):
            cum[j] = cum[j - 1] + 0.5 * h * (src[j - 1] + src[j])
        new = decay[:, None, None, None, None] * (f0[None] + A * cum)
        d[k] = weighted_sup_norm((new[-1] - prev[-1])[None], grid, params.q)
        norms[k + 1] = weighted_sup_norm(new[-1][None], grid, params.q)
        prev = new
    return PicardResult(t, d, norms, prev[-1].copy())
