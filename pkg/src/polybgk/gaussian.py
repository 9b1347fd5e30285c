"""The polyatomic Gaussian attractor, its discrete conservation defect, and a
moment-matching correction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CorrectionDiverged
from .grid import PhaseSpaceGrid, integrate_internal
from .moments import GaussianParams, MacroFields
from .parallel import map_cells
from .params import lambda_delta

UNDERFLOW_EXPONENT = -708.0


@dataclass(frozen=True)
class GaussianField:
    values: np.ndarray
    params: GaussianParams
    rho: np.ndarray
    U: np.ndarray
    # (nx, 5) coefficients (a, b1, b2, b3, c) of the conservative tilt, if applied
    tilt: np.ndarray | None = None


def quadratic_form(L: np.ndarray, U: np.ndarray, grid: PhaseSpaceGrid) -> np.ndarray:
    """(v-U)^T (L L^T)^{-1} (v-U) on the velocity nodes by forward substitution."""
    v1, v2, v3 = grid.velocity_components()
    y0 = (v1 - U[0]) / L[0, 0]
    y1 = (v2 - U[1] - L[1, 0] * y0) / L[1, 1]
    y2 = (v3 - U[2] - L[2, 0] * y0 - L[2, 1] * y1) / L[2, 2]
    return y0 ** 2 + y1 ** 2 + y2 ** 2


def gaussian_exponent(L: np.ndarray, U: np.ndarray, T_theta: float, grid: PhaseSpaceGrid) -> np.ndarray:
    """-(1/2)(v-U)^T T^{-1} (v-U) - u/T_theta for one cell, shape (ni, nv, nv, nv)."""
    quad = quadratic_form(L, U, grid)
    return -0.5 * quad[None] - (grid.i_energy / T_theta)[:, None, None, None]


def evaluate_gaussian(m: MacroFields, gp: GaussianParams, grid: PhaseSpaceGrid,
                      threads: int = 1) -> GaussianField:
    delta = grid.delta
    log_lam = math.log(lambda_delta(delta))

    def cell(k):
        expo = gaussian_exponent(gp.chol[k], m.U[k], gp.T_theta[k], grid)
        log_pre = (
            math.log(m.rho[k]) + log_lam - 1.5 * math.log(2.0 * math.pi)
            - 0.5 * gp.log_det[k] - 0.5 * delta * math.log(gp.T_theta[k])
        )
        out = math.exp(log_pre) * np.exp(expo)
        out[expo < UNDERFLOW_EXPONENT] = 0.0
        return out

    values = np.stack(map_cells(cell, grid.x_count, threads))
    return GaussianField(values, gp, m.rho, m.U)


def invariant_moments(field: np.ndarray, grid: PhaseSpaceGrid) -> np.ndarray:
    """(nx, 5) discrete moments against (1, v, |v|^2/2 + I^(2/delta))."""
    field = np.asarray(field).reshape(grid.shape)
    w = grid.w_v3[None]
    m0 = integrate_internal(field, grid) * w
    m1 = integrate_internal(field, grid, power=1) * w
    nx = grid.x_count
    out = np.empty((nx, 5))
    out[:, 0] = m0.reshape(nx, -1).sum(axis=1)
    for a, v in enumerate(grid.velocity_components()):
        out[:, 1 + a] = (m0 * v[None]).reshape(nx, -1).sum(axis=1)
    out[:, 4] = (0.5 * grid.v_sq[None] * m0 + m1).reshape(nx, -1).sum(axis=1)
    return out


@dataclass(frozen=True)
class Defect:
    """Moments of (M - f); ``relative`` divides by rho, sqrt(2 rho E), E."""

    absolute: np.ndarray
    relative: np.ndarray

    def max_relative(self) -> np.ndarray:
        """(mass, momentum, energy) worst relative defect over cells."""
        r = np.abs(self.relative)
        return np.array([r[:, 0].max(), r[:, 1:4].max(), r[:, 4].max()])


def defect_scales(inv: np.ndarray) -> np.ndarray:
    rho, energy = inv[:, 0], inv[:, 4]
    mom = np.sqrt(2.0 * rho * energy)
    return np.column_stack([rho, mom, mom, mom, energy])


def conservation_defect(f: np.ndarray, M, grid: PhaseSpaceGrid) -> Defect:
    values = M.values if isinstance(M, GaussianField) else M
    inv_f = invariant_moments(f, grid)
    absolute = invariant_moments(values, grid) - inv_f
    return Defect(absolute, absolute / defect_scales(inv_f))


def _tilt_newton(F, U, s, target, grid, tol, max_iter):
    """Solve for lambda so that F*exp(lambda . psi) has the target psi-moments.

    psi = (1, (v-U)/s, (|v-U|^2/2 + u)/s^2) spans the collision invariants and
    keeps the 5x5 system well scaled.  ``F`` is one cell of the field.
    """
    w_i = grid.i_weights
    u = grid.i_energy
    wv = grid.w_v3
    c = [v - U[a] for a, v in enumerate(grid.velocity_components())]
    c = [np.broadcast_to(x, wv.shape) for x in c]
    e_v = 0.5 * (c[0] ** 2 + c[1] ** 2 + c[2] ** 2)
    cs = [x / s for x in c]
    es = e_v / s ** 2
    us = u / s ** 2
    scale = target[0]

    def moments(lam, jac):
        tilt_v = lam[0] + lam[1] * cs[0] + lam[2] * cs[1] + lam[3] * cs[2] + lam[4] * es
        tilt_i = lam[4] * us
        Mt = F * np.exp(tilt_v[None] + tilt_i[:, None, None, None])
        m0 = np.einsum("i,ijkl->jkl", w_i, Mt) * wv
        m1 = np.einsum("i,ijkl->jkl", w_i * us, Mt) * wv
        e_m = es * m0 + m1
        G = np.array([m0.sum(), (cs[0] * m0).sum(), (cs[1] * m0).sum(), (cs[2] * m0).sum(), e_m.sum()])
        if not jac:
            return Mt, G, None
        m2 = np.einsum("i,ijkl->jkl", w_i * us * us, Mt) * wv
        J = np.empty((5, 5))
        J[0, :] = G
        for a in range(3):
            ca_m = cs[a] * m0
            for b in range(a, 3):
                J[1 + a, 1 + b] = J[1 + b, 1 + a] = (cs[b] * ca_m).sum()
            J[1 + a, 4] = (cs[a] * e_m).sum()
        J[4, 4] = (es * es * m0 + 2.0 * es * m1 + m2).sum()
        J = np.triu(J) + np.triu(J, 1).T
        return Mt, G, J

    lam = np.zeros(5)
    Mt, G, J = moments(lam, True)
    res = np.max(np.abs(G - target)) / scale
    for _ in range(max_iter):
        if res <= 1e-15:
            break
        step = np.linalg.solve(J, target - G)
        alpha = 1.0
        for _ in range(30):
            trial = lam + alpha * step
            # overflowing trial steps give non-finite residuals and are rejected
            with np.errstate(over="ignore", invalid="ignore"):
                Mt_t, G_t, J_t = moments(trial, True)
                res_t = np.max(np.abs(G_t - target)) / scale
            if res_t < res:
                break
            alpha *= 0.5
        else:
            break
        stalled = res_t > 0.5 * res
        lam, Mt, G, J, res = trial, Mt_t, G_t, J_t, res_t
        if stalled and res <= tol:
            break
    if not res <= tol:
        raise CorrectionDiverged(
            f"moment correction residual {res:.3e} exceeds {tol:.0e} after {max_iter} iterations"
        )
    return Mt, lam


def conservative_correction(M: GaussianField, target: MacroFields, grid: PhaseSpaceGrid,
                            tol: float = 1e-12, max_iter: int = 50,
                            threads: int = 1) -> GaussianField:
    """Multiply M by exp(a + b.v + c(|v|^2/2 + u)) so its discrete invariants equal ``target``'s."""
    def cell(k):
        U = target.U[k]
        s = math.sqrt(target.T_total[k])
        goal = np.array([target.rho[k], 0.0, 0.0, 0.0, (target.E_tr[k] + target.E_int[k]) / s ** 2])
        Mt, lam = _tilt_newton(M.values[k], U, s, goal, grid, tol, max_iter)
        c = lam[4] / s ** 2
        b = lam[1:4] / s - c * U
        a = lam[0] - lam[1:4] @ U / s + 0.5 * c * (U @ U)
        return Mt, np.concatenate([[a], b, [c]])

    out = map_cells(cell, grid.x_count, threads)
    values = np.stack([o[0] for o in out])
    tilt = np.stack([o[1] for o in out])
    return GaussianField(values, M.params, M.rho, M.U, tilt)
