"""Macroscopic fields of a distribution and the relaxation temperature/tensor."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonSPDTensor, VacuumCell
from .grid import PhaseSpaceGrid, cell_sum, integrate_internal
from .params import RelaxationParams

DENSITY_FLOOR = 1e-30


@dataclass(frozen=True)
class MacroFields:
    """Per-cell fields; scalars have shape (nx,), U (nx, 3), Theta (nx, 3, 3)."""

    rho: np.ndarray
    U: np.ndarray
    Theta: np.ndarray
    E_tr: np.ndarray
    E_int: np.ndarray
    T_tr: np.ndarray
    T_int: np.ndarray
    T_total: np.ndarray
    delta: float

    @property
    def momentum(self) -> np.ndarray:
        return self.rho[:, None] * self.U

    @property
    def energy(self) -> np.ndarray:
        """Total energy density int (|v|^2/2 + I^(2/delta)) f dv dI."""
        return 0.5 * self.rho * np.sum(self.U ** 2, axis=1) + self.E_tr + self.E_int

    def invariants(self) -> np.ndarray:
        """(nx, 5) moments against the collision invariants (1, v, |v|^2/2 + I^(2/delta))."""
        return np.column_stack([self.rho, self.momentum, self.energy])


@dataclass(frozen=True)
class GaussianParams:
    T_theta: np.ndarray
    tensor: np.ndarray
    chol: np.ndarray
    log_det: np.ndarray


def velocity_moments(g: np.ndarray, grid: PhaseSpaceGrid, floor: float = DENSITY_FLOOR):
    """rho, U, Theta of a velocity-only field g with shape (nx, nv, nv, nv)."""
    w = grid.w_v3[None]
    gw = g * w
    rho = cell_sum(gw)
    bad = np.flatnonzero(~(rho >= floor))
    if bad.size:
        raise VacuumCell(
            f"density {rho[bad[0]]:.3e} below floor {floor:.0e} in cell {bad[0]}",
            cell=int(bad[0]),
        )
    comps = grid.velocity_components()
    U = np.stack([cell_sum(gw * v[None]) for v in comps], axis=1) / rho[:, None]
    nx = g.shape[0]
    c = [comps[a][None] - U[:, a].reshape(nx, 1, 1, 1) for a in range(3)]
    Theta = np.empty((nx, 3, 3))
    for a in range(3):
        ca = gw * c[a]
        for b in range(a, 3):
            Theta[:, a, b] = Theta[:, b, a] = cell_sum(ca * c[b]) / rho
    return rho, U, Theta


def compute_moments(f: np.ndarray, grid: PhaseSpaceGrid, floor: float = DENSITY_FLOOR) -> MacroFields:
    f = np.asarray(f).reshape(grid.shape)
    delta = grid.delta
    g = integrate_internal(f, grid)
    rho, U, Theta = velocity_moments(g, grid, floor)
    E_int = cell_sum(integrate_internal(f, grid, power=1) * grid.w_v3[None])
    E_tr = 0.5 * rho * np.trace(Theta, axis1=1, axis2=2)
    T_tr = 2.0 * E_tr / (3.0 * rho)
    T_int = 2.0 * E_int / (delta * rho)
    T_total = 2.0 * (E_tr + E_int) / ((3.0 + delta) * rho)
    return MacroFields(rho, U, Theta, E_tr, E_int, T_tr, T_int, T_total, delta)


def relaxation_tensor(m: MacroFields, nu: float, theta: float) -> np.ndarray:
    eye = np.eye(3)[None]
    iso = (theta * m.T_total + (1.0 - theta) * (1.0 - nu) * m.T_tr)[:, None, None]
    return iso * eye + (1.0 - theta) * nu * m.Theta


def relaxation_fields(m: MacroFields, params: RelaxationParams) -> GaussianParams:
    theta = params.theta
    T_theta = theta * m.T_total + (1.0 - theta) * m.T_int
    tensor = relaxation_tensor(m, params.nu, theta)
    bad = np.flatnonzero(~(T_theta > 0))
    if bad.size:
        raise NonSPDTensor(f"relaxation temperature {T_theta[bad[0]]:.3e} in cell {bad[0]}", cell=int(bad[0]))
    chol = np.empty_like(tensor)
    for k in range(tensor.shape[0]):
        try:
            chol[k] = np.linalg.cholesky(tensor[k])
        except np.linalg.LinAlgError:
            raise NonSPDTensor(f"relaxation tensor is not positive definite in cell {k}", cell=k) from None
    log_det = 2.0 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1)
    return GaussianParams(T_theta, tensor, chol, log_det)


def sym3_eigvalsh(a: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of symmetric 3x3 matrices, shape (..., 3, 3) -> (..., 3).

    Closed-form trigonometric solution; no iteration.
    """
    a = np.asarray(a, dtype=float)
    a00, a11, a22 = a[..., 0, 0], a[..., 1, 1], a[..., 2, 2]
    a01, a02, a12 = a[..., 0, 1], a[..., 0, 2], a[..., 1, 2]
    p1 = a01 ** 2 + a02 ** 2 + a12 ** 2
    q = (a00 + a11 + a22) / 3.0
    p2 = (a00 - q) ** 2 + (a11 - q) ** 2 + (a22 - q) ** 2 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    safe = np.where(p > 0, p, 1.0)
    b00, b11, b22 = (a00 - q) / safe, (a11 - q) / safe, (a22 - q) / safe
    b01, b02, b12 = a01 / safe, a02 / safe, a12 / safe
    det_b = (
        b00 * (b11 * b22 - b12 * b12)
        - b01 * (b01 * b22 - b12 * b02)
        + b02 * (b01 * b12 - b11 * b02)
    )
    phi = np.arccos(np.clip(0.5 * det_b, -1.0, 1.0)) / 3.0
    hi = q + 2.0 * p * np.cos(phi)
    lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    mid = 3.0 * q - hi - lo
    out = np.stack([lo, mid, hi], axis=-1)
    return np.where((p > 0)[..., None], out, q[..., None] * np.ones(3))
