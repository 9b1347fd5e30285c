"""Discrete phase space: periodic x, truncated velocity cube, truncated internal energy.

Storage order for every distribution array is ``(x, I, v1, v2, v3)`` with the
velocity axes innermost, so one spatial cell is a contiguous ``(ni, nv, nv, nv)``
block.

Reductions over phase space go through :func:`cell_sum`, which reduces a
contiguous axis with numpy's pairwise summation.  The order of additions depends
only on the array shape, so serial and threaded runs agree bitwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from .errors import InvalidGrid

I_KINDS = ("midpoint", "mapped")


@dataclass(frozen=True)
class GridConfig:
    x_count: int = 1
    x_length: float = 1.0
    v_count: int = 32
    v_max: float = 8.0
    i_count: int = 32
    i_max: float = 30.0
    # "mapped" uses Gauss-Jacobi nodes in u = I**(2/delta)
    i_kind: str = "mapped"


@dataclass(frozen=True, eq=False)
class PhaseSpaceGrid:
    x_count: int
    x_length: float
    v_count: int
    v_max: float
    i_count: int
    i_max: float
    delta: float
    i_kind: str
    x_nodes: np.ndarray
    x_weights: np.ndarray
    v_nodes: np.ndarray
    v_weights: np.ndarray
    i_nodes: np.ndarray
    i_weights: np.ndarray
    # derived tables, filled in __post_init__
    i_energy: np.ndarray = field(init=False)
    v_sq: np.ndarray = field(init=False)
    w_v3: np.ndarray = field(init=False)

    def __post_init__(self):
        v = self.v_nodes
        wv = self.v_weights
        set_ = object.__setattr__
        set_(self, "i_energy", self.i_nodes ** (2.0 / self.delta))
        set_(self, "v_sq", v[:, None, None] ** 2 + v[None, :, None] ** 2 + v[None, None, :] ** 2)
        set_(self, "w_v3", wv[:, None, None] * wv[None, :, None] * wv[None, None, :])
        for arr in (self.i_energy, self.v_sq, self.w_v3, self.v_nodes, self.i_nodes):
            arr.setflags(write=False)

    @property
    def cell_shape(self) -> tuple[int, int, int, int]:
        n = self.v_count
        return (self.i_count, n, n, n)

    @property
    def shape(self) -> tuple[int, int, int, int, int]:
        return (self.x_count,) + self.cell_shape

    @property
    def homogeneous(self) -> bool:
        return self.x_count == 1

    @property
    def dx(self) -> float:
        return self.x_length / self.x_count

    def velocity_components(self):
        """Broadcastable (nv,1,1), (1,nv,1), (1,1,nv) velocity node arrays."""
        v = self.v_nodes
        return v[:, None, None], v[None, :, None], v[None, None, :]

    def norm_weight(self, q: float) -> np.ndarray:
        """(1 + |v|^2 + I^(2/delta))**(q/2) over one cell, shape (ni, nv, nv, nv)."""
        base = 1.0 + self.v_sq[None] + self.i_energy[:, None, None, None]
        return base ** (0.5 * q)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


def midpoint_rule(n: int, lo: float, hi: float):
    h = (hi - lo) / n
    nodes = lo + (np.arange(n) + 0.5) * h
    return nodes, np.full(n, h)


def mapped_internal_rule(n: int, i_max: float, delta: float):
    """Gauss-Jacobi rule on (0, i_max] in the variable u = I**(2/delta).

    int_0^{i_max} g(I) dI = (delta/2) int_0^{u_max} g(u**(delta/2)) u**(delta/2-1) du,
    and the algebraic factor is absorbed into the Jacobi weight, so profiles
    that are smooth in u (every Gaussian in this model) integrate spectrally.
    """
    beta = 0.5 * delta - 1.0
    u_max = i_max ** (2.0 / delta)
    x, w = roots_jacobi(n, 0.0, beta)
    u = 0.5 * u_max * (1.0 + x)
    weights = 0.5 * delta * (0.5 * u_max) ** (beta + 1.0) * w
    return u ** (0.5 * delta), weights


def build_grid(config: GridConfig, delta: float) -> PhaseSpaceGrid:
    if config.x_count < 1 or config.v_count < 2 or config.i_count < 1:
        raise InvalidGrid(
            f"counts must satisfy x_count>=1, v_count>=2, i_count>=1; got "
            f"{config.x_count}, {config.v_count}, {config.i_count}"
        )
    if not (config.v_max > 0 and config.i_max > 0 and config.x_length > 0):
        raise InvalidGrid("cutoffs and x_length must be positive")
    if not delta > 0:
        raise InvalidGrid(f"delta must be positive, got {delta}")
    if config.i_kind not in I_KINDS:
        raise InvalidGrid(f"i_kind must be one of {I_KINDS}, got {config.i_kind!r}")

    if config.x_count == 1:
        x_nodes, x_weights = np.zeros(1), np.ones(1)
    else:
        x_nodes, x_weights = midpoint_rule(config.x_count, 0.0, config.x_length)
    v_nodes, v_weights = midpoint_rule(config.v_count, -config.v_max, config.v_max)
    # exact symmetry of the node set
    v_nodes = 0.5 * (v_nodes - v_nodes[::-1])
    if config.i_kind == "midpoint":
        i_nodes, i_weights = midpoint_rule(config.i_count, 0.0, config.i_max)
    else:
        i_nodes, i_weights = mapped_internal_rule(config.i_count, config.i_max, delta)

    return PhaseSpaceGrid(
        x_count=config.x_count, x_length=config.x_length,
        v_count=config.v_count, v_max=config.v_max,
        i_count=config.i_count, i_max=config.i_max,
        delta=delta, i_kind=config.i_kind,
        x_nodes=x_nodes, x_weights=x_weights,
        v_nodes=v_nodes, v_weights=v_weights,
        i_nodes=i_nodes, i_weights=i_weights,
    )


def default_cutoffs(u_max: float, t_max: float, delta: float, tol: float = 1e-12):
    """(v_max, i_max) with v_max = u_max + 8 sqrt(t_max) and exp(-i_max^(2/delta)/t_max) = tol."""
    v_max = u_max + 8.0 * math.sqrt(t_max)
    i_max = (t_max * -math.log(tol)) ** (0.5 * delta)
    return v_max, i_max


def cell_sum(values: np.ndarray) -> np.ndarray:
    """Sum each spatial cell of an (nx, ...) array; returns shape (nx,)."""
    nx = values.shape[0]
    return np.ascontiguousarray(values).reshape(nx, -1).sum(axis=1)


def integrate_internal(f: np.ndarray, grid: PhaseSpaceGrid, power: int = 0) -> np.ndarray:
    """Sum over the I axis with weights w_I * u**power; (..., ni, nv,nv,nv) -> (..., nv,nv,nv)."""
    w = grid.i_weights * grid.i_energy ** power if power else grid.i_weights
    return np.einsum("i,...ijkl->...jkl", w, f)


def weighted_sup_norm(f: np.ndarray, grid: PhaseSpaceGrid, q: float) -> float:
    """max over the grid of f * (1 + |v|^2 + I^(2/delta))**(q/2)."""
    return float(cell_weighted_sup_norm(f, grid, q).max())


def cell_weighted_sup_norm(f: np.ndarray, grid: PhaseSpaceGrid, q: float) -> np.ndarray:
    f = np.asarray(f).reshape(grid.shape)
    w = grid.norm_weight(q)
    return np.abs(f * w[None]).reshape(grid.x_count, -1).max(axis=1)
