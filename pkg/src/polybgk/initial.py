"""Initial-data presets."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, gammaincc

from .errors import CutoffTooSmall, NegativeInput, ValidationError
from .fieldio import read_field
from .grid import PhaseSpaceGrid
from .params import lambda_delta

PRESETS = ("equilibrium", "two_temperature", "spatial_wave", "file")


@dataclass(frozen=True)
class InitSpec:
    preset: str = "equilibrium"
    rho: float = 1.0
    U: tuple[float, float, float] = (0.0, 0.0, 0.0)
    T: float = 1.0
    T_tr: float = 2.0
    T_int: float = 1.0
    amplitude: float = 0.1
    mode: int = 1
    path: str | None = None
    tail_tolerance: float = 1e-10

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValidationError(f"unknown init preset {self.preset!r}; choose from {PRESETS}")
        if self.preset == "file":
            if not self.path:
                raise ValidationError("preset 'file' needs a path")
            return
        if not self.rho > 0:
            raise ValidationError("rho must be positive")
        if min(self.T, self.T_tr, self.T_int) <= 0:
            raise ValidationError("temperatures must be positive")
        if self.preset == "spatial_wave" and not 0 <= self.amplitude < 1:
            raise ValidationError("spatial_wave amplitude must lie in [0, 1)")

    def temperatures(self) -> tuple[float, float]:
        """(translational, internal) temperature of the preset's profile."""
        if self.preset == "two_temperature":
            return self.T_tr, self.T_int
        return self.T, self.T

    def extent(self) -> tuple[float, float]:
        """(max |U component|, max temperature); used for default cutoffs."""
        return max(abs(u) for u in self.U), max(self.temperatures())


def product_gaussian(grid: PhaseSpaceGrid, rho, U, T_tr, T_int) -> np.ndarray:
    """rho Lam (2 pi T_tr)^(-3/2) T_int^(-delta/2) exp(-|v-U|^2/(2 T_tr) - u/T_int) on one cell."""
    delta = grid.delta
    v1, v2, v3 = grid.velocity_components()
    r2 = (v1 - U[0]) ** 2 + (v2 - U[1]) ** 2 + (v3 - U[2]) ** 2
    log_pre = (
        math.log(rho) + math.log(lambda_delta(delta))
        - 1.5 * math.log(2.0 * math.pi * T_tr) - 0.5 * delta * math.log(T_int)
    )
    expo = log_pre - r2[None] / (2.0 * T_tr) - grid.i_energy[:, None, None, None] / T_int
    return np.exp(expo)


def tail_fraction(grid: PhaseSpaceGrid, U, T_tr, T_int) -> float:
    """Mass fraction of the product Gaussian lying outside the truncated grid."""
    s = math.sqrt(2.0 * T_tr)
    outside = [
        0.5 * (erfc((grid.v_max - u) / s) + erfc((grid.v_max + u) / s)) for u in U
    ]
    u_max = grid.i_max ** (2.0 / grid.delta)
    outside.append(gammaincc(0.5 * grid.delta, u_max / T_int))
    return float(-math.expm1(sum(math.log1p(-o) for o in outside)))


def init_distribution(spec: InitSpec, grid: PhaseSpaceGrid) -> np.ndarray:
    if spec.preset == "file":
        f, header = read_field(spec.path)
        expected = (grid.x_count, grid.v_count, grid.i_count)
        got = (header["x_count"], header["v_count"], header["i_count"])
        if got != expected:
            raise ValidationError(f"field file counts {got} do not match grid {expected}")
        if np.any(f < 0):
            raise NegativeInput(f"field file {spec.path} contains negative values")
        return f

    T_tr, T_int = spec.temperatures()
    tail = tail_fraction(grid, spec.U, T_tr, T_int)
    if tail > spec.tail_tolerance:
        raise CutoffTooSmall(
            f"{tail:.3e} of the initial mass lies outside the grid "
            f"(tolerance {spec.tail_tolerance:.1e}); enlarge v_max or i_max"
        )
    cell = product_gaussian(grid, spec.rho, spec.U, T_tr, T_int)
    f = np.empty(grid.shape)
    if spec.preset == "spatial_wave":
        k = 2.0 * math.pi * spec.mode / grid.x_length
        profile = 1.0 + spec.amplitude * np.sin(k * grid.x_nodes)
        f[:] = profile[:, None, None, None, None] * cell[None]
    else:
        f[:] = cell[None]
    return f
