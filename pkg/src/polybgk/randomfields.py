"""Randomized smooth nonnegative fields for property checks.

Each field is a sum of 1 to 4 bumps.  A bump is a rotated anisotropic
Gaussian in v times a gamma-type profile (u/tau)**p exp(-u/tau) in the internal
energy u = I**(2/delta).  tau is scaled so that the bump's internal
temperature lies in the ``tau`` range for every p and delta.  Centres and
widths are kept well inside the cutoffs so every moment is resolved.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .grid import PhaseSpaceGrid


@dataclass(frozen=True)
class BumpRanges:
    center: float = 1.2
    sigma: tuple[float, float] = (0.6, 1.2)
    tau: tuple[float, float] = (0.5, 1.5)
    max_power: int = 1
    weight: tuple[float, float] = (0.2, 1.0)
    max_bumps: int = 4


def random_bump_field(grid: PhaseSpaceGrid, rng: np.random.Generator,
                      ranges: BumpRanges = BumpRanges()) -> np.ndarray:
    """One homogeneous cell, shape (1, ni, nv, nv, nv)."""
    v1, v2, v3 = grid.velocity_components()
    u = grid.i_energy
    out = np.zeros(grid.cell_shape)
    for _ in range(int(rng.integers(1, ranges.max_bumps + 1))):
        c = rng.uniform(-ranges.center, ranges.center, 3)
        sig = rng.uniform(*ranges.sigma, 3)
        R = Rotation.random(random_state=rng).as_matrix()
        # precision matrix R diag(1/sig^2) R^T
        P = (R / sig ** 2) @ R.T
        d = (v1 - c[0], v2 - c[1], v3 - c[2])
        quad = sum(P[a, b] * d[a] * d[b] for a in range(3) for b in range(3))
        p = int(rng.integers(0, ranges.max_power + 1))
        # internal temperature of one bump is tau (1 + 2p/delta)
        tau = rng.uniform(*ranges.tau) * grid.delta / (grid.delta + 2.0 * p)
        prof = (u / tau) ** p * np.exp(-u / tau)
        w = rng.uniform(*ranges.weight)
        out += w * prof[:, None, None, None] * np.exp(-0.5 * quad)[None]
    return out[None]
