"""Model parameters and the closed-form constants of the a priori estimates.

All functions here are pure and operate on Python floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .errors import DegenerateFrequency, ThetaZero, ValidationError

FREQUENCY_FLOOR = 1e-12


def collision_frequency(nu: float, theta: float) -> float:
    """Return A = 1 / (1 - nu + nu*theta)."""
    denom = 1.0 - nu + nu * theta
    if denom <= FREQUENCY_FLOOR:
        raise DegenerateFrequency(
            f"1 - nu + nu*theta = {denom:.3g} is not usable (nu={nu}, theta={theta})"
        )
    return 1.0 / denom


def lambda_delta(delta: float) -> float:
    """Normalising factor of the internal-energy profile, 1 / Gamma(delta/2 + 1)."""
    if not delta > 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    return 1.0 / math.gamma(0.5 * delta + 1.0)


def lambda_delta_quadrature(delta: float) -> float:
    """Reciprocal of int_0^inf exp(-I**(2/delta)) dI by adaptive quadrature.

    Slow; used only to cross-check :func:`lambda_delta`.
    """
    # substitute I = s**delta so the integrand has no endpoint singularity
    val, _ = integrate.quad(
        lambda s: delta * s ** (delta - 1.0) * math.exp(-s * s) if s > 0 else 0.0,
        0.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=200,
    )
    return 1.0 / val


def c_nu(nu: float) -> float:
    return max(1.0 - nu, 1.0 + 2.0 * nu)


def sup_power_exp(p: float) -> float:
    """sup_{x >= 0} x**p * exp(-x), attained at x = p."""
    if p == 0:
        return 1.0
    return math.exp(p * math.log(p) - p)


def density_constant(delta: float) -> float:
    return 2.0 ** 3.5 * math.pi ** 2 * (3.0 + delta) ** ((1.0 + delta) / 2.0) * delta


def tail_constant(delta: float, q: float) -> float:
    if not q > 5.0 + delta:
        raise ValidationError(f"q must exceed 5+delta (q={q}, delta={delta})")
    return (
        2.0 ** ((q - 2.0 * delta - 1.0) / 2.0)
        * math.pi ** 2
        * (3.0 + delta) ** (q / 2.0)
        * delta
        / (q - delta - 5.0)
    )


def momentum_constant(delta: float, q: float) -> float:
    return (
        2.0 ** ((11.0 + 2.0 * delta + 2.0 * q) / 2.0)
        * math.pi ** 2
        * (3.0 + delta) ** (2.0 + delta)
        * delta
    )


def gaussian_constant(nu: float, delta: float, theta: float, q: float) -> float:
    """Bound on ||M(f)||_q / ||f||_q, divergent as theta -> 0."""
    if theta <= 0.0:
        raise ThetaZero("the Gaussian bound blows up at theta = 0")
    g = (2.0 * math.pi) ** -1.5
    sup = sup_power_exp(q / 2.0)
    c_t = tail_constant(delta, q)
    c0 = g * density_constant(delta)
    c1 = g * (c_t + 2.0 ** ((3.0 + delta) / 2.0) * momentum_constant(delta, q))
    c2 = g * sup * (2.0 * c_nu(nu) * (3.0 + delta * (1.0 - theta)) / 3.0) ** (q / 2.0)
    c4 = g * sup * ((delta + 3.0 * (1.0 - theta)) / delta) ** (q / 2.0)
    return (c0 + c1 + c2 * c_t + c4 * c_t) / theta ** ((3.0 + delta) / 2.0)


@dataclass(frozen=True)
class RelaxationParams:
    nu: float
    theta: float
    delta: float
    q: float

    def __post_init__(self):
        if not -0.5 < self.nu < 1.0:
            raise ValidationError(f"nu must lie in (-1/2, 1), got {self.nu}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValidationError(f"theta must lie in [0, 1], got {self.theta}")
        if not self.delta > 0.0:
            raise ValidationError(f"delta must be positive, got {self.delta}")
        if not self.q > 5.0 + self.delta:
            raise ValidationError(
                f"q must exceed 5+delta (q={self.q}, delta={self.delta})"
            )
        collision_frequency(self.nu, self.theta)

    @property
    def A(self) -> float:
        return collision_frequency(self.nu, self.theta)

    @property
    def lam(self) -> float:
        return lambda_delta(self.delta)


@dataclass(frozen=True)
class LemmaConstants:
    c_nu: float
    c_density: float
    c_tail: float
    c_momentum: float
    c_gaussian: float
    c_growth: float


def lemma_constants(params: RelaxationParams) -> LemmaConstants:
    """Evaluate every explicit constant for ``params``.

    Raises ThetaZero when ``params.theta == 0``.
    """
    cg = gaussian_constant(params.nu, params.delta, params.theta, params.q)
    return LemmaConstants(
        c_nu=c_nu(params.nu),
        c_density=density_constant(params.delta),
        c_tail=tail_constant(params.delta, params.q),
        c_momentum=momentum_constant(params.delta, params.q),
        c_gaussian=cg,
        c_growth=params.A * (cg - 1.0),
    )


def constants_listing(params: RelaxationParams) -> list[tuple[str, float]]:
    """Flat (name, value) listing printed by the ``constants`` subcommand."""
    lc = lemma_constants(params)
    return [
        ("nu", params.nu),
        ("theta", params.theta),
        ("delta", params.delta),
        ("q", params.q),
        ("A", params.A),
        ("Lambda_delta", params.lam),
        ("c_nu", lc.c_nu),
        ("c_density", lc.c_density),
        ("c_tail", lc.c_tail),
        ("c_momentum", lc.c_momentum),
        ("c_gaussian", lc.c_gaussian),
        ("c_growth", lc.c_growth),
    ]
