"""Step-size schedules for the accelerated solvers.

A schedule supplies the positive weights a_k (k >= 1); the running sum
A_k = a_1 + ... + a_k is always accumulated literally by the solver loop,
never taken from a closed form.

* smooth:    a_k = (k+1)/2 * sigma/L, for L-smooth objectives.  Satisfies
             a_k^2 / A_k <= sigma/L for every k (equality at k = 1).
* hoelder:   a_k = c * (sigma/L_nu) * D^(1-nu) * k^((3 nu - 1)/2), for
             nu-Hoelder gradients on a domain of diameter D.  The default
             constant c = 2^-((3 nu (nu+1) + 1)/2) keeps
             c^2 * 2^(3 nu (nu+1)) <= 1/2, which is what the descent
             argument actually needs; pass c_override to experiment with
             other constants.
* lipschitz: a_k = sqrt(sigma) / (2 sqrt(2) L) * sqrt(R / k), for
             L-Lipschitz objectives with R >= D_psi(x*, xhat0).  The rate
             guarantee assumes sigma >= L.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class StepSchedule:
    kind: str          # "smooth" | "hoelder" | "lipschitz"
    coefficient: float  # a_k = coefficient * k-dependent factor
    exponent: float     # a_k = coefficient * k^exponent for hoelder/lipschitz

    def weight(self, k: int) -> float:
        """The step weight a_k, defined for k >= 1."""
        if k < 1:
            raise ValueError(f"step weights start at k = 1, got {k}")
        if self.kind == "smooth":
            return self.coefficient * (k + 1) / 2.0
        return self.coefficient * float(k) ** self.exponent

    def weights(self, k_max: int) -> np.ndarray:
        """Vector of a_1 .. a_{k_max}."""
        k = np.arange(1, k_max + 1, dtype=float)
        if self.kind == "smooth":
            return self.coefficient * (k + 1) / 2.0
        return self.coefficient * k ** self.exponent


def smooth_schedule(sigma: float, L: float) -> StepSchedule:
    if sigma <= 0 or L <= 0:
        raise ValueError(f"sigma and L must be positive, got {sigma}, {L}")
    return StepSchedule(kind="smooth", coefficient=sigma / L, exponent=1.0)


def default_hoelder_constant(nu: float) -> float:
    """c = 2^-((3 nu (nu+1) + 1)/2), the largest dyadic constant with
    c^2 * 2^(3 nu (nu+1)) <= 1/2."""
    return float(2.0 ** (-(3.0 * nu * (nu + 1.0) + 1.0) / 2.0))


def hoelder_schedule(
    sigma: float,
    L_nu: float,
    nu: float,
    diameter: float,
    c_override: Union[float, None] = None,
) -> StepSchedule:
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must be in (0, 1], got {nu}")
    if sigma <= 0 or L_nu <= 0 or diameter <= 0:
        raise ValueError("sigma, L_nu and diameter must be positive")
    c = default_hoelder_constant(nu) if c_override is None else float(c_override)
    if c <= 0:
        raise ValueError(f"schedule constant must be positive, got {c}")
    coeff = c * (sigma / L_nu) * diameter ** (1.0 - nu)
    return StepSchedule(kind="hoelder", coefficient=coeff, exponent=(3.0 * nu - 1.0) / 2.0)


def lipschitz_schedule(sigma: float, L_lip: float, radius: float) -> StepSchedule:
    """Schedule for L-Lipschitz objectives; radius must dominate
    D_psi(x*, xhat0)."""
    if sigma <= 0 or L_lip <= 0 or radius <= 0:
        raise ValueError("sigma, L_lip and radius must be positive")
    coeff = np.sqrt(sigma) / (2.0 * np.sqrt(2.0) * L_lip) * np.sqrt(radius)
    return StepSchedule(kind="lipschitz", coefficient=float(coeff), exponent=-0.5)


def validate_smooth_condition(
    weights: Union[StepSchedule, np.ndarray],
    sigma: float,
    L: float,
    k_max: int = 0,
    tol: float = 1e-12,
) -> bool:
    """Check a_k^2 / A_k <= sigma/L + tol for all k, with A_k the literal
    running sum.  Accepts a schedule (then k_max is required) or a
    precomputed weight vector a_1..a_K."""
    if isinstance(weights, StepSchedule):
        if k_max < 1:
            raise ValueError("k_max >= 1 required when passing a schedule")
        a = weights.weights(k_max)
    else:
        a = np.asarray(weights, dtype=float)
    if np.any(a <= 0):
        return False
    A = np.cumsum(a)
    return bool(np.all(a * a <= (sigma / L + tol) * A))
