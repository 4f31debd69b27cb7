"""Primal-dual duality-gap certificates.

The upper estimate is just the objective value at the current solution
point.  The lower estimate averages the first-order lower-bounding
hyperplanes collected at the gradient-query points, regularized by the
mirror map around the starting point:

    L_k = [ sum_i a_i f(x_i)
            + min_u { sum_i a_i <g_i, u - x_i> + D_psi(u, xhat0) }
            - penalty ] / A_k

where the inner minimizer is u* = grad psi*(grad psi(xhat0) - sum_i a_i g_i)
and the penalty removes the regularizer's bias: D_psi(x*, xhat0) when a
reference optimum is available ("oracle-optimum" mode), or any upper bound
R >= D_psi(x*, xhat0) ("radius-bound" mode).  Either way L_k <= f(x*).

The per-step change E_k = A_k G_k - A_{k-1} G_{k-1} of the scaled gap is
the discretization error of the method; for AXGD under a valid smooth
schedule it is nonpositive, which is what makes the certificate shrink.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .prox import ProxSetup, bregman, bregman_conjugate
from .solvers import SolverState


@dataclass(frozen=True)
class GapMode:
    """How the regularization penalty of the lower bound is discharged."""

    kind: str  # "oracle-optimum" | "radius-bound"
    x_star: Optional[np.ndarray] = None
    radius: Optional[float] = None


def oracle_optimum_mode(x_star: np.ndarray) -> GapMode:
    return GapMode(kind="oracle-optimum", x_star=np.asarray(x_star, dtype=float))


def radius_bound_mode(radius: float) -> GapMode:
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    return GapMode(kind="radius-bound", radius=float(radius))


@dataclass
class GapAccumulator:
    """Running sums behind the regularized lower bound.

    update() feeds one hyperplane (weight a, anchor point x, gradient g,
    exact value f(x)); the gradient must be the one the solver actually
    used, so that z_anchor - grad_sum reconstructs the solver's dual state.
    """

    setup: ProxSetup
    anchor: np.ndarray
    z_anchor: np.ndarray = field(init=False)
    A: float = field(init=False, default=0.0)
    count: int = field(init=False, default=0)
    sum_af: float = field(init=False, default=0.0)
    sum_a_gx: float = field(init=False, default=0.0)
    grad_sum: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.anchor = np.asarray(self.anchor, dtype=float)
        self.z_anchor = self.setup.grad_psi(self.anchor)
        self.grad_sum = np.zeros_like(self.anchor)

    def update(self, a: float, x: np.ndarray, gradient: np.ndarray, f_x: float) -> "GapAccumulator":
        if a <= 0:
            raise ValueError(f"hyperplane weight must be positive, got {a}")
        self.A += a
        self.count += 1
        self.sum_af += a * f_x
        self.sum_a_gx += a * float(gradient @ x)
        self.grad_sum = self.grad_sum + a * gradient
        return self

    def regularized_minimizer(self) -> np.ndarray:
        """u* = grad psi*(z_anchor - grad_sum), the minimizer of the
        regularized hyperplane average."""
        return self.setup.grad_psi_star(self.z_anchor - self.grad_sum)

    def penalty(self, mode: GapMode) -> float:
        if mode.kind == "oracle-optimum":
            if mode.x_star is None:
                raise ValueError("oracle-optimum mode needs x_star")
            return bregman(self.setup, mode.x_star, self.anchor)
        if mode.kind == "radius-bound":
            if mode.radius is None:
                raise ValueError("radius-bound mode needs a radius")
            return mode.radius
        raise ValueError(f"unknown gap mode {mode.kind!r}")

    def lower_bound(self, mode: GapMode) -> float:
        """L_k <= f(x*).  Needs at least one update."""
        if self.count == 0:
            raise ValueError("lower_bound needs at least one update")
        u = self.regularized_minimizer()
        min_term = float(self.grad_sum @ u) - self.sum_a_gx + bregman(self.setup, u, self.anchor)
        return (self.sum_af + min_term - self.penalty(mode)) / self.A

    def gap(self, mode: GapMode, f_value: float) -> float:
        """G_k = U_k - L_k."""
        return upper_bound(f_value) - self.lower_bound(mode)


def upper_bound(f_value: float) -> float:
    """U_k is the exact objective value at the current solution point."""
    return float(f_value)


def discretization_error(A_prev: float, G_prev: float, A_new: float, G_new: float) -> float:
    """E_k = A_k G_k - A_{k-1} G_{k-1}."""
    return A_new * G_new - A_prev * G_prev


def check_invariance(series: Sequence[tuple[float, float]], tol: float = 1e-9) -> bool:
    """True when the scaled gap A_k G_k never increases along the series of
    (A_k, G_k) pairs, up to tol relative to the current level."""
    prev = None
    for A, G in series:
        cur = A * G
        if prev is not None and cur > prev + tol * max(1.0, abs(prev)):
            return False
        prev = cur
    return True


def flow_scaled_gap(
    trajectory,
    setup: ProxSetup,
    mode: GapMode,
    f_star: float,
    alpha=lambda t: t * t,
) -> np.ndarray:
    """alpha(t) * (U(t) - L(t)) along an integrated continuous-flow
    trajectory.

    The exact flow keeps this quantity constant at
    alpha(t0)(f(x0) - f*) + D_psi(x*, x0); a forward-Euler trajectory
    drifts above that level by O(dt), which is the integrator's
    discretization error.  The lower bound here is the continuous-time
    analogue of GapAccumulator's, built from the trajectory's running
    integrals, with the optimal value mixed in with weight alpha(t0).
    """
    x0 = trajectory.x[0]
    z_anchor = setup.grad_psi(x0)
    a0 = float(alpha(trajectory.t[0]))
    pen = GapAccumulator(setup, x0).penalty(mode)
    out = np.empty(trajectory.t.size)
    for i in range(trajectory.t.size):
        u = setup.grad_psi_star(z_anchor - trajectory.grad_integral[i])
        min_term = (
            float(trajectory.grad_integral[i] @ u)
            - trajectory.grad_x_integral[i]
            + bregman(setup, u, x0)
        )
        scaled_lower = trajectory.f_integral[i] + min_term + a0 * f_star - pen
        out[i] = float(alpha(trajectory.t[i])) * trajectory.f[i] - scaled_lower
    return out


def axgd_error_bound(
    setup: ProxSetup, prev: SolverState, new: SolverState
) -> float:
    """Upper bound on the AXGD discretization error E_k in terms of the
    step's own intermediates:

        a <g(x_new) - g(xhat), grad psi*(zhat) - grad psi*(z_new)>
        - D_psi*(zhat, z_new) - D_psi*(z_prev, zhat).

    Requires the AXGD fields (z_hat and both gradients) on the new state.
    """
    if new.z_hat is None or new.grad_hat is None or new.grad_new is None:
        raise ValueError("error bound needs an AXGD-style state with z_hat and gradients")
    a = new.step_weight
    du = setup.grad_psi_star(new.z_hat) - setup.grad_psi_star(new.z)
    inner = a * float((new.grad_new - new.grad_hat) @ du)
    return (
        inner
        - bregman_conjugate(setup, new.z_hat, new.z)
        - bregman_conjugate(setup, prev.z, new.z_hat)
    )
