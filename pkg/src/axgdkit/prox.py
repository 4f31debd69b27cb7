"""Prox setups: mirror maps, their conjugates, and Bregman divergences.

A setup fixes a sigma-strongly convex distance-generating function psi over
a domain, together with the norm it is strongly convex against:

* Euclidean: psi(x) = sigma ||x||^2 / 2 over R^n or a box, l2 norm.
* Entropy:   psi(x) = sigma sum_i x_i ln x_i over the simplex, l1 norm.

grad psi* maps a dual vector to the maximizer of <z, x> - psi(x) over the
domain, which is the prox/mirror step both solvers rely on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .oracles import NumericError


@dataclass(frozen=True)
class Domain:
    kind: str  # "unconstrained" | "box" | "simplex"
    lower: Optional[float] = None
    upper: Optional[float] = None


def unconstrained_domain() -> Domain:
    return Domain("unconstrained")


def box_domain(lower: float, upper: float) -> Domain:
    if not lower < upper:
        raise ValueError(f"box needs lower < upper, got [{lower}, {upper}]")
    return Domain("box", float(lower), float(upper))


def simplex_domain() -> Domain:
    return Domain("simplex")


@dataclass(frozen=True)
class ProxSetup:
    """Mirror map psi, conjugate psi*, and their gradients for one geometry."""

    kind: str  # "euclidean" | "entropy"
    sigma: float
    domain: Domain

    def psi(self, x: np.ndarray) -> float:
        if self.kind == "euclidean":
            return 0.5 * self.sigma * float(x @ x)
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise NumericError("entropy mirror map needs x >= 0")
        return self.sigma * float(np.sum(np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)))

    def grad_psi(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "euclidean":
            return self.sigma * np.asarray(x, dtype=float)
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise NumericError("entropy grad psi needs strictly positive x")
        return self.sigma * (np.log(x) + 1.0)

    def grad_psi_star(self, z: np.ndarray) -> np.ndarray:
        """argmax over the domain of <z, x> - psi(x)."""
        z = np.asarray(z, dtype=float)
        if self.kind == "euclidean":
            u = z / self.sigma
            if self.domain.kind == "box":
                return np.clip(u, self.domain.lower, self.domain.upper)
            return u
        # entropy over the simplex: softmax with max subtraction
        w = z / self.sigma
        w = w - w.max()
        e = np.exp(w)
        return e / e.sum()

    def psi_star(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        if self.kind == "euclidean":
            u = self.grad_psi_star(z)
            return float(z @ u) - self.psi(u)
        w = z / self.sigma
        m = float(w.max())
        return self.sigma * (m + float(np.log(np.sum(np.exp(w - m)))))

    def norm(self, v: np.ndarray) -> float:
        """Primal norm psi is strongly convex against (l2 or l1)."""
        if self.kind == "euclidean":
            return float(np.linalg.norm(v))
        return float(np.sum(np.abs(v)))

    def dual_norm(self, v: np.ndarray) -> float:
        if self.kind == "euclidean":
            return float(np.linalg.norm(v))
        return float(np.max(np.abs(v)))


def euclidean_setup(sigma: float = 1.0, domain: Optional[Domain] = None) -> ProxSetup:
    """Euclidean prox setup over R^n or a box."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if domain is None:
        domain = unconstrained_domain()
    if domain.kind == "simplex":
        raise ValueError("no closed-form Euclidean prox over the simplex; "
                         "use entropy_simplex_setup")
    return ProxSetup(kind="euclidean", sigma=float(sigma), domain=domain)


def entropy_simplex_setup(sigma: float = 1.0) -> ProxSetup:
    """Entropy prox setup over the probability simplex."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return ProxSetup(kind="entropy", sigma=float(sigma), domain=simplex_domain())


def bregman(setup: ProxSetup, x: np.ndarray, y: np.ndarray) -> float:
    """D_psi(x, y) = psi(x) - psi(y) - <grad psi(y), x - y>.

    For the entropy setup this is the (generalized) KL divergence
    sigma * sum_i x_i ln(x_i / y_i); x may touch the boundary (0 ln 0 = 0),
    y must be interior.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if setup.kind == "euclidean":
        d = x - y
        return 0.5 * setup.sigma * float(d @ d)
    if np.any(y <= 0):
        raise NumericError("entropy Bregman divergence needs interior y")
    if np.any(x < 0):
        raise NumericError("entropy Bregman divergence needs x >= 0")
    kl = float(np.sum(np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0) / y), 0.0)))
    return setup.sigma * (kl - float(x.sum()) + float(y.sum()))


def bregman_conjugate(setup: ProxSetup, z: np.ndarray, w: np.ndarray) -> float:
    """D_psi*(z, w) = psi*(z) - psi*(w) - <grad psi*(w), z - w>."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    return setup.psi_star(z) - setup.psi_star(w) - float(setup.grad_psi_star(w) @ (z - w))


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort + threshold)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    cond = u - css / ind > 0
    rho = int(ind[cond][-1])
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def project_l2(domain: Domain, v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the domain."""
    if domain.kind == "unconstrained":
        return np.asarray(v, dtype=float)
    if domain.kind == "box":
        return np.clip(v, domain.lower, domain.upper)
    return project_simplex(v)
