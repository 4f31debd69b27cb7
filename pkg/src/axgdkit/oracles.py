"""First-order objective oracles and benchmark problem instances.

An oracle bundles a value function and a (sub)gradient function together
with whatever regularity constants are known for it: a smoothness constant
L for quadratics, a Hoelder constant pair (nu, L_nu) for weakly smooth
objectives, or a Lipschitz constant for nonsmooth ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class NumericError(RuntimeError):
    """A numeric-domain failure: non-finite value or undefined operation."""


@dataclass(frozen=True)
class FunctionOracle:
    """Value and gradient access for one objective function."""

    dimension: int
    value_fn: Callable[[np.ndarray], float]
    gradient_fn: Callable[[np.ndarray], np.ndarray]
    smoothness: Optional[float] = None        # L with respect to the l2 norm
    holder_exponent: Optional[float] = None   # nu in (0, 1]
    holder_constant: Optional[float] = None   # L_nu
    lipschitz_constant: Optional[float] = None

    def _check_point(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ValueError(
                f"point has shape {x.shape}, oracle expects ({self.dimension},)"
            )
        return x

    def value(self, x: np.ndarray) -> float:
        v = float(self.value_fn(self._check_point(x)))
        if not np.isfinite(v):
            raise NumericError(f"non-finite objective value at x = {x!r}")
        return v

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.gradient_fn(self._check_point(x))


def eval_value(oracle: FunctionOracle, x: np.ndarray) -> float:
    return oracle.value(x)


def eval_gradient(oracle: FunctionOracle, x: np.ndarray) -> np.ndarray:
    return oracle.gradient(x)


@dataclass(frozen=True)
class ReferenceOptimum:
    """A reference minimizer (or best-known point) with its value."""

    point: np.ndarray
    value: float
    provenance: str  # "analytic" or "numeric"


@dataclass(frozen=True)
class QuadraticInstance:
    """Quadratic objective f(x) = 0.5 <Ax, x> - <b, x>."""

    matrix_a: np.ndarray
    vector_b: np.ndarray
    reference: Optional[ReferenceOptimum] = None

    def oracle(self, smoothness: Optional[float] = None) -> FunctionOracle:
        return make_quadratic(self.matrix_a, self.vector_b, smoothness=smoothness)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian gradient noise N(0, epsilon_eta * I)."""

    epsilon_eta: float
    seed: int = 0


def make_quadratic(
    A: np.ndarray, b: np.ndarray, smoothness: Optional[float] = None
) -> FunctionOracle:
    """Oracle for f(x) = 0.5 <Ax, x> - <b, x> with gradient Ax - b.

    A must be symmetric; the smoothness constant defaults to the largest
    eigenvalue of A.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise ValueError("A must be symmetric")
    if b.shape != (A.shape[0],):
        raise ValueError(f"b has shape {b.shape}, expected ({A.shape[0]},)")
    if smoothness is None:
        smoothness = float(np.linalg.eigvalsh(A)[-1])

    def value_fn(x: np.ndarray) -> float:
        return 0.5 * float(x @ (A @ x)) - float(b @ x)

    def gradient_fn(x: np.ndarray) -> np.ndarray:
        return A @ x - b

    return FunctionOracle(
        dimension=A.shape[0],
        value_fn=value_fn,
        gradient_fn=gradient_fn,
        smoothness=smoothness,
    )


def make_cycle_laplacian(n: int) -> np.ndarray:
    """Graph Laplacian of the n-cycle: 2 on the diagonal, -1 on the first
    off-diagonals and in the corners (1, n) and (n, 1).

    Built in integer arithmetic (exact zero row sums), returned as float.
    """
    if n < 3:
        raise ValueError(f"cycle Laplacian needs n >= 3, got {n}")
    A = 2 * np.eye(n, dtype=np.int64)
    idx = np.arange(n)
    A[idx, (idx + 1) % n] = -1
    A[idx, (idx - 1) % n] = -1
    assert np.all(A.sum(axis=1) == 0)
    return A.astype(float)


def cycle_smoothness(n: int) -> float:
    """Largest eigenvalue of the n-cycle Laplacian: 2 - 2 cos(2 pi k / n)
    maximized over k, which is exactly 4 for even n."""
    if n % 2 == 0:
        return 4.0
    return float(2.0 - 2.0 * np.cos(2.0 * np.pi * (n // 2) / n))


def make_lipschitz_norm(center: np.ndarray, lipschitz: float = 1.0) -> FunctionOracle:
    """Oracle for f(x) = lipschitz * ||x - center||_2.

    The subgradient at the center (the kink) is chosen as zero.
    """
    center = np.asarray(center, dtype=float)
    if lipschitz <= 0:
        raise ValueError(f"lipschitz must be positive, got {lipschitz}")

    def value_fn(x: np.ndarray) -> float:
        return lipschitz * float(np.linalg.norm(x - center))

    def gradient_fn(x: np.ndarray) -> np.ndarray:
        d = x - center
        r = float(np.linalg.norm(d))
        if r == 0.0:
            return np.zeros_like(d)
        return (lipschitz / r) * d

    return FunctionOracle(
        dimension=center.shape[0],
        value_fn=value_fn,
        gradient_fn=gradient_fn,
        lipschitz_constant=float(lipschitz),
    )


def _certify_holder_constant(nu: float, dimension: int, seed: int = 0) -> float:
    """Numerical upper bound on the Hoelder constant of grad ||x||^(1+nu)/(1+nu).

    Dense pair sampling of ||g(x) - g(y)|| / ||x - y||^nu over [-10, 10]^d,
    including near-antipodal pairs where the ratio peaks, times a 1.05
    safety factor.
    """
    rng = np.random.default_rng(seed)
    m = 20000
    x = rng.uniform(-10.0, 10.0, size=(m, dimension))
    y = rng.uniform(-10.0, 10.0, size=(m, dimension))
    # Antipodal and near-antipodal pairs at assorted radii stress the ratio.
    scales = np.geomspace(1e-3, 10.0, 40)
    base = rng.standard_normal((scales.size, dimension))
    base /= np.linalg.norm(base, axis=1, keepdims=True)
    anti_x = base * scales[:, None]
    x = np.vstack([x, anti_x, anti_x])
    y = np.vstack([y, -anti_x, -0.999 * anti_x])

    def grads(p: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(p, axis=1, keepdims=True)
        out = np.where(r > 0, r ** (nu - 1.0), 0.0) * p
        return out

    num = np.linalg.norm(grads(x) - grads(y), axis=1)
    den = np.linalg.norm(x - y, axis=1) ** nu
    good = den > 0
    ratio = num[good] / den[good]
    return 1.05 * float(ratio.max())


def make_holder_power(
    nu: float, dimension: int, holder_constant: Optional[float] = None
) -> FunctionOracle:
    """Oracle for f(x) = ||x||^(1+nu) / (1+nu), whose gradient ||x||^(nu-1) x
    is nu-Hoelder continuous.  The constant L_nu is certified numerically by
    dense pair sampling unless supplied.
    """
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must be in (0, 1], got {nu}")
    if holder_constant is None:
        holder_constant = _certify_holder_constant(nu, dimension)

    def value_fn(x: np.ndarray) -> float:
        return float(np.linalg.norm(x) ** (1.0 + nu)) / (1.0 + nu)

    def gradient_fn(x: np.ndarray) -> np.ndarray:
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return np.zeros_like(x)
        return r ** (nu - 1.0) * x

    return FunctionOracle(
        dimension=dimension,
        value_fn=value_fn,
        gradient_fn=gradient_fn,
        holder_exponent=float(nu),
        holder_constant=float(holder_constant),
    )


def wrap_noisy(oracle: FunctionOracle, noise: NoiseSpec) -> FunctionOracle:
    """Additive Gaussian noise on every gradient query; values stay exact.

    The draws come from a dedicated seeded generator, so a given
    (oracle, spec) pair replays the same gradient stream.  With
    epsilon_eta = 0 the returned oracle reuses the wrapped functions
    unchanged (bitwise pass-through).  The noisy oracle is stateful and
    not safe for concurrent gradient queries.
    """
    if noise.epsilon_eta < 0:
        raise ValueError(f"epsilon_eta must be >= 0, got {noise.epsilon_eta}")
    if noise.epsilon_eta == 0:
        return FunctionOracle(
            dimension=oracle.dimension,
            value_fn=oracle.value_fn,
            gradient_fn=oracle.gradient_fn,
            smoothness=oracle.smoothness,
            holder_exponent=oracle.holder_exponent,
            holder_constant=oracle.holder_constant,
            lipschitz_constant=oracle.lipschitz_constant,
        )
    rng = np.random.default_rng(noise.seed)
    std = float(np.sqrt(noise.epsilon_eta))
    base_grad = oracle.gradient_fn
    dim = oracle.dimension

    def gradient_fn(x: np.ndarray) -> np.ndarray:
        return base_grad(x) + std * rng.standard_normal(dim)

    return FunctionOracle(
        dimension=dim,
        value_fn=oracle.value_fn,
        gradient_fn=gradient_fn,
        smoothness=oracle.smoothness,
        holder_exponent=oracle.holder_exponent,
        holder_constant=oracle.holder_constant,
        lipschitz_constant=oracle.lipschitz_constant,
    )


def finite_diff_check(
    oracle: FunctionOracle, x: np.ndarray, step: float = 1e-6
) -> float:
    """Max relative disagreement between the gradient oracle and central
    finite differences of the value oracle, coordinate by coordinate.

    Relative means against max(1, ||g||_inf), so a corrupted coordinate of
    size 0.1 shows up as an error of about 0.1.
    """
    x = np.asarray(x, dtype=float)
    g = oracle.gradient(x)
    fd = np.empty_like(g)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        fd[i] = (oracle.value(x + e) - oracle.value(x - e)) / (2.0 * step)
    scale = max(1.0, float(np.max(np.abs(g))))
    return float(np.max(np.abs(fd - g))) / scale


# ---------------------------------------------------------------------------
# Reference optima
# ---------------------------------------------------------------------------


def quadratic_reference_unconstrained(A: np.ndarray, b: np.ndarray) -> ReferenceOptimum:
    """Solve Ax = b for a positive definite A (the bounded-below case)."""
    x = np.linalg.solve(A, b)
    f = 0.5 * float(x @ (A @ x)) - float(b @ x)
    if not np.all(np.isfinite(x)):
        raise NumericError("linear solve produced non-finite reference point")
    return ReferenceOptimum(point=x, value=f, provenance="numeric")


def quadratic_reference_drift(A: np.ndarray, b: np.ndarray) -> ReferenceOptimum:
    """Least-squares value over range(A) for a singular A.

    The objective is unbounded below along ker(A) when b has a kernel
    component; the returned value is f at the min-norm least-squares point,
    which is the natural plotting reference for the drifting iterates.
    """
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    f = 0.5 * float(x @ (A @ x)) - float(b @ x)
    return ReferenceOptimum(point=x, value=f, provenance="numeric")


def quadratic_reference_simplex(
    A: np.ndarray, b: np.ndarray, support_tol: float = 1e-8
) -> ReferenceOptimum:
    """Minimize 0.5 <Ax, x> - <b, x> over the probability simplex.

    An SLSQP solve locates the active set; the optimum is then polished to
    machine precision by solving the KKT system on the detected support and
    verifying the off-support multipliers.
    """
    from scipy.optimize import minimize

    n = b.shape[0]
    x0 = np.full(n, 1.0 / n)
    res = minimize(
        lambda x: 0.5 * float(x @ (A @ x)) - float(b @ x),
        x0,
        jac=lambda x: A @ x - b,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * n,
        constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1.0,
                      "jac": lambda x: np.ones(n)}],
        options={"maxiter": 1000, "ftol": 1e-14},
    )
    x = np.clip(res.x, 0.0, None)
    support = x > support_tol
    if not support.any():
        support[int(np.argmax(b))] = True
    for _ in range(2 * n):
        s = np.flatnonzero(support)
        m = s.size
        K = np.zeros((m + 1, m + 1))
        K[:m, :m] = A[np.ix_(s, s)]
        K[:m, m] = -1.0
        K[m, :m] = 1.0
        rhs = np.concatenate([b[s], [1.0]])
        sol = np.linalg.solve(K, rhs)
        xs, lam = sol[:m], sol[m]
        if np.any(xs <= 0.0):
            support[s[int(np.argmin(xs))]] = False
            continue
        x = np.zeros(n)
        x[s] = xs
        mu = (A @ x - b) - lam
        off = ~support
        if not off.any() or float(mu[off].min()) >= -1e-10:
            break
        support[np.flatnonzero(off)[int(np.argmin(mu[off]))]] = True
    else:
        raise NumericError("simplex reference optimum: active-set polish cycled")
    f = 0.5 * float(x @ (A @ x)) - float(b @ x)
    return ReferenceOptimum(point=x, value=f, provenance="numeric")


def make_cycle_instance(
    n: int,
    domain: str = "unconstrained",
    variant: str = "regularized",
    mu: float = 1e-6,
) -> QuadraticInstance:
    """The cycle-Laplacian benchmark family with b = e_1.

    domain "simplex": the plain Laplacian with a numeric simplex optimum.
    domain "unconstrained": the Laplacian is singular and the objective is
    unbounded below, so choose a variant: "regularized" adds mu * I (bounded
    below, unique minimizer), "drift" keeps the singular matrix and uses the
    least-squares value over range(A) as the plotting reference.
    """
    A = make_cycle_laplacian(n)
    b = np.zeros(n)
    b[0] = 1.0
    if domain == "simplex":
        return QuadraticInstance(A, b, quadratic_reference_simplex(A, b))
    if domain != "unconstrained":
        raise ValueError(f"unsupported domain for cycle instance: {domain}")
    if variant == "drift":
        return QuadraticInstance(A, b, quadratic_reference_drift(A, b))
    if variant == "regularized":
        A = A + mu * np.eye(n)
        return QuadraticInstance(A, b, quadratic_reference_unconstrained(A, b))
    raise ValueError(f"unknown unconstrained variant: {variant}")


def make_random_psd_instance(n: int, seed: int = 0) -> QuadraticInstance:
    """A reproducible well-conditioned random quadratic: A = G^T G / n + I/2."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n))
    M = G.T @ G / n + 0.5 * np.eye(n)
    A = (M + M.T) / 2.0
    b = rng.standard_normal(n)
    return QuadraticInstance(A, b, quadratic_reference_unconstrained(A, b))
