"""Backend selection for the benchmark hot loops.

The compiled extension (axgdkit._kernels) fuses the per-iteration solver
updates for quadratic objectives; everything else — and every run when the
extension is absent or AXGDKIT_DISABLE_EXT=1 is set — goes through the
pure-NumPy solvers.  The pure path is the reference: the backends agree to
floating-point reduction order (around 1e-12 relative over a thousand
iterations), not bitwise, so a given CSV is reproducible per backend.

The compiled path reports wall_time_ns measured inside the solver loop;
the certificate columns are assembled afterwards in vectorized NumPy and
their (small, amortized) cost is not attributed to individual rows.
"""
from __future__ import annotations

import os

import numpy as np

from .gap import GapAccumulator
from .oracles import NumericError

_kernels = None
if os.environ.get("AXGDKIT_DISABLE_EXT", "") != "1":
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        _kernels = None

_METHOD_CODES = {"axgd": 0, "agd": 1, "gd": 2}
_QUERIES_PER_STEP = {"axgd": 2, "agd": 2, "gd": 1}


def kernel_available() -> bool:
    return _kernels is not None


def kernel_cell_supported(cfg, method: str, prob) -> bool:
    """True when the compiled loop covers this cell: quadratic objective,
    axgd/agd/gd, and one of the two shipped geometry/domain pairings."""
    if _kernels is None or method not in _METHOD_CODES or prob.quadratic is None:
        return False
    kind = prob.setup.kind
    dom = prob.setup.domain.kind
    return (kind == "euclidean" and dom == "unconstrained") or (
        kind == "entropy" and dom == "simplex")


def _certificate_columns(prob, weights: np.ndarray, f_pt: np.ndarray,
                         f_sol: np.ndarray, gxp: np.ndarray,
                         grads: np.ndarray):
    """Vectorized replay of GapAccumulator over pre-recorded hyperplanes.

    Same running sums, regularized minimizer and penalty as the per-step
    accumulator; cumulative sums keep the accumulation order identical.
    """
    setup = prob.setup
    x0 = prob.x0
    z_anchor = setup.grad_psi(x0)
    penalty = GapAccumulator(setup, x0).penalty(prob.mode)

    A = np.cumsum(weights)
    S = np.cumsum(weights[:, None] * grads, axis=0)
    Z = z_anchor[None, :] - S
    if setup.kind == "euclidean":
        U = Z / setup.sigma
        if setup.domain.kind == "box":
            U = np.clip(U, setup.domain.lower, setup.domain.upper)
        breg = 0.5 * setup.sigma * np.sum((U - x0[None, :]) ** 2, axis=1)
    else:
        W = Z / setup.sigma
        W = W - W.max(axis=1, keepdims=True)
        E = np.exp(W)
        U = E / E.sum(axis=1, keepdims=True)
        # 0 log 0 = 0 at coordinates where the softmax underflows
        safe = np.where(U > 0, U, 1.0)
        kl = np.sum(np.where(U > 0, U * np.log(safe / x0[None, :]), 0.0), axis=1)
        breg = setup.sigma * (kl - U.sum(axis=1) + float(x0.sum()))
    min_term = np.sum(S * U, axis=1) - np.cumsum(weights * gxp) + breg
    lower = (np.cumsum(weights * f_pt) + min_term - penalty) / A
    approx = f_sol - lower
    scaled = A * approx
    E_col = np.empty_like(scaled)
    E_col[0] = 0.0
    E_col[1:] = scaled[1:] - scaled[:-1]
    return A, lower, approx, E_col


def run_cell_kernel(cfg, method: str, prob, eps: float, cell_seed: int):
    """Compiled counterpart of the pure cell run; returns the same row
    tuples (k, a, A, f_upper, exact_gap, approx_gap, lower_bound, E_k,
    grad_queries, wall_time_ns)."""
    A_mat, b = prob.quadratic
    geometry = 0 if prob.setup.kind == "euclidean" else 1
    per_step = _QUERIES_PER_STEP[method]
    steps = cfg.steps
    weights = prob.schedule.weights(steps)

    use_noise = eps > 0
    if use_noise:
        rng = np.random.default_rng(cell_seed)
        std = float(np.sqrt(eps))
        noise = std * rng.standard_normal((per_step * steps, prob.x0.size))
    else:
        noise = np.zeros((1, 1))

    f_pt, f_sol, gxp, grads, wall = _kernels.run_quadratic_cell(
        _METHOD_CODES[method], geometry,
        np.ascontiguousarray(A_mat, dtype=float),
        np.ascontiguousarray(b, dtype=float),
        np.ascontiguousarray(prob.x0, dtype=float),
        np.ascontiguousarray(weights, dtype=float),
        prob.setup.sigma, prob.smoothness, noise, use_noise)

    if not (np.all(np.isfinite(f_pt)) and np.all(np.isfinite(f_sol))
            and np.all(np.isfinite(grads))):
        bad = int(np.argmax(~(np.isfinite(f_pt) & np.isfinite(f_sol)
                              & np.all(np.isfinite(grads), axis=1)))) + 1
        raise NumericError(f"non-finite state at iteration {bad}")

    A, lower, approx, E_col = _certificate_columns(
        prob, weights, f_pt, f_sol, gxp, grads)
    f_star = prob.reference.value
    queries = per_step * np.arange(1, steps + 1)
    return [
        (k + 1, float(weights[k]), float(A[k]), float(f_sol[k]),
         float(f_sol[k] - f_star), float(approx[k]), float(lower[k]),
         float(E_col[k]), int(queries[k]), int(wall[k]))
        for k in range(steps)
    ]
