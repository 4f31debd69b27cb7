"""First-order solvers sharing one primal-dual state.

All methods keep a primal point x, a dual state z driven by weighted
gradients, and the running weight sum A_k.  One iteration of each:

* axgd_step: extra-gradient acceleration.  A prox-predicted point xhat is
  probed, its gradient shifts the dual to zhat, and the corrector built
  from zhat becomes the next iterate.  Two gradient queries.
* agd_step: estimate-sequence acceleration.  The next iterate mixes the
  previous gradient-mapped point with the prox of z; a gradient/projection
  step then produces the new solution point.  Two gradient queries.
* grad_step / gd_run: plain projected gradient descent with step 1/L.
  One gradient query per step.
* implicit_euler_step: solves the implicit-Euler discretization of the
  accelerated mirror-descent flow by fixed-point sweeps started from the
  AXGD predictor.  With max_inner = 2 it reproduces axgd_step bitwise,
  because AXGD is exactly the two-sweep truncation.
* integrate_amd_flow: forward-Euler integration of the continuous flow
  itself, as a discretization diagnostic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .oracles import FunctionOracle, NumericError
from .prox import ProxSetup, Domain, project_l2
from .schedules import StepSchedule


@dataclass(frozen=True)
class SolverState:
    """Iterate bundle shared by AXGD, AGD and the implicit-Euler stepper."""

    iteration: int
    x: np.ndarray
    z: np.ndarray
    x_hat: np.ndarray            # extra-gradient point / gradient-mapped point
    z_hat: Optional[np.ndarray]  # shifted dual at x_hat (AXGD and implicit)
    A: float                     # running sum a_1 + ... + a_k
    queries: int                 # cumulative gradient queries
    step_weight: float           # a_k used by the last step (0 at k = 0)
    grad_hat: Optional[np.ndarray] = None  # gradient at x_hat
    grad_new: Optional[np.ndarray] = None  # gradient driving the z update


@dataclass(frozen=True)
class InnerReport:
    """Outcome of the implicit-Euler fixed-point loop."""

    sweeps: int
    residual: float
    converged: bool


def _check_initial(x0: np.ndarray, setup: ProxSetup) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    dom = setup.domain
    if dom.kind == "simplex":
        if abs(float(x0.sum()) - 1.0) > 1e-9 or float(x0.min()) < 0.0:
            raise ValueError("initial point must lie on the simplex")
    elif dom.kind == "box":
        if float(x0.min()) < dom.lower or float(x0.max()) > dom.upper:
            raise ValueError("initial point must lie in the box")
    return x0


def init_state(x0: np.ndarray, setup: ProxSetup) -> SolverState:
    """State at k = 0: z = grad psi(x0), A_0 = 0.

    Under the entropy setup x0 must be interior (boundary points have no
    finite mirror image).
    """
    x0 = _check_initial(x0, setup)
    z0 = setup.grad_psi(x0)
    return SolverState(
        iteration=0, x=x0.copy(), z=z0, x_hat=x0.copy(), z_hat=None,
        A=0.0, queries=0, step_weight=0.0,
    )


def _mix(ratio_old: float, x: np.ndarray, ratio_new: float, u: np.ndarray) -> np.ndarray:
    return ratio_old * x + ratio_new * u


def _check_finite(k: int, *arrays: np.ndarray) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NumericError(f"non-finite state at iteration {k}")


def axgd_step(
    state: SolverState,
    oracle: FunctionOracle,
    setup: ProxSetup,
    schedule: StepSchedule,
) -> SolverState:
    """One accelerated extra-gradient iteration (two gradient queries)."""
    k = state.iteration + 1
    a = schedule.weight(k)
    A_new = state.A + a
    r_old = state.A / A_new
    r_new = a / A_new

    x_hat = _mix(r_old, state.x, r_new, setup.grad_psi_star(state.z))
    g_hat = oracle.gradient(x_hat)
    z_hat = state.z - a * g_hat
    x_next = _mix(r_old, state.x, r_new, setup.grad_psi_star(z_hat))
    g_next = oracle.gradient(x_next)
    z_next = state.z - a * g_next
    _check_finite(k, x_next, z_next)
    return SolverState(
        iteration=k, x=x_next, z=z_next, x_hat=x_hat, z_hat=z_hat,
        A=A_new, queries=state.queries + 2, step_weight=a,
        grad_hat=g_hat, grad_new=g_next,
    )


def _grad_step(
    oracle: FunctionOracle, L: float, x: np.ndarray, domain: Domain
) -> tuple[np.ndarray, np.ndarray]:
    g = oracle.gradient(x)
    return project_l2(domain, x - g / L), g


def grad_step(
    oracle: FunctionOracle, L: float, x: np.ndarray, domain: Domain
) -> np.ndarray:
    """Projected gradient step argmin_{y in X} <grad f(x), y - x> + L/2 ||y - x||_2^2,
    i.e. the l2 projection of x - grad f(x)/L onto the domain."""
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    return _grad_step(oracle, L, x, domain)[0]


def agd_step(
    state: SolverState,
    oracle: FunctionOracle,
    setup: ProxSetup,
    schedule: StepSchedule,
    smoothness: Optional[float] = None,
) -> SolverState:
    """One accelerated gradient iteration (two gradient queries: the dual
    update and the gradient step each query once)."""
    L = oracle.smoothness if smoothness is None else smoothness
    if L is None or L <= 0:
        raise ValueError("agd_step needs a positive smoothness constant")
    k = state.iteration + 1
    a = schedule.weight(k)
    A_new = state.A + a
    r_old = state.A / A_new
    r_new = a / A_new

    x_next = _mix(r_old, state.x_hat, r_new, setup.grad_psi_star(state.z))
    g_next = oracle.gradient(x_next)
    z_next = state.z - a * g_next
    x_hat_next, g_hat = _grad_step(oracle, L, x_next, setup.domain)
    _check_finite(k, x_next, z_next, x_hat_next)
    return SolverState(
        iteration=k, x=x_next, z=z_next, x_hat=x_hat_next, z_hat=None,
        A=A_new, queries=state.queries + 2, step_weight=a,
        grad_hat=g_hat, grad_new=g_next,
    )


def implicit_euler_step(
    state: SolverState,
    oracle: FunctionOracle,
    setup: ProxSetup,
    schedule: StepSchedule,
    tol: float = 1e-12,
    max_inner: int = 50,
) -> tuple[SolverState, InnerReport]:
    """One implicit-Euler step of the accelerated flow.

    The fixed point of y -> mix(x, grad psi*(z - a grad f(y))) is located by
    plain sweeps started from the AXGD predictor mix(x, grad psi*(z)).  The
    predictor counts as the first inner iteration, so max_inner = 2 performs
    exactly one sweep and reproduces axgd_step bitwise.  The sweep
    contraction factor on the first step is about a * L / sigma.

    Non-convergence within max_inner is reported, not raised.
    """
    if max_inner < 2:
        raise ValueError(f"max_inner must be >= 2, got {max_inner}")
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    k = state.iteration + 1
    a = schedule.weight(k)
    A_new = state.A + a
    r_old = state.A / A_new
    r_new = a / A_new

    y = _mix(r_old, state.x, r_new, setup.grad_psi_star(state.z))
    x_hat = y
    z_hat = None
    g_hat = None
    sweeps = 0
    while True:
        g = oracle.gradient(y)
        z_shift = state.z - a * g
        if sweeps == 0:
            z_hat = z_shift
            g_hat = g
        y_next = _mix(r_old, state.x, r_new, setup.grad_psi_star(z_shift))
        sweeps += 1
        residual = setup.norm(y_next - y)
        y = y_next
        if residual <= tol or sweeps + 1 >= max_inner:
            break
    g_next = oracle.gradient(y)
    z_next = state.z - a * g_next
    _check_finite(k, y, z_next)
    new_state = SolverState(
        iteration=k, x=y, z=z_next, x_hat=x_hat, z_hat=z_hat,
        A=A_new, queries=state.queries + sweeps + 1, step_weight=a,
        grad_hat=g_hat, grad_new=g_next,
    )
    return new_state, InnerReport(
        sweeps=sweeps, residual=float(residual), converged=bool(residual <= tol)
    )


def gd_run(
    oracle: FunctionOracle,
    L: float,
    x0: np.ndarray,
    domain: Domain,
    steps: int,
) -> np.ndarray:
    """Projected gradient descent with fixed step 1/L; returns the whole
    trajectory as a (steps + 1, n) array."""
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    x = np.asarray(x0, dtype=float).copy()
    out = np.empty((steps + 1, x.size))
    out[0] = x
    for k in range(1, steps + 1):
        x, _ = _grad_step(oracle, L, x, domain)
        _check_finite(k, x)
        out[k] = x
    return out


@dataclass(frozen=True)
class StepEvent:
    """Per-iteration observer payload emitted by run()."""

    k: int
    a: float
    A: float
    solution: np.ndarray        # the method's current solution point
    f_solution: float           # exact objective value there
    point: np.ndarray           # where the recorded gradient was taken
    gradient: np.ndarray        # the (possibly noisy) gradient actually used
    f_point: float              # exact objective value at point
    queries: int                # cumulative gradient queries
    state: Optional[SolverState] = None
    prev_state: Optional[SolverState] = None
    inner: Optional[InnerReport] = None


METHODS = ("axgd", "agd", "gd", "implicit")


def run(
    method: str,
    oracle: FunctionOracle,
    setup: ProxSetup,
    schedule: StepSchedule,
    x0: np.ndarray,
    steps: int,
    observer: Optional[Callable[[StepEvent], None]] = None,
    smoothness: Optional[float] = None,
    implicit_tol: float = 1e-12,
    implicit_max_inner: int = 50,
) -> np.ndarray:
    """Drive one solver for a fixed number of steps.

    The observer, if given, is called exactly once per iteration with the
    solution point, the gradient actually used for the dual/gradient update
    and the schedule weights: everything a duality-gap certificate needs.
    Returns the final solution point.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")

    if method == "gd":
        L = oracle.smoothness if smoothness is None else smoothness
        if L is None or L <= 0:
            raise ValueError("gd needs a positive smoothness constant")
        x = _check_initial(x0, setup).copy()
        A = 0.0
        queries = 0
        for k in range(1, steps + 1):
            a = schedule.weight(k)
            A += a
            f_point = oracle.value(x)
            x_next, g = _grad_step(oracle, L, x, setup.domain)
            queries += 1
            _check_finite(k, x_next)
            if observer is not None:
                observer(StepEvent(
                    k=k, a=a, A=A,
                    solution=x_next, f_solution=oracle.value(x_next),
                    point=x, gradient=g, f_point=f_point, queries=queries,
                ))
            x = x_next
        return x

    state = init_state(x0, setup)
    for _ in range(steps):
        prev = state
        inner = None
        if method == "axgd":
            state = axgd_step(state, oracle, setup, schedule)
        elif method == "agd":
            state = agd_step(state, oracle, setup, schedule, smoothness=smoothness)
        else:
            state, inner = implicit_euler_step(
                state, oracle, setup, schedule,
                tol=implicit_tol, max_inner=implicit_max_inner,
            )
        if observer is not None:
            f_point = oracle.value(state.x)
            if method == "agd":
                solution = state.x_hat
                f_solution = oracle.value(solution)
            else:
                solution = state.x
                f_solution = f_point
            observer(StepEvent(
                k=state.iteration, a=state.step_weight, A=state.A,
                solution=solution, f_solution=f_solution,
                point=state.x, gradient=state.grad_new, f_point=f_point,
                queries=state.queries, state=state, prev_state=prev, inner=inner,
            ))
    return state.x_hat if method == "agd" else state.x


@dataclass(frozen=True)
class FlowTrajectory:
    """Sampled forward-Euler trajectory of the accelerated mirror flow,
    with the running integrals a gap certificate is built from."""

    t: np.ndarray
    x: np.ndarray                 # (m, n)
    z: np.ndarray                 # (m, n)
    f: np.ndarray                 # objective along the trajectory
    f_integral: np.ndarray        # running integral of f d(alpha)
    grad_integral: np.ndarray     # (m, n), running integral of grad f d(alpha)
    grad_x_integral: np.ndarray   # running integral of <grad f, x> d(alpha)


def integrate_amd_flow(
    oracle: FunctionOracle,
    setup: ProxSetup,
    x0: np.ndarray,
    t_end: float,
    dt: float,
    t0: float = 1.0,
    alpha: Callable[[float], float] = lambda t: t * t,
    alpha_dot: Callable[[float], float] = lambda t: 2.0 * t,
) -> FlowTrajectory:
    """Forward-Euler integration of the accelerated mirror-descent flow

        dz/dt = -alpha'(t) grad f(x),
        dx/dt = alpha'(t) (grad psi*(z) - x) / alpha(t),

    from z(t0) = grad psi(x0).  The default weight is alpha(t) = t^2.
    The continuous flow keeps f(x(t)) - f* below
    (alpha(t0) (f(x0) - f*) + D_psi(x*, x0)) / alpha(t); the Euler
    trajectory violates that bound by O(dt).
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end <= t0:
        raise ValueError(f"t_end must exceed t0, got {t_end} <= {t0}")
    if alpha(t0) <= 0 or alpha_dot(t0) <= 0:
        raise ValueError("alpha must be positive and increasing at t0")

    x = _check_initial(x0, setup).copy()
    z = setup.grad_psi(x)
    steps = int(round((t_end - t0) / dt))
    n = x.size
    T = np.empty(steps + 1)
    X = np.empty((steps + 1, n))
    Z = np.empty((steps + 1, n))
    F = np.empty(steps + 1)
    IF = np.empty(steps + 1)
    IG = np.empty((steps + 1, n))
    IGX = np.empty(steps + 1)

    f_int = 0.0
    g_int = np.zeros(n)
    gx_int = 0.0
    for i in range(steps + 1):
        t = t0 + i * dt
        fx = oracle.value(x)
        T[i], X[i], Z[i], F[i] = t, x, z, fx
        IF[i], IG[i], IGX[i] = f_int, g_int, gx_int
        if i == steps:
            break
        g = oracle.gradient(x)
        ad = alpha_dot(t)
        al = alpha(t)
        u = setup.grad_psi_star(z)
        w = dt * ad
        f_int += w * fx
        g_int = g_int + w * g
        gx_int += w * float(g @ x)
        x = x + dt * ad * (u - x) / al
        z = z - w * g
        _check_finite(i + 1, x, z)

    return FlowTrajectory(
        t=T, x=X, z=Z, f=F, f_integral=IF, grad_integral=IG, grad_x_integral=IGX
    )
