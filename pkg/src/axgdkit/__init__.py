"""Accelerated extra-gradient descent with primal-dual gap certificates.

Core pieces:

* oracles: objective value/gradient oracles, benchmark instances, noise.
* prox: Euclidean and entropy mirror-map setups, Bregman divergences.
* schedules: step-weight schedules for smooth, Hoelder and Lipschitz
  objectives.
* solvers: AXGD, AGD, projected gradient descent, an implicit-Euler
  reference stepper, and a forward-Euler integrator for the underlying
  continuous flow.
* gap: computable upper/lower duality-gap estimates and the per-step
  discretization error they certify.
* runner / cli: the benchmark harness behind the `axgdkit` command.

The benchmark hot loops have an optional compiled kernel
(axgdkit._kernels); everything falls back to pure NumPy when it is not
built or when AXGDKIT_DISABLE_EXT=1 is set.
"""
from .oracles import (
    FunctionOracle,
    NoiseSpec,
    NumericError,
    QuadraticInstance,
    ReferenceOptimum,
    eval_gradient,
    eval_value,
    finite_diff_check,
    make_cycle_instance,
    make_cycle_laplacian,
    make_holder_power,
    make_lipschitz_norm,
    make_quadratic,
    make_random_psd_instance,
    wrap_noisy,
)
from .prox import (
    Domain,
    ProxSetup,
    box_domain,
    bregman,
    bregman_conjugate,
    entropy_simplex_setup,
    euclidean_setup,
    project_l2,
    project_simplex,
    simplex_domain,
    unconstrained_domain,
)
from .schedules import (
    StepSchedule,
    default_hoelder_constant,
    hoelder_schedule,
    lipschitz_schedule,
    smooth_schedule,
    validate_smooth_condition,
)
from .solvers import (
    FlowTrajectory,
    InnerReport,
    SolverState,
    StepEvent,
    agd_step,
    axgd_step,
    gd_run,
    grad_step,
    implicit_euler_step,
    init_state,
    integrate_amd_flow,
    run,
)
from .gap import (
    GapAccumulator,
    GapMode,
    axgd_error_bound,
    check_invariance,
    discretization_error,
    flow_scaled_gap,
    oracle_optimum_mode,
    radius_bound_mode,
    upper_bound,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
