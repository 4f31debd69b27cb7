"""Experiment runner: cells, records, CSV/JSON emission, figure presets.

A cell is one (method, noise level, seed) run of the configured problem.
Cells are independent and deterministic: each derives its own RNG seed from
the base seed and its coordinates, so dropping a method or reordering the
noise list never changes another cell's output.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import _backend
from .config import ExperimentConfig
from .gap import GapAccumulator, GapMode, oracle_optimum_mode, radius_bound_mode
from .oracles import (
    FunctionOracle,
    NoiseSpec,
    NumericError,
    ReferenceOptimum,
    cycle_smoothness,
    make_cycle_instance,
    make_cycle_laplacian,
    make_holder_power,
    make_lipschitz_norm,
    make_quadratic,
    make_random_psd_instance,
    quadratic_reference_simplex,
    quadratic_reference_unconstrained,
    wrap_noisy,
)
from .prox import Domain, ProxSetup, box_domain, entropy_simplex_setup, euclidean_setup
from .schedules import (
    StepSchedule,
    hoelder_schedule,
    lipschitz_schedule,
    smooth_schedule,
)
from .solvers import run

CSV_HEADER = ("method,eps_eta,seed,k,a_k,A_k,f_upper,exact_gap,approx_gap,"
              "lower_bound,E_k,grad_queries,wall_time_ns")

# One emitted iteration: the CSV row minus the cell coordinates.
Row = tuple[int, float, float, float, float, float, float, float, int, int]
#       k,   a,     A,     f_up,  exact, approx, lower, E,     queries, wall_ns


@dataclass(frozen=True)
class ProblemSetup:
    """Everything a cell run needs besides noise: built once per config."""

    oracle: FunctionOracle
    setup: ProxSetup
    schedule: StepSchedule
    x0: np.ndarray
    reference: ReferenceOptimum
    mode: GapMode
    smoothness: float           # constant handed to gd/agd
    quadratic: Optional[tuple[np.ndarray, np.ndarray]]  # (A, b) when f is quadratic


@dataclass(frozen=True)
class CellFailure:
    method: str
    eps_eta: float
    seed_index: int
    message: str


def derive_cell_seed(base_seed: int, method: str, eps_index: int, seed_index: int) -> int:
    """base_seed XOR a stable 64-bit hash of the cell coordinates."""
    tag = f"{method}|{eps_index}|{seed_index}".encode()
    h = int.from_bytes(hashlib.sha256(tag).digest()[:8], "little")
    return (base_seed ^ h) & 0xFFFFFFFFFFFFFFFF


def _domain(cfg: ExperimentConfig) -> Domain:
    if cfg.domain == "unconstrained":
        return Domain("unconstrained")
    if cfg.domain == "box":
        return box_domain(cfg.box_lower, cfg.box_upper)
    return Domain("simplex")


def _initial_point(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.domain == "simplex":
        return np.full(cfg.n, 1.0 / cfg.n)
    if cfg.domain == "box":
        return np.full(cfg.n, 0.5 * (cfg.box_lower + cfg.box_upper))
    return np.zeros(cfg.n)


def _quadratic_matrices(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    if cfg.problem == "cycle-quadratic":
        A = make_cycle_laplacian(cfg.n)
        if cfg.variant == "regularized":
            A = A + cfg.mu * np.eye(cfg.n)
        b = np.zeros(cfg.n)
        b[0] = 1.0
        return A, b
    inst = make_random_psd_instance(cfg.n, seed=cfg.problem_seed)
    return inst.matrix_a, inst.vector_b


@lru_cache(maxsize=32)
def _cached_simplex_reference(n: int, problem: str, problem_seed: int,
                              variant: str, mu: float) -> ReferenceOptimum:
    cfg = ExperimentConfig(problem=problem, n=n, problem_seed=problem_seed,
                           variant=variant, mu=mu, domain="simplex")
    A, b = _quadratic_matrices(cfg)
    return quadratic_reference_simplex(A, b)


def build_problem(cfg: ExperimentConfig) -> ProblemSetup:
    """Oracle, geometry, schedule, start point and reference for a config."""
    domain = _domain(cfg)
    x0 = _initial_point(cfg)
    quadratic = None

    if cfg.problem in ("cycle-quadratic", "custom-quadratic"):
        A, b = _quadratic_matrices(cfg)
        quadratic = (A, b)
        if cfg.problem == "cycle-quadratic" and cfg.variant != "regularized":
            smooth = cycle_smoothness(cfg.n)
        else:
            smooth = float(np.linalg.eigvalsh(A)[-1])
        oracle = make_quadratic(A, b, smoothness=smooth)
        if cfg.domain == "simplex":
            reference = _cached_simplex_reference(
                cfg.n, cfg.problem, cfg.problem_seed, cfg.variant, cfg.mu)
        elif cfg.problem == "cycle-quadratic" and cfg.variant == "drift":
            from .oracles import quadratic_reference_drift
            reference = quadratic_reference_drift(A, b)
        else:
            reference = quadratic_reference_unconstrained(A, b)
    elif cfg.problem == "lipschitz-norm":
        rng = np.random.default_rng(cfg.problem_seed)
        center = rng.standard_normal(cfg.n)
        oracle = make_lipschitz_norm(center)
        reference = ReferenceOptimum(point=center, value=0.0, provenance="analytic")
    else:  # holder-power
        oracle = make_holder_power(cfg.nu, cfg.n)
        reference = ReferenceOptimum(point=np.zeros(cfg.n), value=0.0,
                                     provenance="analytic")

    setup = (entropy_simplex_setup(cfg.sigma) if cfg.geometry == "entropy"
             else euclidean_setup(cfg.sigma, domain))

    L_eff = cfg.L
    if L_eff is None:
        L_eff = oracle.smoothness if oracle.smoothness is not None else 1.0

    if cfg.schedule == "smooth":
        schedule = smooth_schedule(cfg.sigma, L_eff)
    elif cfg.schedule == "hoelder":
        L_nu = cfg.L_nu if cfg.L_nu is not None else oracle.holder_constant
        if L_nu is None:
            raise ValueError("hoelder schedule needs L_nu for this problem")
        D = cfg.D
        if D is None:
            D = float(np.linalg.norm(reference.point - x0)) or 1.0
        nu = oracle.holder_exponent if oracle.holder_exponent is not None else cfg.nu
        schedule = hoelder_schedule(cfg.sigma, L_nu, nu, D, c_override=cfg.c_override)
    else:  # lipschitz
        R = cfg.R
        if R is None:
            from .prox import bregman
            R = bregman(setup, reference.point, x0)
        L_lip = oracle.lipschitz_constant if oracle.lipschitz_constant is not None else L_eff
        schedule = lipschitz_schedule(cfg.sigma, L_lip, R)

    if cfg.gap_mode == "oracle-optimum":
        mode = oracle_optimum_mode(reference.point)
    else:
        mode = radius_bound_mode(cfg.gap_radius)

    return ProblemSetup(oracle=oracle, setup=setup, schedule=schedule, x0=x0,
                        reference=reference, mode=mode, smoothness=float(L_eff),
                        quadratic=quadratic)


def _run_cell_pure(prob: ProblemSetup, cfg: ExperimentConfig, method: str,
                   oracle: FunctionOracle) -> list[Row]:
    acc = GapAccumulator(prob.setup, prob.x0)
    f_star = prob.reference.value
    rows: list[Row] = []
    state = {"AG": 0.0, "t": time.perf_counter_ns()}

    def observer(ev) -> None:
        acc.update(ev.a, ev.point, ev.gradient, ev.f_point)
        lower = acc.lower_bound(prob.mode)
        approx = ev.f_solution - lower
        AG = ev.A * approx
        E = 0.0 if ev.k == 1 else AG - state["AG"]
        state["AG"] = AG
        now = time.perf_counter_ns()
        wall = now - state["t"]
        state["t"] = now
        rows.append((ev.k, ev.a, ev.A, ev.f_solution, ev.f_solution - f_star,
                     approx, lower, E, ev.queries, wall))

    run(method, oracle, prob.setup, prob.schedule, prob.x0, cfg.steps,
        observer=observer, smoothness=prob.smoothness,
        implicit_tol=cfg.implicit_tol, implicit_max_inner=cfg.implicit_max_inner)
    return rows


def execute_cell(cfg: ExperimentConfig, method: str, eps_index: int,
                 seed_index: int, backend: str = "auto") -> list[Row]:
    """Run one cell and return its per-iteration rows.

    Deterministic: the gradient-noise stream is seeded from
    (base_seed, method, eps_index, seed_index) only.  backend is "auto"
    (compiled loop when it covers the cell), "pure", or "kernel" (error if
    the compiled loop cannot cover the cell).
    """
    prob = build_problem(cfg)
    eps = cfg.eps_eta[eps_index]
    cell_seed = derive_cell_seed(cfg.base_seed, method, eps_index, seed_index)

    supported = _backend.kernel_cell_supported(cfg, method, prob)
    if backend == "kernel" and not supported:
        raise ValueError(f"compiled backend cannot run method {method!r} "
                         f"on this problem/geometry")
    if supported and backend in ("auto", "kernel"):
        return _backend.run_cell_kernel(cfg, method, prob, eps, cell_seed)

    oracle = prob.oracle
    if eps > 0:
        oracle = wrap_noisy(oracle, NoiseSpec(eps, seed=cell_seed))
    return _run_cell_pure(prob, cfg, method, oracle)


def run_experiment(cfg: ExperimentConfig, threads: int = 1):
    """Execute every (method, eps, seed) cell.

    Returns (records, failures): records maps the cell triple to its rows;
    numeric failures are collected per cell without aborting the rest.
    """
    cells = cfg.cells()
    records: dict[tuple[str, int, int], list[Row]] = {}
    failures: list[CellFailure] = []

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = {cell: pool.submit(execute_cell, cfg, *cell) for cell in cells}
            for cell, fut in futures.items():
                try:
                    records[cell] = fut.result()
                except NumericError as exc:
                    failures.append(CellFailure(cell[0], cfg.eps_eta[cell[1]],
                                                cell[2], str(exc)))
        return records, failures

    for cell in cells:
        try:
            records[cell] = execute_cell(cfg, *cell)
        except NumericError as exc:
            failures.append(CellFailure(cell[0], cfg.eps_eta[cell[1]],
                                        cell[2], str(exc)))
    return records, failures


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def emit_csv(cfg: ExperimentConfig, records, path: str,
             methods: Optional[tuple[str, ...]] = None) -> None:
    """Write records as CSV (exact header, 17-significant-digit floats,
    LF newlines).  `methods` optionally restricts/reorders the methods."""
    chosen = methods if methods is not None else cfg.methods
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for m in chosen:
            for ei, eps in enumerate(cfg.eps_eta):
                for si in range(cfg.num_seeds):
                    rows = records.get((m, ei, si))
                    if rows is None:
                        continue
                    for (k, a, A, f_up, exact, approx, lower, E, q, wall) in rows:
                        fh.write(
                            f"{m},{_fmt(eps)},{si},{k},{_fmt(a)},{_fmt(A)},"
                            f"{_fmt(f_up)},{_fmt(exact)},{_fmt(approx)},"
                            f"{_fmt(lower)},{_fmt(E)},{q},{wall}\n")


def summarize(cfg: ExperimentConfig, records) -> dict:
    """Across-seed statistics of the exact gap, per (method, eps, k).

    Standard deviation is the population convention (divide by the number
    of seeds).
    """
    cells_out = []
    for m in cfg.methods:
        for ei, eps in enumerate(cfg.eps_eta):
            per_seed = [records[(m, ei, si)] for si in range(cfg.num_seeds)
                        if (m, ei, si) in records]
            if not per_seed:
                continue
            gaps = np.array([[row[4] for row in rows] for rows in per_seed])
            stats = [
                {
                    "k": int(rows_k + 1),
                    "mean": float(np.mean(gaps[:, rows_k])),
                    "std": float(np.std(gaps[:, rows_k])),
                    "min": float(np.min(gaps[:, rows_k])),
                    "max": float(np.max(gaps[:, rows_k])),
                }
                for rows_k in range(gaps.shape[1])
            ]
            cells_out.append({"method": m, "eps_eta": float(eps), "stats": stats})
    return {"schema": "axgd-kit/1", "cells": cells_out}


def emit_json(summary: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(summary, fh, indent=1)
        fh.write("\n")


def fig1_configs() -> dict[str, ExperimentConfig]:
    """The two exact-gradient benchmark runs behind the first figure."""
    sigma = 4.0
    return {
        "unconstrained": ExperimentConfig(
            problem="cycle-quadratic", n=100, variant="drift",
            domain="unconstrained", geometry="euclidean",
            methods=("axgd", "agd", "gd"), schedule="smooth",
            sigma=sigma, L=4.0, steps=1000, eps_eta=(0.0,),
            num_seeds=1, base_seed=0, gap_mode="oracle-optimum",
            label="fig1_unconstrained"),
        "simplex": ExperimentConfig(
            problem="cycle-quadratic", n=100, variant="plain",
            domain="simplex", geometry="entropy",
            methods=("axgd", "agd", "gd"), schedule="smooth",
            sigma=sigma, L=4.0, steps=1000, eps_eta=(0.0,),
            num_seeds=1, base_seed=0, gap_mode="oracle-optimum",
            label="fig1_simplex"),
    }


def fig2_configs() -> dict[str, ExperimentConfig]:
    """The noise-sweep runs behind the second figure: three noise levels,
    twenty seeds, both feasible regions.  The unconstrained problem uses
    the ridge-regularized matrix so that f* exists under noise."""
    mu = 1e-6
    L_reg = 4.0 + mu
    return {
        "unconstrained": ExperimentConfig(
            problem="cycle-quadratic", n=100, variant="regularized", mu=mu,
            domain="unconstrained", geometry="euclidean",
            methods=("axgd", "agd", "gd"), schedule="smooth",
            sigma=L_reg, L=L_reg, steps=1000,
            eps_eta=(1e-1, 1e-2, 1e-3), num_seeds=20, base_seed=0,
            gap_mode="oracle-optimum", label="fig2_unconstrained"),
        "simplex": ExperimentConfig(
            problem="cycle-quadratic", n=100, variant="plain",
            domain="simplex", geometry="entropy",
            methods=("axgd", "agd", "gd"), schedule="smooth",
            sigma=4.0, L=4.0, steps=1000,
            eps_eta=(1e-1, 1e-2, 1e-3), num_seeds=20, base_seed=0,
            gap_mode="oracle-optimum", label="fig2_simplex"),
    }


def reproduce_figures(preset: str, out_dir: str, threads: int = 1) -> list[str]:
    """Run a figure preset and write one CSV per panel (plus JSON summaries
    for the noise sweep).  Returns the written paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []
    all_failures: list[CellFailure] = []

    if preset == "fig1":
        for name, cfg in fig1_configs().items():
            records, failures = run_experiment(cfg, threads=threads)
            all_failures.extend(failures)
            exact = os.path.join(out_dir, f"fig1_{name}_exact.csv")
            approx = os.path.join(out_dir, f"fig1_{name}_exact_approx.csv")
            emit_csv(cfg, records, exact)
            emit_csv(cfg, records, approx, methods=("axgd", "agd"))
            written += [exact, approx]
    elif preset == "fig2":
        for name, cfg in fig2_configs().items():
            records, failures = run_experiment(cfg, threads=threads)
            all_failures.extend(failures)
            for ei, eps in enumerate(cfg.eps_eta):
                panel = os.path.join(out_dir, f"fig2_{name}_eps{ei + 1}.csv")
                sub = {c: r for c, r in records.items() if c[1] == ei}
                one = ExperimentConfig(**{**cfg.__dict__, "eps_eta": (eps,)})
                remapped = {(m, 0, si): r for (m, _, si), r in sub.items()}
                emit_csv(one, remapped, panel)
                written.append(panel)
            summary_path = os.path.join(out_dir, f"fig2_{name}_summary.json")
            emit_json(summarize(cfg, records), summary_path)
            written.append(summary_path)
    else:
        raise ValueError(f"unknown preset {preset!r} (expected fig1 or fig2)")

    if all_failures:
        raise NumericError(
            "numeric failures in "
            + "; ".join(f"{f.method}/eps={f.eps_eta}/seed={f.seed_index}: {f.message}"
                        for f in all_failures))
    return written


def benchmark_backends(cfg: Optional[ExperimentConfig] = None,
                       repeats: int = 3) -> dict:
    """Time the pure and compiled backends on the same cells and measure
    how far their outputs drift apart.

    Each method in the config is run `repeats` times per backend (best
    time kept) and the worst relative deviation over the f_upper,
    lower_bound and approx_gap columns is recorded.
    """
    if cfg is None:
        cfg = fig1_configs()["simplex"]
    report = {"kernel_available": _backend.kernel_available(), "methods": []}
    for method in cfg.methods:
        entry: dict = {"method": method}
        t_pure = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            rows_pure = execute_cell(cfg, method, 0, 0, backend="pure")
            t_pure = min(t_pure, time.perf_counter() - t0)
        entry["pure_seconds"] = t_pure
        if report["kernel_available"]:
            t_kern = math.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                rows_kern = execute_cell(cfg, method, 0, 0, backend="kernel")
                t_kern = min(t_kern, time.perf_counter() - t0)
            entry["kernel_seconds"] = t_kern
            entry["speedup"] = t_pure / t_kern
            dev = 0.0
            for rp, rk in zip(rows_pure, rows_kern):
                for col in (3, 6, 5):  # f_upper, lower_bound, approx_gap
                    scale = max(1.0, abs(rp[col]))
                    dev = max(dev, abs(rp[col] - rk[col]) / scale)
            entry["max_relative_deviation"] = dev
        report["methods"].append(entry)
    return report
