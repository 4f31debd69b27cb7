"""Experiment configuration: a flat ``key = value`` text format.

One assignment per line, ``#`` starts a comment, lists are comma-separated.
Parsing is strict: unknown keys and constraint violations are all collected
and reported together, so a bad config fails with every offence listed
rather than one at a time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

PROBLEMS = ("cycle-quadratic", "custom-quadratic", "lipschitz-norm", "holder-power")
DOMAINS = ("unconstrained", "box", "simplex")
GEOMETRIES = ("euclidean", "entropy")
SCHEDULES = ("smooth", "hoelder", "lipschitz")
GAP_MODES = ("oracle-optimum", "radius-bound")
VARIANTS = ("plain", "drift", "regularized")

from .solvers import METHODS


class ConfigError(ValueError):
    """Raised with every violation found, one per line."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" + "\n".join(
            f"  - {v}" for v in self.violations))


@dataclass
class ExperimentConfig:
    """Validated experiment description (see parse_config for the grammar)."""

    problem: str = "cycle-quadratic"
    n: int = 100
    nu: float = 0.5                  # holder-power exponent
    problem_seed: int = 0            # custom-quadratic generator seed
    variant: str = "plain"           # cycle-quadratic unconstrained: plain|drift|regularized
    mu: float = 1e-6                 # regularized variant ridge
    domain: str = "simplex"
    box_lower: float = 0.0
    box_upper: float = 1.0
    geometry: str = "entropy"
    methods: tuple[str, ...] = ("axgd", "agd", "gd")
    schedule: str = "smooth"
    sigma: float = 1.0
    L: Optional[float] = None        # smoothness (smooth schedule, gd, agd)
    L_nu: Optional[float] = None     # hoelder constant (defaults to the oracle's)
    D: Optional[float] = None        # hoelder schedule distance scale
    c_override: Optional[float] = None
    R: Optional[float] = None        # lipschitz schedule radius bound
    steps: int = 1000
    eps_eta: tuple[float, ...] = (0.0,)
    num_seeds: int = 1
    base_seed: int = 0
    gap_mode: str = "oracle-optimum"
    gap_radius: Optional[float] = None
    implicit_tol: float = 1e-12
    implicit_max_inner: int = 50
    out_csv: Optional[str] = None
    out_json: Optional[str] = None
    label: str = "run"               # file-name stem used by presets

    def cells(self) -> list[tuple[str, int, int]]:
        """All (method, eps index, seed index) triples, in emission order."""
        return [
            (m, ei, si)
            for m in self.methods
            for ei in range(len(self.eps_eta))
            for si in range(self.num_seeds)
        ]


_INT_KEYS = {"n", "steps", "num_seeds", "base_seed", "problem_seed", "implicit_max_inner"}
_FLOAT_KEYS = {"nu", "sigma", "L", "L_nu", "D", "c_override", "R", "mu",
               "gap_radius", "box_lower", "box_upper", "implicit_tol"}
_STR_KEYS = {"problem", "domain", "geometry", "schedule", "gap_mode", "variant",
             "out_csv", "out_json", "label"}
_LIST_KEYS = {"methods", "eps_eta"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _LIST_KEYS


def _parse_assignments(text: str, errors: list[str]) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in pairs:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        pairs[key] = value
    return pairs


def _convert(key: str, value: str, errors: list[str]):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key == "methods":
            return tuple(v.strip() for v in value.split(",") if v.strip())
        if key == "eps_eta":
            return tuple(float(v) for v in value.split(","))
    except ValueError:
        errors.append(f"key {key!r}: cannot parse {value!r}")
        return None
    return value


def validate(cfg: ExperimentConfig) -> list[str]:
    """All constraint violations of a structurally complete config."""
    errors: list[str] = []
    if cfg.problem not in PROBLEMS:
        errors.append(f"problem must be one of {PROBLEMS}, got {cfg.problem!r}")
    if cfg.domain not in DOMAINS:
        errors.append(f"domain must be one of {DOMAINS}, got {cfg.domain!r}")
    if cfg.geometry not in GEOMETRIES:
        errors.append(f"geometry must be one of {GEOMETRIES}, got {cfg.geometry!r}")
    if cfg.schedule not in SCHEDULES:
        errors.append(f"schedule must be one of {SCHEDULES}, got {cfg.schedule!r}")
    if cfg.gap_mode not in GAP_MODES:
        errors.append(f"gap_mode must be one of {GAP_MODES}, got {cfg.gap_mode!r}")
    if cfg.variant not in VARIANTS:
        errors.append(f"variant must be one of {VARIANTS}, got {cfg.variant!r}")
    if not cfg.methods:
        errors.append("methods must name at least one method")
    for m in cfg.methods:
        if m not in METHODS:
            errors.append(f"methods: unknown method {m!r} (choose from {METHODS})")
    if len(set(cfg.methods)) != len(cfg.methods):
        errors.append("methods: duplicates not allowed")
    if cfg.n < 1:
        errors.append(f"n must be >= 1, got {cfg.n}")
    if cfg.steps < 1:
        errors.append(f"steps must be >= 1, got {cfg.steps}")
    if cfg.num_seeds < 1:
        errors.append(f"num_seeds must be >= 1, got {cfg.num_seeds}")
    if cfg.base_seed < 0:
        errors.append(f"base_seed must be a nonnegative integer, got {cfg.base_seed}")
    if not cfg.eps_eta:
        errors.append("eps_eta must contain at least one value")
    for e in cfg.eps_eta:
        if e < 0:
            errors.append(f"eps_eta values must be >= 0, got {e}")
    if cfg.sigma <= 0:
        errors.append(f"sigma must be positive, got {cfg.sigma}")

    # Geometry/domain compatibility: the entropy mirror map lives on the
    # simplex, and the Euclidean one has no closed-form simplex prox.
    if cfg.geometry == "entropy" and cfg.domain != "simplex":
        errors.append("geometry=entropy requires domain=simplex")
    if cfg.geometry == "euclidean" and cfg.domain == "simplex":
        errors.append("geometry=euclidean does not support domain=simplex "
                      "(use geometry=entropy)")
    if cfg.domain == "box" and not cfg.box_lower < cfg.box_upper:
        errors.append(f"box domain needs box_lower < box_upper, "
                      f"got [{cfg.box_lower}, {cfg.box_upper}]")

    if cfg.problem == "holder-power" and not 0.0 < cfg.nu <= 1.0:
        errors.append(f"holder-power needs nu in (0, 1], got {cfg.nu}")
    if cfg.problem in ("cycle-quadratic", "custom-quadratic") and cfg.n < 2:
        errors.append(f"quadratic problems need n >= 2, got {cfg.n}")
    if cfg.variant != "plain" and not (
            cfg.problem == "cycle-quadratic" and cfg.domain == "unconstrained"):
        errors.append("variant drift/regularized applies only to the "
                      "unconstrained cycle-quadratic problem")
    if cfg.mu <= 0:
        errors.append(f"mu must be positive, got {cfg.mu}")

    if cfg.schedule == "smooth" and cfg.L is not None and cfg.L <= 0:
        errors.append(f"L must be positive, got {cfg.L}")
    if cfg.schedule == "hoelder":
        if cfg.problem != "holder-power" and cfg.L_nu is None:
            errors.append("schedule=hoelder needs L_nu unless the problem "
                          "supplies one (holder-power)")
        if cfg.D is not None and cfg.D <= 0:
            errors.append(f"D must be positive, got {cfg.D}")
        if cfg.c_override is not None and cfg.c_override <= 0:
            errors.append(f"c_override must be positive, got {cfg.c_override}")
    if cfg.schedule == "lipschitz" and cfg.R is not None and cfg.R <= 0:
        errors.append(f"R must be positive, got {cfg.R}")

    if cfg.gap_mode == "radius-bound":
        if cfg.gap_radius is None or cfg.gap_radius <= 0:
            errors.append("gap_mode=radius-bound needs gap_radius > 0")
    if cfg.implicit_tol < 0:
        errors.append(f"implicit_tol must be >= 0, got {cfg.implicit_tol}")
    if cfg.implicit_max_inner < 2:
        errors.append(f"implicit_max_inner must be >= 2, got {cfg.implicit_max_inner}")

    gd_like = [m for m in cfg.methods if m in ("gd", "agd")]
    if gd_like and cfg.problem in ("lipschitz-norm",) and cfg.L is None:
        errors.append(f"methods {gd_like} need a smoothness constant L for "
                      f"problem {cfg.problem!r}")
    return errors


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises ConfigError listing every violation."""
    errors: list[str] = []
    pairs = _parse_assignments(text, errors)

    cfg = ExperimentConfig()
    for key, raw in pairs.items():
        value = _convert(key, raw, errors)
        if value is not None:
            setattr(cfg, key, value)

    # Domain-driven defaults when the keys were not given explicitly.
    if "geometry" not in pairs:
        cfg.geometry = "entropy" if cfg.domain == "simplex" else "euclidean"
    if "variant" not in pairs and cfg.problem == "cycle-quadratic" \
            and cfg.domain == "unconstrained":
        # Noisy unconstrained runs default to the ridge-regularized variant,
        # which is bounded below; noiseless ones to drift mode.
        cfg.variant = "regularized" if any(e > 0 for e in cfg.eps_eta) else "drift"

    errors.extend(validate(cfg))
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
