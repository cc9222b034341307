"""
Gaussian expectations E[f(u)], u ~ N(0, 1), and the log-tail expectation
E[ln H(u sqrt(q / (1 - q)))] that drives the Gardner-Derrida functional.

Two rules:

- gauss_hermite: probabilists' Gauss-Hermite nodes from scipy.special.roots_hermitenorm
  (Golub-Welsch below 150 nodes, Glaser-Liu-Rokhlin/Townsend asymptotics above),
  cached per node count. The rule is run at n and 2n nodes; the difference is the
  error estimate, and the node count keeps doubling up to max_nodes.
- adaptive_interval: QUADPACK (scipy.integrate.quad) on [-w, w] with a breakpoint at
  the origin; the Gaussian mass outside [-w, w] is added to the error estimate.
"""
import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from src.PerceptronLab.engines import specfun
from src.PerceptronLab.utils.errors import DomainError, NonConvergence
from src.PerceptronLab.utils.config import section
from src.PerceptronLab.utils.logger import get_logger

log = get_logger("Quadrature")

MIN_HERMITE_NODES = 16
MIN_HALF_WIDTH = 8.0
# Above this overlap the log-tail expectation is evaluated in split form.
SPLIT_Q = 0.99
# Kronrod nodes per QUADPACK subinterval; converts a node budget into a subinterval limit.
_KRONROD_POINTS = 21


class QuadratureRule(str, Enum):
    GAUSS_HERMITE = "gauss_hermite"
    ADAPTIVE_INTERVAL = "adaptive_interval"


@dataclass(frozen=True)
class QuadratureSpec:
    rule: QuadratureRule = QuadratureRule.GAUSS_HERMITE
    node_count: int = 400
    interval_half_width: float = 12.0
    abs_tol: float = 1e-10
    max_nodes: int = 12800

    def __post_init__(self):
        try:
            object.__setattr__(self, "rule", QuadratureRule(self.rule))
        except ValueError:
            raise DomainError(f"unknown quadrature rule {self.rule!r}")
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.rule is QuadratureRule.GAUSS_HERMITE and self.node_count < MIN_HERMITE_NODES:
            raise DomainError(f"gauss_hermite needs node_count >= {MIN_HERMITE_NODES}, got {self.node_count}")
        if self.rule is QuadratureRule.ADAPTIVE_INTERVAL and self.interval_half_width < MIN_HALF_WIDTH:
            raise DomainError(
                f"adaptive_interval needs interval_half_width >= {MIN_HALF_WIDTH}, got {self.interval_half_width}"
            )
        if self.max_nodes < 2 * self.node_count:
            raise DomainError("max_nodes must allow at least one doubling of node_count")

    @classmethod
    def from_config(cls, config=None, **overrides):
        quad = section(config, "quadrature")
        params = {
            "rule": quad.get("rule", cls.rule.value),
            "node_count": int(quad.get("node_count", cls.node_count)),
            "interval_half_width": float(quad.get("interval_half_width", cls.interval_half_width)),
            "abs_tol": float(quad.get("abs_tol", cls.abs_tol)),
            "max_nodes": int(quad.get("max_nodes", cls.max_nodes)),
        }
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**params)

    def as_adaptive(self):
        return replace(self, rule=QuadratureRule.ADAPTIVE_INTERVAL,
                       interval_half_width=max(self.interval_half_width, MIN_HALF_WIDTH))

    def to_dict(self):
        return {
            "rule": self.rule.value,
            "node_count": self.node_count,
            "interval_half_width": self.interval_half_width,
            "abs_tol": self.abs_tol,
            "max_nodes": self.max_nodes,
        }


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class ExpectationResult:
    value: float
    error_estimate: float
    nodes_used: int


@lru_cache(maxsize=None)
def hermite_nodes(n):
    """Nodes and weights for E[f(u)] under the standard normal; read-only arrays."""
    x, w = special.roots_hermitenorm(n)
    w = w / specfun.SQRT_2PI
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _hermite_sum(f, n):
    x, w = hermite_nodes(n)
    keep = w > 0.0
    values = np.fromiter((f(float(u)) for u in x[keep]), dtype=float, count=int(keep.sum()))
    if not np.all(np.isfinite(values)):
        bad = float(x[keep][~np.isfinite(values)][0])
        raise DomainError(f"integrand is not finite at node u={bad}")
    return math.fsum(w[keep] * values), int(keep.sum())


def _gauss_hermite(f, spec):
    n = spec.node_count
    previous, used = _hermite_sum(f, n)
    error = math.inf
    while 2 * n <= spec.max_nodes:
        n *= 2
        current, count = _hermite_sum(f, n)
        used += count
        error = abs(current - previous)
        if error <= spec.abs_tol:
            return ExpectationResult(current, error, used)
        previous = current
    raise NonConvergence(
        f"gauss_hermite did not reach abs_tol={spec.abs_tol:g} within {spec.max_nodes} nodes "
        f"(last difference {error:.3g})",
        best_value=previous, achieved_error=error, nodes_used=used,
    )


def _adaptive_interval(f, spec, breakpoints=(0.0,)):
    w = spec.interval_half_width
    limit = max(50, spec.max_nodes // _KRONROD_POINTS)
    points = sorted({p for p in breakpoints if -w < p < w})

    def integrand(u):
        return specfun.gauss_pdf(u) * f(u)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(integrand, -w, w, points=points or None,
                             epsabs=0.5 * spec.abs_tol, epsrel=0.0, limit=limit, full_output=1)
    value, quad_error, info = out[0], out[1], out[2]
    # Mass outside [-w, w], scaled by the integrand at the cut (heuristic, negligible for w >= 8).
    tail = 2.0 * specfun.gauss_tail(w) * max(abs(f(w)), abs(f(-w)), 1.0)
    error = quad_error + tail
    used = int(info.get("neval", 0)) or 1
    if len(out) > 3 or error > spec.abs_tol:
        raise NonConvergence(
            f"adaptive_interval did not reach abs_tol={spec.abs_tol:g} (estimate {error:.3g})",
            best_value=value, achieved_error=error, nodes_used=used,
        )
    return ExpectationResult(value, error, used)


def gaussian_expectation(f, spec=DEFAULT_SPEC, breakpoints=(0.0,)):
    """
    E[f(u)] for u standard normal.

    Parameters:
        f (callable): scalar function float -> float, finite on the effective range.
        spec (QuadratureSpec): rule and tolerances.
        breakpoints (tuple): extra interior points for the adaptive rule.

    Returns:
        ExpectationResult with error_estimate <= spec.abs_tol.

    Raises:
        NonConvergence: the tolerance is not reachable within the node budget.
    """
    if spec.rule is QuadratureRule.GAUSS_HERMITE:
        return _gauss_hermite(f, spec)
    return _adaptive_interval(f, spec, breakpoints)


def _log_tail_plus_half_square(x):
    # ln H(x) + x^2/2 on x > 0, which equals ln R(x) - ln sqrt(2 pi); plain ln H(x) on x <= 0.
    if x > 0.0:
        return math.log(specfun.mills_ratio(x)) - specfun.LOG_SQRT_2PI
    return specfun.log_gauss_tail(x)


def _expected_log_tail_direct(q, spec):
    scale = math.sqrt(q / (1.0 - q))
    f = lambda u: specfun.log_gauss_tail(scale * u)
    try:
        return gaussian_expectation(f, spec)
    except NonConvergence as e:
        if spec.rule is not QuadratureRule.GAUSS_HERMITE:
            raise
        log.warn(f"q={q}: {e}; retrying with adaptive_interval")
        return gaussian_expectation(f, spec.as_adaptive())


def _expected_log_tail_split(q, spec):
    # E[ln H(s u)] = -s^2/4 + E[ln H(s u) + (s u)^2/2 * 1{u > 0}],  s^2 = q / (1 - q),
    # since E[u^2 1{u > 0}] = 1/2. The remainder grows only like -ln(s)/2.
    scale = math.sqrt(q / (1.0 - q))
    width = 5.0 / scale
    correction = gaussian_expectation(
        lambda u: _log_tail_plus_half_square(scale * u),
        spec.as_adaptive(),
        breakpoints=(-width, 0.0, width),
    )
    leading = -0.25 * q / (1.0 - q)
    return ExpectationResult(leading + correction.value, correction.error_estimate, correction.nodes_used)


@lru_cache(maxsize=8192)
def expected_log_tail(q, spec=DEFAULT_SPEC):
    """
    E[ln H(u sqrt(q/(1-q)))] for q in [0, 1).

    Always built on ln H from specfun.log_gauss_tail, never on log(H). For q above
    SPLIT_Q the quadratic growth -q/(4(1-q)) is split off exactly and only the
    logarithmic remainder is integrated (adaptive rule regardless of spec.rule).
    """
    if not (0.0 <= q < 1.0) or math.isnan(q):
        raise DomainError(f"q must lie in [0, 1), got {q}")
    if q == 0.0:
        return ExpectationResult(-math.log(2.0), 0.0, 1)
    if q > SPLIT_Q:
        return _expected_log_tail_split(q, spec)
    return _expected_log_tail_direct(q, spec)
