"""
Exact counting for the binary perceptron at desk scale.

For a Gaussian disorder matrix A (M x N) and every sign vector sigma in {-1, +1}^N,
the first violated constraint is the smallest i with A_i sigma <= 0 (M when none is
violated). Its histogram gives every |Z_t| = #{sigma : A_i sigma > 0 for all i <= t}
at once, since Z_t holds exactly the vectors whose first violation is at index >= t.

Enumeration is two-level. The lowest `block_bits` coordinates are expanded into a
dense table of partial products; the remaining high coordinates are walked in
reflected Gray-code order, each step flipping one coordinate j and moving the
high part of A sigma by -2 s_j A[:, j] (s_j the sign before the flip).

Entries of A are standard normals from numpy's Generator.standard_normal
(ziggurat method) over a Philox stream keyed by the instance seed. Rows are
drawn in order, so the instance with M rows is the prefix of the one with M + 1.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from src.PerceptronLab.engines import trials as trial_streams
from src.PerceptronLab.utils.errors import DimensionError, DomainError
from src.PerceptronLab.utils.logger import get_logger

log = get_logger("BinaryExperiment")

MAX_ENUMERATION_DIM = 30
MAX_NAIVE_DIM = 16
# Elements of the dense low-block table (rows x constraints) kept in memory at once.
_BLOCK_ELEMENTS = 1 << 22
_MAX_BLOCK_BITS = 16


@dataclass(frozen=True)
class PerceptronInstance:
    n_dim: int
    n_constraints: int
    matrix: np.ndarray = field(repr=False)
    seed: int = 0

    def __post_init__(self):
        if self.matrix.shape != (self.n_constraints, self.n_dim):
            raise DomainError(
                f"matrix shape {self.matrix.shape} does not match ({self.n_constraints}, {self.n_dim})"
            )

    @property
    def alpha(self):
        return self.n_constraints / self.n_dim

    def prefix(self, t):
        """The instance made of the first t constraints."""
        if not (0 <= t <= self.n_constraints):
            raise DomainError(f"prefix length must lie in [0, {self.n_constraints}], got {t}")
        return PerceptronInstance(self.n_dim, t, self.matrix[:t], self.seed)


def constraints_for(alpha, n_dim):
    """M = ceil(alpha N); the small offset keeps alpha N = integer from rounding up."""
    if not alpha >= 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    return int(math.ceil(alpha * n_dim - 1e-12))


def sample_instance(n_dim, n_constraints, seed, max_dim=MAX_ENUMERATION_DIM):
    """
    Draw A with iid N(0, 1) entries, deterministically from `seed`.

    max_dim is the enumeration guard; spherical experiments that never enumerate
    pass a larger value.
    """
    if n_dim < 1:
        raise DomainError(f"n_dim must be >= 1, got {n_dim}")
    if n_dim > max_dim:
        raise DimensionError(f"n_dim={n_dim} exceeds the limit of {max_dim}")
    if n_constraints < 0:
        raise DomainError(f"n_constraints must be >= 0, got {n_constraints}")
    rng = trial_streams.make_generator(seed)
    matrix = rng.standard_normal((n_constraints, n_dim))
    matrix.setflags(write=False)
    return PerceptronInstance(n_dim, n_constraints, matrix, int(seed))


@dataclass(frozen=True)
class BinaryCountReport:
    counts: np.ndarray            # |Z_t| for t = 0..M, int64
    empirical_capacity_steps: int
    seed: int
    n_dim: int
    n_constraints: int

    @property
    def empirical_capacity(self):
        return self.empirical_capacity_steps / self.n_dim

    def to_dict(self):
        return {
            "seed": self.seed,
            "n_dim": self.n_dim,
            "n_constraints": self.n_constraints,
            "counts": [int(c) for c in self.counts],
            "empirical_capacity_steps": self.empirical_capacity_steps,
            "empirical_capacity": self.empirical_capacity,
        }


def _check_enumerable(instance, limit=MAX_ENUMERATION_DIM):
    if instance.n_dim > limit:
        raise DimensionError(f"n_dim={instance.n_dim} exceeds the enumeration limit of {limit}")


def _sign_table(bits):
    """All 2^bits sign patterns as rows; bit j of the row index set means sigma_j = -1."""
    index = np.arange(1 << bits, dtype=np.int64)[:, None]
    return 1.0 - 2.0 * ((index >> np.arange(bits)) & 1)


def _first_violation(products, n_constraints):
    # products: (rows, M). A tie A_i sigma == 0 counts as a violation.
    satisfied = products > 0.0
    first = np.argmin(satisfied, axis=1)
    return np.where(satisfied.all(axis=1), n_constraints, first)


def _report_from_histogram(histogram, instance):
    # counts[t] = #{sigma : first violation >= t}
    counts = np.cumsum(histogram[::-1])[::-1].astype(np.int64)
    nonzero = np.nonzero(counts)[0]
    steps = int(nonzero[-1]) if nonzero.size else 0
    return BinaryCountReport(
        counts=counts,
        empirical_capacity_steps=steps,
        seed=instance.seed,
        n_dim=instance.n_dim,
        n_constraints=instance.n_constraints,
    )


def _block_bits(n_dim, n_constraints):
    budget = int(math.log2(max(1, _BLOCK_ELEMENTS // max(1, n_constraints))))
    return max(1, min(n_dim, _MAX_BLOCK_BITS, budget))


def count_solutions(instance):
    """
    Exact |Z_t| for t = 0..M.

    Raises:
        DimensionError: n_dim above the enumeration limit.
    """
    _check_enumerable(instance)
    n, m = instance.n_dim, instance.n_constraints
    if m == 0:
        return _report_from_histogram(np.array([1 << n], dtype=np.int64), instance)

    low = _block_bits(n, m)
    high = n - low
    a = np.asarray(instance.matrix, dtype=float)
    low_products = _sign_table(low) @ a[:, :low].T          # (2^low, M)
    high_columns = a[:, low:]                               # (M, high)

    signs = np.ones(high)
    partial = high_columns.sum(axis=1)                      # A_high @ (+1, ..., +1)
    histogram = np.zeros(m + 1, dtype=np.int64)
    for step in range(1 << high):
        if step:
            j = (step & -step).bit_length() - 1             # coordinate flipped by Gray step
            partial = partial - 2.0 * signs[j] * high_columns[:, j]
            signs[j] = -signs[j]
        first = _first_violation(low_products + partial, m)
        histogram += np.bincount(first, minlength=m + 1)
    return _report_from_histogram(histogram, instance)


def count_solutions_naive(instance):
    """Reference count: A sigma formed from scratch for every sigma. n_dim <= 16."""
    _check_enumerable(instance, MAX_NAIVE_DIM)
    m = instance.n_constraints
    if m == 0:
        return _report_from_histogram(np.array([1 << instance.n_dim], dtype=np.int64), instance)
    products = _sign_table(instance.n_dim) @ np.asarray(instance.matrix, dtype=float).T
    first = _first_violation(products, m)
    return _report_from_histogram(np.bincount(first, minlength=m + 1), instance)


def empirical_capacity(instance):
    """Largest t with Z_t nonempty, divided by N."""
    return count_solutions(instance).empirical_capacity


def _binary_trial(task):
    n_dim, n_constraints, seed = task
    return count_solutions(sample_instance(n_dim, n_constraints, seed))


@dataclass
class BinaryTrials:
    n_dim: int
    alpha: float
    n_constraints: int
    master_seed: int
    reports: list
    summary: dict


def summarize_counts(reports, n_dim):
    """
    Per-t mean of |Z_t| across trials against E|Z_t| = 2^(N - t).

    se is the empirical standard error (ddof 1); z is None when se is undefined
    (one trial) or zero while the mean differs from the expectation.
    """
    counts = np.vstack([r.counts for r in reports]).astype(float)
    trials = counts.shape[0]
    means = counts.mean(axis=0)
    if trials > 1:
        se = counts.std(axis=0, ddof=1) / math.sqrt(trials)
    else:
        se = np.full_like(means, np.nan)

    rows = []
    for t, (mean, err) in enumerate(zip(means, se)):
        expected = float(2.0 ** (n_dim - t))
        if not np.isfinite(err):
            z = None
        elif err == 0.0:
            z = 0.0 if mean == expected else None
        else:
            z = float((mean - expected) / err)
        rows.append({
            "t": t,
            "mean": float(mean),
            "se": None if not np.isfinite(err) else float(err),
            "expected": expected,
            "z": z,
        })
    capacities = np.array([r.empirical_capacity for r in reports])
    z_values = [abs(r["z"]) for r in rows if r["z"] is not None]
    return {
        "trials": trials,
        "per_t": rows,
        "max_abs_z": max(z_values) if z_values else None,
        "capacity_mean": float(capacities.mean()),
        "capacity_se": float(capacities.std(ddof=1) / math.sqrt(trials)) if trials > 1 else None,
    }


def run_binary_trials(n_dim, alpha, trials, master_seed, workers=1):
    """Count solutions on `trials` independent instances with seeds derived from master_seed."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if n_dim > MAX_ENUMERATION_DIM:
        raise DimensionError(f"n_dim={n_dim} exceeds the enumeration limit of {MAX_ENUMERATION_DIM}")
    n_constraints = constraints_for(alpha, n_dim)
    seeds = trial_streams.derive_seeds(master_seed, trials)
    log.info(f"N={n_dim} M={n_constraints} trials={trials} master_seed={master_seed}")
    reports = trial_streams.run_trials(
        _binary_trial, [(n_dim, n_constraints, s) for s in seeds], workers, label="binary"
    )
    summary = summarize_counts(reports, n_dim)
    if summary["max_abs_z"] is not None:
        log.info(f"max |z| over t: {summary['max_abs_z']:.3f}")
    return BinaryTrials(n_dim, alpha, n_constraints, int(master_seed), reports, summary)
