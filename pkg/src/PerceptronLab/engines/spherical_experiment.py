"""
Monte Carlo estimates of the spherical free energy

    F(A) = (1/N) max{ ln( Vol(B_N ∩ {A x > 0}) / Vol(B_N) ), -N^2 }

and a perceptron feasibility search for the spherical cone.

Ball versus cone: {x : A x > 0} is a cone with apex at the origin, so it contains
x iff it contains x/|x|. In polar coordinates the ball volume of the cone is its
surface fraction on S^(N-1) times Vol(B_N), hence the volume fraction equals
P(A g > 0) for g ~ N(0, I_N), whose direction is uniform on the sphere. Both
estimators below sample directions and never radii.

- direct_gaussian: hit fraction of iid Gaussian directions; stderr by the delta
  method, sqrt((1 - p) / (n p)) / N.
- sequential_conditioning: the chain rule over nested cones,
  ln P(A x > 0) = sum_i ln P(A_i x > 0 | A_j x > 0 for j < i). Step 1 uses iid
  directions; step i >= 2 samples the cone of the first i - 1 rows by hit-and-run
  on great circles. A step whose conditional probability is too small to see
  with plain sampling is split into levels of the relaxed constraint
  a_i.x / |a_i| > c, with c raised toward 0 one quantile at a time. Per-step
  binomial variances are added as if the steps were independent, which
  understates the error of correlated chains.

A run with zero hits reports the floor -N (ln volume cut at -N^2) with
truncated = True.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import stats
from tenacity import retry, retry_if_exception_type, stop_after_attempt

from src.PerceptronLab.engines import gardner_derrida as gd
from src.PerceptronLab.engines import trials as trial_streams
from src.PerceptronLab.engines.binary_experiment import constraints_for, sample_instance
from src.PerceptronLab.engines.quadrature import DEFAULT_SPEC
from src.PerceptronLab.utils.errors import ConeEmpty, DomainError, SampleError
from src.PerceptronLab.utils.logger import get_logger

log = get_logger("SphericalExperiment")

SPHERICAL_MAX_DIM = 4096
DIRECT_BATCH = 1 << 16
MIN_SAMPLES_PER_STEP = 100
DEFAULT_BURN_IN = 50
DEFAULT_THINNING = 5
DEFAULT_CHAINS = 20
DEFAULT_MAX_ITERS = 20000
DEFAULT_RETRIES = 3
# Fraction of a sequential sample kept per splitting level.
SPLIT_FRACTION = 0.1
MAX_SPLIT_LEVELS = 50
CONCENTRATION_RATIO = 1.5


class EstimatorMethod(str, Enum):
    DIRECT_GAUSSIAN = "direct_gaussian"
    SEQUENTIAL_CONDITIONING = "sequential_conditioning"

    @classmethod
    def parse(cls, name):
        aliases = {"direct": cls.DIRECT_GAUSSIAN, "sequential": cls.SEQUENTIAL_CONDITIONING}
        if name in aliases:
            return aliases[name]
        try:
            return cls(name)
        except ValueError:
            raise DomainError(f"unknown estimator method {name!r}; use direct or sequential")


@dataclass(frozen=True)
class SphericalFreeEnergyEstimate:
    f_hat: float
    stderr: float
    method: EstimatorMethod
    samples: int
    truncated: bool
    n_dim: int
    n_constraints: int
    seed: int
    hits: Optional[int] = None
    step_log_probabilities: tuple = field(default_factory=tuple)

    def to_dict(self):
        return {
            "seed": self.seed,
            "method": self.method.value,
            "n_dim": self.n_dim,
            "n_constraints": self.n_constraints,
            "f_hat": self.f_hat,
            "stderr": self.stderr,
            "samples": self.samples,
            "truncated": self.truncated,
            "hits": self.hits,
            "step_log_probabilities": list(self.step_log_probabilities),
        }


def free_energy_floor(n_dim):
    """(1/N) * (-N^2)."""
    return -float(n_dim)


def _floored(log_fraction, n_dim):
    return max(log_fraction, -float(n_dim) ** 2) / n_dim


def _truncated(instance, method, samples, seed, steps=()):
    return SphericalFreeEnergyEstimate(
        f_hat=free_energy_floor(instance.n_dim), stderr=0.0, method=method, samples=samples,
        truncated=True, n_dim=instance.n_dim, n_constraints=instance.n_constraints,
        seed=seed, hits=0, step_log_probabilities=tuple(steps),
    )


def in_cone(matrix, directions):
    """Rows of `directions` with matrix @ x > 0 entrywise. Invariant under x -> c x, c > 0."""
    directions = np.atleast_2d(directions)
    if matrix.shape[0] == 0:
        return np.ones(directions.shape[0], dtype=bool)
    return (directions @ matrix.T > 0.0).all(axis=1)


def _gaussian_hits(rng, matrix, n_dim, samples):
    hits, remaining = 0, samples
    while remaining > 0:
        size = min(DIRECT_BATCH, remaining)
        hits += int(in_cone(matrix, rng.standard_normal((size, n_dim))).sum())
        remaining -= size
    return hits


def _binomial_log_variance(hits, samples):
    # Var ln p_hat ~ (1 - p) / (n p)
    p = hits / samples
    return (1.0 - p) / (samples * p)


def estimate_f_direct(instance, samples, seed):
    """
    Direct Gaussian estimate of F(A).

    Raises:
        SampleError: samples < 1.
    """
    if samples < 1:
        raise SampleError(f"samples must be >= 1, got {samples}")
    method = EstimatorMethod.DIRECT_GAUSSIAN
    n = instance.n_dim
    if instance.n_constraints == 0:
        return SphericalFreeEnergyEstimate(0.0, 0.0, method, samples, False, n, 0, int(seed), samples)

    rng = trial_streams.make_generator(seed)
    hits = _gaussian_hits(rng, np.asarray(instance.matrix), n, samples)
    if hits == 0:
        return _truncated(instance, method, samples, int(seed))
    log_fraction = math.log(hits / samples)
    return SphericalFreeEnergyEstimate(
        f_hat=_floored(log_fraction, n),
        stderr=math.sqrt(_binomial_log_variance(hits, samples)) / n,
        method=method,
        samples=samples,
        truncated=False,
        n_dim=n,
        n_constraints=instance.n_constraints,
        seed=int(seed),
        hits=hits,
        step_log_probabilities=(log_fraction,),
    )


@dataclass(frozen=True)
class FeasibilityResult:
    witness: Optional[np.ndarray]
    iterations: int
    min_margin: Optional[float]

    @property
    def found(self):
        return self.witness is not None


def spherical_feasibility(instance, max_iters=DEFAULT_MAX_ITERS, start=None, rows=None):
    """
    Look for a unit sigma with A sigma > 0 entrywise by perceptron updates.

    Each update adds the most violated unit-normalised row to an unnormalised
    w; only the returned witness is scaled to length 1. The default start is the
    minimum-norm least-squares solution of (A_i / |A_i|) w = 1, which is already a
    witness when M <= N, with A_1 / |A_1| in its place if it vanishes. A returned
    witness has been checked by direct multiplication; not finding one is
    inconclusive.

    Parameters:
        rows (int): use only the first `rows` constraints (default: all).
        start (array): initial w instead of the least-squares start.
    """
    if max_iters < 1:
        raise DomainError(f"max_iters must be >= 1, got {max_iters}")
    matrix = np.asarray(instance.matrix, dtype=float)
    if rows is not None:
        matrix = matrix[:rows]
    n = instance.n_dim
    if matrix.shape[0] == 0:
        w = np.zeros(n)
        w[0] = 1.0
        return FeasibilityResult(w, 0, None)

    norms = np.linalg.norm(matrix, axis=1)
    unit_rows = matrix / norms[:, None]
    if start is not None:
        w = np.array(start, dtype=float)
    else:
        w = np.linalg.lstsq(unit_rows, np.ones(unit_rows.shape[0]), rcond=None)[0]
        if not np.linalg.norm(w) > 0.0:
            w = unit_rows[0].copy()
    for it in range(1, max_iters + 1):
        margins = unit_rows @ w
        worst = int(np.argmin(margins))
        if margins[worst] > 0.0:
            witness = w / np.linalg.norm(w)
            products = matrix @ witness
            if np.all(products > 0.0):
                return FeasibilityResult(witness, it - 1, float(products.min()))
        w = w + unit_rows[worst]
        if np.linalg.norm(w) == 0.0:
            break
    return FeasibilityResult(None, max_iters, None)


def find_cone_start(instance, rows, rng, max_iters=DEFAULT_MAX_ITERS, retries=DEFAULT_RETRIES):
    """
    A unit vector inside the cone of the first `rows` constraints.

    The first attempt uses the least-squares start; each retry restarts the
    perceptron from a fresh uniform direction.

    Raises:
        ConeEmpty: no attempt found a witness.
    """
    attempts = []

    @retry(stop=stop_after_attempt(max(1, retries)), retry=retry_if_exception_type(ConeEmpty), reraise=True)
    def attempt():
        start = rng.standard_normal(instance.n_dim) if attempts else None
        attempts.append(start)
        result = spherical_feasibility(instance, max_iters, start=start, rows=rows)
        if not result.found:
            raise ConeEmpty(f"no direction found inside the first {rows} constraints", constraint_index=rows)
        return result.witness

    return attempt()


def hit_and_run_step(points, matrix, rng, relaxed=None):
    """
    One great-circle move per row of `points` (unit vectors inside the cone of
    `matrix`).

    A uniform direction d orthogonal to x spans the circle x cos(t) + d sin(t). Row a
    is positive on it iff |t - atan2(a.d, a.x)| < pi/2, an arc around t = 0, so the
    feasible set is the interval (max_j phi_j - pi/2, min_j phi_j + pi/2); t is drawn
    uniformly from it. Uniform arc length keeps the uniform law on the cone stationary.

    relaxed = (u, c) adds u.x > c for a unit u. On the circle u.x = r cos(t - psi)
    with r = hypot(u.x, u.d) and psi = atan2(u.d, u.x), so the arc around t = 0
    narrows to |t - psi| < arccos(c / r) (the whole circle when c <= -r).
    """
    chains, n = points.shape
    d = rng.standard_normal((chains, n))
    d -= np.sum(d * points, axis=1, keepdims=True) * points
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    phi = np.arctan2(d @ matrix.T, points @ matrix.T)
    lo = phi.max(axis=1) - 0.5 * np.pi if matrix.shape[0] else np.full(chains, -np.pi)
    hi = phi.min(axis=1) + 0.5 * np.pi if matrix.shape[0] else np.full(chains, np.pi)
    if relaxed is not None:
        u, level = relaxed
        ux, ud = points @ u, d @ u
        r = np.hypot(ux, ud)
        ratio = np.where(r > 0.0, level / np.where(r > 0.0, r, 1.0), -1.0)
        half = np.arccos(np.clip(ratio, -1.0, 1.0))
        psi = np.arctan2(ud, ux)
        lo = np.maximum(lo, psi - half)
        hi = np.minimum(hi, psi + half)
    theta = lo + (hi - lo) * rng.random(chains)
    theta = np.where(hi > lo, theta, 0.0)
    moved = points * np.cos(theta)[:, None] + d * np.sin(theta)[:, None]
    return moved / np.linalg.norm(moved, axis=1, keepdims=True)


def sample_cone(starts, matrix, count, rng, burn_in=DEFAULT_BURN_IN, thinning=DEFAULT_THINNING, relaxed=None):
    """`count` hit-and-run samples from the cone of `matrix`, chains started at `starts`."""
    points = np.array(starts, dtype=float)
    for _ in range(burn_in):
        points = hit_and_run_step(points, matrix, rng, relaxed)
    chains = points.shape[0]
    rounds = -(-count // chains)
    kept = []
    for _ in range(rounds):
        for _ in range(thinning):
            points = hit_and_run_step(points, matrix, rng, relaxed)
        kept.append(points)
    return np.concatenate(kept)[:count]


def split_rare_step(sample, cone, row, rng, chains=DEFAULT_CHAINS, burn_in=DEFAULT_BURN_IN,
                    thinning=DEFAULT_THINNING):
    """
    ln P(row.x > 0) for x uniform on the cone of `cone`, by adaptive multilevel
    splitting from `sample` (points of that cone).

    With u = row / |row|, each level sets c to the (1 - SPLIT_FRACTION) quantile of
    u.x, multiplies in the fraction above c and resamples the cone intersected with
    {u.x > c} from the survivors. The last factor is the fraction with u.x > 0, taken
    once it reaches SPLIT_FRACTION.

    Returns:
        (log_probability, variance, hits, samples drawn), where hits are the final
        points with row.x > 0; None when MAX_SPLIT_LEVELS levels do not get there.
    """
    u = row / np.linalg.norm(row)
    count = sample.shape[0]
    log_p, variance, drawn = 0.0, 0.0, 0
    for _ in range(MAX_SPLIT_LEVELS):
        scores = sample @ u
        hit_mask = scores > 0.0
        hits = int(hit_mask.sum())
        if hits > 0 and hits >= SPLIT_FRACTION * count:
            log_p += math.log(hits / count)
            variance += _binomial_log_variance(hits, count)
            return log_p, variance, sample[hit_mask], drawn
        level = float(np.quantile(scores, 1.0 - SPLIT_FRACTION))
        survivors = sample[scores > level]
        if survivors.shape[0] == 0:
            return None
        log_p += math.log(survivors.shape[0] / count)
        variance += _binomial_log_variance(survivors.shape[0], count)
        starts = survivors[rng.integers(0, survivors.shape[0], size=chains)]
        sample = sample_cone(starts, cone, count, rng, burn_in, thinning, relaxed=(u, level))
        drawn += count
    return None


def estimate_f_sequential(instance, samples_per_step, seed, burn_in=DEFAULT_BURN_IN,
                          thinning=DEFAULT_THINNING, chains=DEFAULT_CHAINS,
                          max_iters=DEFAULT_MAX_ITERS, retries=DEFAULT_RETRIES):
    """
    Chain-rule estimate of F(A) over the nested cones of the first i rows.

    Chains for step i start from hits of step i - 1. A step where fewer than
    SPLIT_FRACTION of the samples are hits is estimated by split_rare_step. With
    zero hits the perceptron must first find a witness of the next cone, and
    ConeEmpty gives the truncated floor; so does a stalled split.

    Raises:
        SampleError: samples_per_step < MIN_SAMPLES_PER_STEP.
    """
    if samples_per_step < MIN_SAMPLES_PER_STEP:
        raise SampleError(f"samples_per_step must be >= {MIN_SAMPLES_PER_STEP}, got {samples_per_step}")
    if chains < 1 or thinning < 1 or burn_in < 0:
        raise DomainError("need chains >= 1, thinning >= 1 and burn_in >= 0")
    method = EstimatorMethod.SEQUENTIAL_CONDITIONING
    n, m = instance.n_dim, instance.n_constraints
    if m == 0:
        return SphericalFreeEnergyEstimate(0.0, 0.0, method, 0, False, n, 0, int(seed), None)

    rng = trial_streams.make_generator(seed)
    matrix = np.asarray(instance.matrix, dtype=float)

    # Step 1 on iid directions, drawn exactly as the direct estimator draws them.
    points = np.concatenate([
        rng.standard_normal((min(DIRECT_BATCH, samples_per_step - k), n))
        for k in range(0, samples_per_step, DIRECT_BATCH)
    ])
    hit_mask = points @ matrix[0] > 0.0
    hits = int(hit_mask.sum())
    if hits == 0:
        return _truncated(instance, method, samples_per_step, int(seed))
    steps = [math.log(hits / samples_per_step)]
    variance = _binomial_log_variance(hits, samples_per_step)
    total = samples_per_step
    pool = points[hit_mask]
    pool /= np.linalg.norm(pool, axis=1, keepdims=True)

    for i in range(1, m):
        cone = matrix[:i]
        starts = pool[rng.integers(0, pool.shape[0], size=chains)]
        sample = sample_cone(starts, cone, samples_per_step, rng, burn_in, thinning)
        total += samples_per_step
        hit_mask = sample @ matrix[i] > 0.0
        hits = int(hit_mask.sum())
        if hits >= SPLIT_FRACTION * samples_per_step:
            steps.append(math.log(hits / samples_per_step))
            variance += _binomial_log_variance(hits, samples_per_step)
            pool = sample[hit_mask]
            continue

        if hits == 0:
            try:
                find_cone_start(instance, i + 1, rng, max_iters, retries)
            except ConeEmpty as e:
                log.warn(f"seed={seed}: {e}; reporting the truncated floor")
                return _truncated(instance, method, total, int(seed), steps)
        log.debug(f"seed={seed}: {hits} hits at constraint {i + 1}; splitting")
        split = split_rare_step(sample, cone, matrix[i], rng, chains, burn_in, thinning)
        if split is None:
            log.warn(f"seed={seed}: splitting stalled at constraint {i + 1}; reporting the truncated floor")
            return _truncated(instance, method, total, int(seed), steps)
        log_p, step_variance, pool, drawn = split
        total += drawn
        steps.append(log_p)
        variance += step_variance

    log_fraction = math.fsum(steps)
    return SphericalFreeEnergyEstimate(
        f_hat=_floored(log_fraction, n),
        stderr=math.sqrt(variance) / n,
        method=method,
        samples=total,
        truncated=False,
        n_dim=n,
        n_constraints=m,
        seed=int(seed),
        hits=None,
        step_log_probabilities=tuple(steps),
    )


def estimate_f(instance, method, samples, seed, **kwargs):
    method = EstimatorMethod.parse(method) if isinstance(method, str) else method
    if method is EstimatorMethod.DIRECT_GAUSSIAN:
        return estimate_f_direct(instance, samples, seed)
    return estimate_f_sequential(instance, samples, seed, **kwargs)


def gd_reference(alpha, spec=DEFAULT_SPEC):
    """GD(alpha) for alpha in (0, 2); None outside the formula's range."""
    try:
        return gd.gd_min(alpha, spec).value
    except DomainError:
        return None


def _sphere_trial(task):
    n_dim, n_constraints, seed, method, samples, options = task
    instance = sample_instance(n_dim, n_constraints, seed, max_dim=SPHERICAL_MAX_DIM)
    # Matrix and direction streams are separate children of the trial seed.
    return estimate_f(instance, method, samples, trial_streams.derive_seed(seed, 1), **options)


def summarize_estimates(estimates, alpha, spec=DEFAULT_SPEC):
    """Mean and sample variance of f_hat across trials; variance needs two trials."""
    values = np.array([e.f_hat for e in estimates])
    trials = values.size
    variance = float(values.var(ddof=1)) if trials > 1 else None
    reference = gd_reference(alpha, spec)
    mean = float(values.mean())
    return {
        "trials": trials,
        "mean": mean,
        "variance": variance,
        "variance_applicable": variance is not None,
        "stderr_of_mean": math.sqrt(variance / trials) if variance is not None else None,
        "truncated_runs": int(sum(e.truncated for e in estimates)),
        "gd_reference": reference,
        "mean_minus_gd": None if reference is None else mean - reference,
    }


@dataclass
class SphereTrials:
    n_dim: int
    alpha: float
    n_constraints: int
    method: EstimatorMethod
    master_seed: int
    estimates: list
    summary: dict


def run_sphere_trials(n_dim, alpha, method, samples, trials, master_seed, workers=1, spec=DEFAULT_SPEC, **options):
    """F(A) on `trials` independent instances; per-trial seeds derived from master_seed."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if samples < 1:
        raise SampleError(f"samples must be >= 1, got {samples}")
    method = EstimatorMethod.parse(method) if isinstance(method, str) else method
    n_constraints = constraints_for(alpha, n_dim)
    seeds = trial_streams.derive_seeds(master_seed, trials)
    log.info(f"{method.value}: N={n_dim} M={n_constraints} trials={trials} samples={samples}")
    tasks = [(n_dim, n_constraints, s, method, samples, options) for s in seeds]
    estimates = trial_streams.run_trials(_sphere_trial, tasks, workers, label="sphere")
    summary = summarize_estimates(estimates, alpha, spec)
    if summary["truncated_runs"]:
        log.warn(f"{summary['truncated_runs']} of {trials} runs hit the truncation floor")
    return SphereTrials(n_dim, alpha, n_constraints, method, int(master_seed), estimates, summary)


def variance_probe(alpha, n_dim, trials, samples, seed, method=EstimatorMethod.DIRECT_GAUSSIAN, workers=1,
                   spec=DEFAULT_SPEC):
    """
    f_hat statistics at N and 2N. The concentration trend holds when
    variance(2N) * 1.5 <= variance(N); it is None when either variance is undefined.
    """
    if trials < 10:
        log.warn(f"trials={trials} is below 10; the variance trend is not meaningful")
    sizes = {}
    for k, size in enumerate((n_dim, 2 * n_dim)):
        result = run_sphere_trials(size, alpha, method, samples, trials,
                                   trial_streams.derive_seed(seed, k), workers, spec)
        sizes[size] = result.summary
    small, large = sizes[n_dim]["variance"], sizes[2 * n_dim]["variance"]
    if small is None or large is None:
        trend = None
    else:
        trend = bool(large * CONCENTRATION_RATIO <= small)
    return {
        "alpha": alpha,
        "sizes": {str(k): v for k, v in sizes.items()},
        "variance_ratio": (small / large) if small is not None and large else None,
        "concentration_trend": trend,
        "gd_reference": gd_reference(alpha, spec),
    }


def cover_feasibility_probability(n_dim, n_constraints):
    """
    P(the cone of M Gaussian rows in R^N is nonempty) = 2^(1-M) sum_{k<N} C(M-1, k),
    i.e. a Binomial(M - 1, 1/2) CDF at N - 1. Equals 1/2 at M = 2N.
    """
    if n_dim < 1 or n_constraints < 0:
        raise DomainError("need n_dim >= 1 and n_constraints >= 0")
    if n_constraints == 0:
        return 1.0
    return float(stats.binom.cdf(n_dim - 1, n_constraints - 1, 0.5))


def _feasibility_trial(task):
    n_dim, n_constraints, seed, max_iters = task
    instance = sample_instance(n_dim, n_constraints, seed, max_dim=SPHERICAL_MAX_DIM)
    return spherical_feasibility(instance, max_iters).found


def feasibility_sweep(n_dim, alpha_values, trials, master_seed, max_iters=DEFAULT_MAX_ITERS, workers=1):
    """Witness rate per alpha; one row {alpha, n_constraints, trials, found, rate, cover_rate} each."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    rows = []
    for k, alpha in enumerate(alpha_values):
        m = constraints_for(alpha, n_dim)
        seeds = trial_streams.derive_seeds(trial_streams.derive_seed(master_seed, k), trials)
        found = trial_streams.run_trials(
            _feasibility_trial, [(n_dim, m, s, max_iters) for s in seeds], workers, label=f"feasibility alpha={alpha}"
        )
        hits = int(sum(found))
        rows.append({
            "alpha": float(alpha),
            "n_constraints": m,
            "trials": trials,
            "found": hits,
            "rate": hits / trials,
            "cover_rate": cover_feasibility_probability(n_dim, m),
        })
        log.info(f"alpha={alpha}: witness for {hits}/{trials} (Cover {rows[-1]['cover_rate']:.3f})")
    return rows
