import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.PerceptronLab.engines import gardner_derrida as gd
from src.PerceptronLab.engines import spherical_experiment as sx
from src.PerceptronLab.engines.binary_experiment import PerceptronInstance, constraints_for, sample_instance
from src.PerceptronLab.engines.quadrature import QuadratureRule, QuadratureSpec
from src.PerceptronLab.utils.errors import ConeEmpty, DomainError, SampleError


def sphere_instance(n_dim, n_constraints, seed):
    return sample_instance(n_dim, n_constraints, seed, max_dim=sx.SPHERICAL_MAX_DIM)


def empty_cone():
    return PerceptronInstance(2, 2, np.array([[1.0, 0.0], [-1.0, 0.0]]), seed=0)


def thin_wedge(n_dim, p):
    # Rows e_1 and u at angle pi (1 - p): P(u.x > 0 | x_1 > 0) = p.
    theta = math.pi * (1.0 - p)
    matrix = np.zeros((2, n_dim))
    matrix[0, 0] = 1.0
    matrix[1, :2] = math.cos(theta), math.sin(theta)
    return PerceptronInstance(n_dim, 2, matrix, seed=0)


def test_no_constraints_is_the_whole_sphere():
    estimate = sx.estimate_f_direct(sphere_instance(10, 0, 1), samples=100, seed=1)
    assert estimate.f_hat == 0.0
    assert estimate.stderr == 0.0
    assert not estimate.truncated


def test_single_half_space_hits_half():
    samples = 40_000
    estimate = sx.estimate_f_direct(sphere_instance(10, 1, 4), samples, seed=9)
    fraction = estimate.hits / samples
    assert abs(fraction - 0.5) < 4.0 * math.sqrt(0.25 / samples)
    assert estimate.f_hat == pytest.approx(math.log(fraction) / 10)


def test_pooled_half_space_fraction():
    hits = total = 0
    for seed in range(200):
        estimate = sx.estimate_f_direct(sphere_instance(10, 1, seed), 500, seed=10_000 + seed)
        hits += estimate.hits
        total += 500
    assert abs(hits / total - 0.5) < 4.0 * math.sqrt(0.25 / total)


def test_empty_cone_is_truncated_at_the_floor():
    estimate = sx.estimate_f_direct(empty_cone(), 5000, seed=3)
    assert estimate.truncated
    assert estimate.f_hat == sx.free_energy_floor(2) == -2.0
    assert estimate.hits == 0


def test_sample_budget_is_checked():
    with pytest.raises(SampleError):
        sx.estimate_f_direct(sphere_instance(5, 2, 1), 0, seed=1)
    with pytest.raises(SampleError):
        sx.estimate_f_sequential(sphere_instance(5, 2, 1), 50, seed=1)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.floats(min_value=1e-3, max_value=1e3))
def test_cone_membership_ignores_scale(seed, scale):
    instance = sphere_instance(8, 4, seed)
    directions = np.random.default_rng(seed).standard_normal((64, 8))
    np.testing.assert_array_equal(
        sx.in_cone(instance.matrix, directions), sx.in_cone(instance.matrix, scale * directions)
    )


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=1, max_value=8))
def test_f_hat_never_positive(seed, n_constraints):
    estimate = sx.estimate_f_direct(sphere_instance(6, n_constraints, seed), 2000, seed=seed)
    assert estimate.f_hat <= 0.0


def test_sequential_telescopes_to_direct_at_one_constraint():
    instance = sphere_instance(12, 1, 5)
    direct = sx.estimate_f_direct(instance, 3000, seed=77)
    sequential = sx.estimate_f_sequential(instance, 3000, seed=77)
    assert sequential.f_hat == direct.f_hat
    assert sequential.stderr == pytest.approx(direct.stderr)
    assert len(sequential.step_log_probabilities) == 1


def test_sequential_truncates_on_an_empty_cone():
    estimate = sx.estimate_f_sequential(empty_cone(), 200, seed=2, chains=4, burn_in=5, max_iters=50)
    assert estimate.truncated
    assert estimate.f_hat == -2.0
    assert len(estimate.step_log_probabilities) == 1


def test_splitting_estimates_a_thin_step():
    instance = thin_wedge(5, 1e-3)
    cone, row = instance.matrix[:1], instance.matrix[1]
    rng = np.random.default_rng(11)
    starts = np.tile(cone[0], (sx.DEFAULT_CHAINS, 1))
    sample = sx.sample_cone(starts, cone, 4000, rng)
    log_p, variance, hits, drawn = sx.split_rare_step(sample, cone, row, rng)
    assert log_p == pytest.approx(math.log(1e-3), abs=0.75)
    assert variance > 0.0
    assert drawn >= 4000
    assert hits.shape[0] >= sx.SPLIT_FRACTION * 4000
    assert np.all(sx.in_cone(instance.matrix, hits))


def test_sequential_resolves_a_step_plain_sampling_misses():
    estimate = sx.estimate_f_sequential(thin_wedge(5, 1e-3), 2000, seed=3)
    assert not estimate.truncated
    assert len(estimate.step_log_probabilities) == 2
    assert math.fsum(estimate.step_log_probabilities) == pytest.approx(math.log(0.5e-3), abs=0.75)
    assert sx.free_energy_floor(5) < estimate.f_hat < 0.0


def test_relaxed_hit_and_run_respects_the_level():
    instance = sphere_instance(10, 7, 8)
    cone, u = instance.matrix[:6], instance.matrix[6] / np.linalg.norm(instance.matrix[6])
    rng = np.random.default_rng(2)
    witness = sx.find_cone_start(instance, 7, rng)
    for level in (-0.2, 0.5 * float(witness @ u)):
        starts = np.tile(witness, (5, 1))
        sample = sx.sample_cone(starts, cone, 500, rng, burn_in=10, thinning=2, relaxed=(u, level))
        assert np.all(sx.in_cone(cone, sample))
        assert np.all(sample @ u > level)
        np.testing.assert_allclose(np.linalg.norm(sample, axis=1), 1.0, atol=1e-12)


def test_hit_and_run_stays_inside_the_cone():
    instance = sphere_instance(10, 6, 8)
    rng = np.random.default_rng(0)
    starts = np.vstack([sx.find_cone_start(instance, 6, rng) for _ in range(5)])
    sample = sx.sample_cone(starts, instance.matrix, 500, rng, burn_in=10, thinning=2)
    assert sample.shape == (500, 10)
    assert np.all(sx.in_cone(instance.matrix, sample))
    np.testing.assert_allclose(np.linalg.norm(sample, axis=1), 1.0, atol=1e-12)


def test_cone_start_gives_up_on_an_empty_cone():
    with pytest.raises(ConeEmpty) as info:
        sx.find_cone_start(empty_cone(), 2, np.random.default_rng(1), max_iters=50, retries=2)
    assert info.value.constraint_index == 2


def test_single_row_witness():
    instance = sphere_instance(7, 1, 3)
    result = sx.spherical_feasibility(instance, max_iters=10)
    row = instance.matrix[0]
    np.testing.assert_allclose(result.witness, row / np.linalg.norm(row))
    assert result.min_margin == pytest.approx(np.linalg.norm(row))


def test_witness_is_verified():
    for seed in range(50):
        instance = sphere_instance(20, 10, seed)
        result = sx.spherical_feasibility(instance, max_iters=5000)
        assert result.found
        assert np.all(instance.matrix @ result.witness > 0)
        assert np.linalg.norm(result.witness) == pytest.approx(1.0)


def test_square_systems_are_solved_by_the_least_squares_start():
    for seed in range(10):
        instance = sphere_instance(40, 40, seed)
        result = sx.spherical_feasibility(instance, max_iters=10)
        assert result.found
        assert result.iterations == 0


def test_perceptron_converges_from_random_starts():
    rng = np.random.default_rng(5)
    for seed in range(20):
        instance = sphere_instance(20, 10, seed)
        result = sx.spherical_feasibility(instance, start=rng.standard_normal(20))
        assert result.found
        assert np.all(instance.matrix @ result.witness > 0)


def test_feasibility_needs_iterations():
    with pytest.raises(DomainError):
        sx.spherical_feasibility(sphere_instance(4, 2, 1), max_iters=0)


def test_method_names():
    assert sx.EstimatorMethod.parse("direct") is sx.EstimatorMethod.DIRECT_GAUSSIAN
    assert sx.EstimatorMethod.parse("sequential_conditioning") is sx.EstimatorMethod.SEQUENTIAL_CONDITIONING
    with pytest.raises(DomainError):
        sx.EstimatorMethod.parse("exact")


def test_cover_probability():
    assert sx.cover_feasibility_probability(10, 20) == pytest.approx(0.5)
    assert sx.cover_feasibility_probability(10, 10) == 1.0
    assert sx.cover_feasibility_probability(10, 0) == 1.0
    assert sx.cover_feasibility_probability(40, 120) < 0.01


def test_variance_probe_with_one_trial():
    report = sx.variance_probe(0.5, 5, trials=1, samples=2000, seed=3)
    assert report["concentration_trend"] is None
    for summary in report["sizes"].values():
        assert summary["variance"] is None
        assert not summary["variance_applicable"]


def test_sphere_trials_reproducible_across_workers():
    one = sx.run_sphere_trials(8, 0.5, "direct", 5000, trials=4, master_seed=13, workers=1)
    two = sx.run_sphere_trials(8, 0.5, "direct", 5000, trials=4, master_seed=13, workers=2)
    assert [e.f_hat for e in one.estimates] == [e.f_hat for e in two.estimates]
    assert one.summary["gd_reference"] == pytest.approx(gd.gd_min(0.5).value)


def test_reference_outside_the_formula_range():
    assert sx.gd_reference(3.0) is None


def test_reference_uses_the_given_quadrature():
    adaptive = QuadratureSpec(rule=QuadratureRule.ADAPTIVE_INTERVAL)
    assert sx.gd_reference(0.5, adaptive) == gd.gd_min(0.5, adaptive).value
    result = sx.run_sphere_trials(6, 0.5, "direct", 1000, trials=2, master_seed=1, spec=adaptive)
    assert result.summary["gd_reference"] == gd.gd_min(0.5, adaptive).value


@pytest.mark.slow
def test_direct_mean_matches_gd():
    result = sx.run_sphere_trials(20, 0.5, "direct", 10_000_000, trials=20, master_seed=31, workers=4)
    assert result.summary["truncated_runs"] == 0
    assert abs(result.summary["mean"] - gd.gd_min(0.5).value) <= 0.05


@pytest.mark.slow
def test_estimators_agree():
    n_dim = 15
    m = constraints_for(0.4, n_dim)
    for seed in (1, 2, 3):
        instance = sphere_instance(n_dim, m, seed)
        direct = sx.estimate_f_direct(instance, 2_000_000, seed=100 + seed)
        sequential = sx.estimate_f_sequential(instance, 5000, seed=200 + seed)
        combined = math.hypot(direct.stderr, sequential.stderr)
        assert abs(direct.f_hat - sequential.f_hat) <= 3.0 * combined


@pytest.mark.slow
def test_sequential_reaches_below_direct():
    instance = sphere_instance(25, constraints_for(1.5, 25), 4)
    assert sx.estimate_f_direct(instance, 1_000_000, seed=5).truncated
    sequential = sx.estimate_f_sequential(instance, 2000, seed=6)
    assert not sequential.truncated
    assert sx.free_energy_floor(25) < sequential.f_hat < 0.0


@pytest.mark.slow
def test_sequential_rarely_truncates_below_capacity():
    m = constraints_for(1.5, 25)
    estimates = [sx.estimate_f_sequential(sphere_instance(25, m, seed), 2000, seed=50 + seed) for seed in range(12)]
    assert sum(e.truncated for e in estimates) <= 2


@pytest.mark.slow
def test_capacity_two_transition():
    below, above = sx.feasibility_sweep(40, [1.0, 3.0], trials=50, master_seed=17, workers=4)
    assert below["found"] >= 48
    assert above["found"] <= 2


@pytest.mark.slow
def test_concentration_trend():
    report = sx.variance_probe(0.5, 15, trials=50, samples=10_000_000, seed=23, workers=4)
    assert report["concentration_trend"] is True
    assert abs(report["sizes"]["30"]["mean"] - gd.gd_min(0.5).value) <= 0.05
