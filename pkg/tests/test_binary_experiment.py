import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.PerceptronLab.engines import binary_experiment as bx
from src.PerceptronLab.utils.errors import DimensionError, DomainError


def make_instance(rows):
    matrix = np.array(rows, dtype=float)
    return bx.PerceptronInstance(matrix.shape[1], matrix.shape[0], matrix, seed=0)


def test_hand_enumerated_counts():
    report = bx.count_solutions(make_instance([[1.0, 0.5]]))
    assert list(report.counts) == [4, 2]
    assert report.empirical_capacity_steps == 1


def test_sampling_is_deterministic():
    a = bx.sample_instance(4, 4, seed=7)
    b = bx.sample_instance(4, 4, seed=7)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    assert not np.array_equal(a.matrix, bx.sample_instance(4, 4, seed=8).matrix)


def test_sample_mean_is_centred():
    instance = bx.sample_instance(16, 20, seed=11)
    assert instance.matrix.shape == (20, 16)
    assert abs(instance.matrix.mean()) < 4.0 / np.sqrt(320)


def test_more_rows_extend_the_same_instance():
    small = bx.sample_instance(10, 5, seed=3)
    large = bx.sample_instance(10, 6, seed=3)
    np.testing.assert_array_equal(small.matrix, large.matrix[:5])


def test_dimension_guard():
    with pytest.raises(DimensionError):
        bx.sample_instance(31, 4, seed=1)
    big = bx.sample_instance(31, 2, seed=1, max_dim=64)
    with pytest.raises(DimensionError):
        bx.count_solutions(big)
    with pytest.raises(DimensionError):
        bx.count_solutions_naive(bx.sample_instance(17, 2, seed=1))


def test_no_constraints():
    report = bx.count_solutions(bx.sample_instance(6, 0, seed=2))
    assert list(report.counts) == [64]
    assert report.empirical_capacity_steps == 0


@settings(max_examples=30, deadline=None)
@given(
    n_dim=st.integers(min_value=1, max_value=12),
    n_constraints=st.integers(min_value=0, max_value=18),
    seed=st.integers(min_value=0, max_value=2 ** 32),
)
def test_gray_code_matches_naive_enumeration(n_dim, n_constraints, seed):
    instance = bx.sample_instance(n_dim, n_constraints, seed)
    fast = bx.count_solutions(instance)
    slow = bx.count_solutions_naive(instance)
    np.testing.assert_array_equal(fast.counts, slow.counts)
    assert fast.counts[0] == 2 ** n_dim
    assert np.all(np.diff(fast.counts) <= 0)
    nonzero = np.nonzero(fast.counts)[0]
    assert fast.empirical_capacity_steps == nonzero[-1]


def test_gray_walk_over_many_high_bits(monkeypatch):
    monkeypatch.setattr(bx, "_MAX_BLOCK_BITS", 2)
    instance = bx.sample_instance(12, 10, seed=99)
    np.testing.assert_array_equal(bx.count_solutions(instance).counts, bx.count_solutions_naive(instance).counts)


def test_single_constraint_splits_the_cube_in_half():
    # sigma -> -sigma swaps satisfied and violated vectors
    for seed in range(10):
        report = bx.count_solutions(bx.sample_instance(10, 1, seed))
        assert report.counts[1] == 2 ** 9


def test_appending_a_row_never_increases_capacity():
    for seed in range(5):
        full = bx.sample_instance(10, 25, seed)
        shorter = bx.count_solutions(full.prefix(24)).empirical_capacity_steps
        assert bx.count_solutions(full).empirical_capacity_steps <= shorter


def test_constraints_for():
    assert bx.constraints_for(1.0, 12) == 12
    assert bx.constraints_for(0.5, 15) == 8
    assert bx.constraints_for(0.4, 15) == 6
    assert bx.constraints_for(2.0, 20) == 40
    with pytest.raises(DomainError):
        bx.constraints_for(-0.1, 10)


def test_prefix_bounds():
    instance = bx.sample_instance(5, 3, seed=1)
    assert instance.prefix(0).n_constraints == 0
    with pytest.raises(DomainError):
        instance.prefix(4)


def test_trials_summary_with_one_trial():
    result = bx.run_binary_trials(6, 1.0, trials=1, master_seed=5)
    assert result.summary["trials"] == 1
    assert all(row["se"] is None and row["z"] is None for row in result.summary["per_t"])
    assert result.summary["capacity_se"] is None


def test_trials_do_not_depend_on_worker_count():
    one = bx.run_binary_trials(8, 1.0, trials=6, master_seed=21, workers=1)
    two = bx.run_binary_trials(8, 1.0, trials=6, master_seed=21, workers=2)
    for a, b in zip(one.reports, two.reports):
        assert a.seed == b.seed
        np.testing.assert_array_equal(a.counts, b.counts)
    assert one.summary == two.summary


def test_first_row_has_zero_z():
    result = bx.run_binary_trials(6, 1.0, trials=10, master_seed=2)
    first = result.summary["per_t"][0]
    assert first["mean"] == first["expected"] == 64.0
    assert first["se"] == 0.0 and first["z"] == 0.0


@pytest.mark.slow
def test_first_moment_identity():
    result = bx.run_binary_trials(12, 1.0, trials=500, master_seed=2024, workers=4)
    for row in result.summary["per_t"]:
        assert row["z"] is not None
        assert abs(row["z"]) <= 4.0, row


@pytest.mark.slow
def test_empirical_capacity_band():
    result = bx.run_binary_trials(20, 2.0, trials=200, master_seed=7, workers=4)
    assert 0.6 <= result.summary["capacity_mean"] <= 1.1


@pytest.mark.slow
def test_throughput_at_n24():
    instance = bx.sample_instance(24, 24, seed=1)
    start = time.perf_counter()
    report = bx.count_solutions(instance)
    assert time.perf_counter() - start < 60.0
    assert report.counts[0] == 2 ** 24
