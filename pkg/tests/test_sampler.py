import numpy as np
import pytest

from phmeasure import fixtures
from phmeasure.core import Normalization, check_pseudo_hermitian, make_metric, state_from_pure
from phmeasure.dilation import build_dilation
from phmeasure.errors import DegenerateStatistics
from phmeasure.generators import random_hermitian
from phmeasure.measurement import decomposition_coefficients, expectation
from phmeasure.sampler import (
    EventRecord,
    estimate,
    estimator_gradients,
    run_experiment,
    simulate_events,
)
from phmeasure.spectral import decompose


def setup(name, theta1, theta2):
    h = fixtures.observable(name)
    sp = decompose(h)
    d = build_dilation(sp)
    s = state_from_pure(fixtures.theta_state(theta1, theta2), h.metric, Normalization.DIRAC)
    return h, sp, d, s


def record(counts, e, s, trials=None):
    counts = np.asarray(counts)
    return EventRecord(counts, trials or int(counts.sum()), 0, np.asarray(e, float), np.asarray(s, float))


def test_hermitian_eigenmode_only_one_subspace(rng):
    h = check_pseudo_hermitian(random_hermitian(rng, 3), make_metric(np.eye(3)))
    sp = decompose(h)
    d = build_dilation(sp)
    s = state_from_pure(sp.vector(1), h.metric, Normalization.DIRAC)
    rec = simulate_events(d, sp, s, 100_000, 7)
    assert rec.counts[0] == 0 and rec.counts[2] == 0 and rec.counts[1] > 0


def test_single_trial():
    _, sp, d, s = setup("eq5.A", 0.0, np.pi / 4)
    for seed in range(20):
        assert simulate_events(d, sp, s, 1, seed).counts.sum() in (0, 1)


def test_seed_determinism_and_partitioning():
    _, sp, d, s = setup("eq6.A", 0.3, 1.0)
    a = simulate_events(d, sp, s, 300_001, 11)
    b = simulate_events(d, sp, s, 300_001, 11)
    c = simulate_events(d, sp, s, 300_001, 11, workers=4)
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.counts, c.counts)
    assert not np.array_equal(a.counts, simulate_events(d, sp, s, 300_001, 12).counts)


def test_counts_never_exceed_trials():
    _, sp, d, s = setup("eq5.B", 0.2, 0.5)
    rec = simulate_events(d, sp, s, 12345, 1)
    assert rec.counts.sum() <= rec.trials


def test_population_ratios_within_five_sigma():
    h, sp, d, s = setup("eq5.A", 0.0, np.pi / 4)
    rec = simulate_events(d, sp, s, 1_000_000, 42)
    p = decomposition_coefficients(sp, s).populations
    target = p / p.sum()
    n = rec.counts.sum()
    frac = rec.counts / n
    sigma = np.sqrt(target * (1 - target) / n)
    assert np.all(np.abs(frac - target) <= 5 * sigma)


def test_estimate_single_mode():
    est = estimate(record([0, 500, 0], [-1.0, 0.5, 2.0], [1, 1, 1]))
    assert est.expectation_hat == 0.5
    assert est.variance_hat == 0.0


def test_estimate_hand_example():
    r3 = np.sqrt(3)
    est = estimate(record([100, 100, 50], [-r3, r3, 0.0], [1, 1, -1]))
    # (-100 r3 + 100 r3 - 0) / (100 + 100 - 50)
    assert est.expectation_hat == pytest.approx(0.0, abs=1e-12)
    assert est.variance_hat == pytest.approx((100 * 3 + 100 * 3) / 150)


def test_estimate_degenerate_statistics():
    with pytest.raises(DegenerateStatistics):
        estimate(record([50, 0, 50], [-1, 0, 1], [1, 1, -1]))


def test_gradients_match_finite_differences():
    rec = record([1200, 800, 300], [-1.3, 0.2, 2.1], [1, -1, 1], trials=5000)
    g_mean, g_var = estimator_gradients(rec)
    base = estimate(rec)
    for k in range(3):
        c = rec.counts.astype(float).copy()
        h = 1e-3
        c[k] += h
        up = estimate(EventRecord(c, rec.trials, 0, rec.eigenvalues, rec.signs))
        c[k] -= 2 * h
        dn = estimate(EventRecord(c, rec.trials, 0, rec.eigenvalues, rec.signs))
        assert (up.expectation_hat - dn.expectation_hat) / (2 * h) == pytest.approx(g_mean[k], rel=1e-5)
        assert (up.variance_hat - dn.variance_hat) / (2 * h) == pytest.approx(g_var[k], rel=1e-5)
    assert base.std_error == pytest.approx(np.sqrt(np.sum(g_mean**2 * rec.counts)))


def test_expectation_in_eigen_range_for_positive_signs():
    _, sp, d, s = setup("eq5.B", 0.7, 2.0)
    est = estimate(simulate_events(d, sp, s, 10_000, 3))
    assert sp.eigenvalues.min() <= est.expectation_hat <= sp.eigenvalues.max()


def test_bootstrap_agrees_with_delta_method():
    _, sp, d, s = setup("eq5.A", 0.0, np.pi / 4)
    est = estimate(simulate_events(d, sp, s, 100_000, 5), bootstrap=1000, bootstrap_seed=1)
    assert est.bootstrap_std_error == pytest.approx(est.std_error, rel=0.15)
    assert est.bootstrap_variance_std_error == pytest.approx(est.variance_std_error, rel=0.15)


@pytest.mark.parametrize(
    "name, theta1, theta2",
    [("eq5.A", 0.0, np.pi / 4), ("eq5.B", 0.0, np.pi / 4), ("eq6.A", np.pi / 2.5, np.pi / 3)],
)
def test_run_experiment_within_five_sigma(name, theta1, theta2):
    h = fixtures.observable(name)
    s = state_from_pure(fixtures.theta_state(theta1, theta2), h.metric, Normalization.ETA)
    res = run_experiment(h, s, 1_000_000, 42)
    assert abs(res.sampled.expectation_hat - res.analytic_expectation) <= 5 * res.sampled.std_error
    assert abs(res.sampled.variance_hat - res.analytic_variance) <= 5 * res.sampled.variance_std_error


def test_run_experiment_hermitian(rng):
    h = check_pseudo_hermitian(random_hermitian(rng, 3), make_metric(np.eye(3)))
    s = state_from_pure([1, 1j, 0.5], h.metric)
    res = run_experiment(h, s, 200_000, 9)
    assert abs(res.sampled.expectation_hat - expectation(h, s)) <= 5 * res.sampled.std_error


def test_unbiased_over_seeds():
    h = fixtures.observable("eq5.A")
    s = state_from_pure(fixtures.theta_state(0.0, np.pi / 4), h.metric)
    sp = decompose(h)
    d = build_dilation(sp)
    vals = np.array([estimate(simulate_events(d, sp, s, 100_000, seed)).expectation_hat for seed in range(50)])
    assert abs(vals.mean() - 0.3) < 3 * vals.std(ddof=1) / np.sqrt(50)


def test_std_error_scaling():
    _, sp, d, s = setup("eq5.B", 0.0, np.pi / 4)
    se = [estimate(simulate_events(d, sp, s, T, 42)).std_error for T in (10**4, 10**5, 10**6)]
    for lo, hi in zip(se, se[1:]):
        ratio = lo / hi
        assert np.sqrt(10) / 2 <= ratio <= np.sqrt(10) * 2
