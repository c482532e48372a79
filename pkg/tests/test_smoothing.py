import math

import numpy as np
import pytest

from zocopt import (
    ConstantOracle,
    CountingOracle,
    GradEstimatorConfig,
    GradientEstimator,
    HalfSquaredNormOracle,
    L1NormOracle,
    LinearOracle,
    RngStream,
    estimator_sequence,
    minibatch_gradient,
    sample_sphere,
    smoothed_value_estimate,
    two_point_estimate,
    vr_gradient_step,
)
from zocopt.properties import estimator_suite
from zocopt.smoothing import _pairwise_mean, _serial_mean, _sphere_batch


def test_sample_sphere_unit_norm():
    rng = RngStream(0)
    for d in (1, 3, 17):
        u = sample_sphere(rng, d)
        assert abs(np.linalg.norm(u) - 1.0) <= 1e-12


def test_sample_sphere_d1_sign_frequencies():
    rng = RngStream(1)
    draws = np.array([sample_sphere(rng, 1)[0] for _ in range(10_000)])
    assert set(np.unique(draws)) == {-1.0, 1.0}
    assert abs(np.mean(draws > 0) - 0.5) <= 0.02


def test_sample_sphere_d2_mean_is_centered():
    n = 100_000
    draws = _sphere_batch(RngStream(2), n, 2)
    # per-coordinate standard deviation on the circle is 1/sqrt(2)
    bound = 3.0 / math.sqrt(n) * (1.0 / math.sqrt(2.0))
    assert np.all(np.abs(draws.mean(axis=0)) <= bound)


def test_sphere_batch_matches_sequential_draws():
    batch = _sphere_batch(RngStream(3), 5, 4)
    rng = RngStream(3)
    singles = np.array([sample_sphere(rng, 4) for _ in range(5)])
    assert np.array_equal(batch, singles)


def test_two_point_estimate_at_kink_is_zero():
    oracle = L1NormOracle(1)
    out = two_point_estimate(oracle, np.zeros(1), 0.5, np.array([1.0]), token=0)
    assert np.array_equal(out, np.zeros(1))


def test_two_point_estimate_linear_formula():
    oracle = LinearOracle([1.0, 0.0])
    u = np.array([0.6, 0.8])
    out = two_point_estimate(oracle, np.zeros(2), 0.1, u, token=0)
    assert np.allclose(out, [0.72, 0.96], atol=1e-12)


def test_two_point_estimate_mean_recovers_slope():
    oracle = LinearOracle([1.0, 0.0])
    n = 100_000
    est = minibatch_gradient(oracle, np.zeros(2), 0.01, n, RngStream(4))
    err = np.linalg.norm(est.vector - oracle.slope)
    assert err <= 3.0 * est.stderr(n)


def test_two_point_estimate_rejects_non_unit_direction():
    with pytest.raises(ValueError, match="unit norm"):
        two_point_estimate(LinearOracle([1.0]), np.zeros(1), 0.1, np.array([2.0]), 0)


def test_minibatch_of_one_equals_single_estimate():
    oracle = L1NormOracle(3)
    x = np.array([0.3, -0.2, 1.0])
    est = minibatch_gradient(oracle, x, 0.05, 1, RngStream(5))
    rng = RngStream(5)
    u = sample_sphere(rng, 3)
    token = int(oracle.sample(rng, 1)[0])
    single = two_point_estimate(oracle, x, 0.05, u, token)
    assert np.array_equal(est.vector, single)
    assert est.fevals == 2


def test_minibatch_constant_oracle_is_exactly_zero():
    oracle = ConstantOracle(4, value=5.0)
    est = minibatch_gradient(oracle, np.zeros(4), 0.1, 37, RngStream(6))
    assert np.array_equal(est.vector, np.zeros(4))
    assert est.fevals == 74


def test_minibatch_second_moment_bound_lemma():
    # |a| = G = 1, d = 2: bound is 16 sqrt(2 pi) d G^2
    oracle = LinearOracle([1.0, 0.0])
    est = minibatch_gradient(oracle, np.zeros(2), 0.01, 100_000, RngStream(7))
    bound = 16.0 * math.sqrt(2.0 * math.pi) * 2 * 1.0
    assert est.second_moment <= 1.05 * bound


def test_vr_step_with_equal_points_returns_previous():
    oracle = L1NormOracle(2)
    x = np.array([0.4, -0.7])
    g_prev = np.array([1.0, 2.0])
    est = vr_gradient_step(oracle, x, x, g_prev, 0.05, 8, RngStream(8))
    assert np.array_equal(est.vector, g_prev)
    assert est.fevals == 32


def test_vr_step_linear_correction_vanishes():
    # the two-point estimate of a linear function does not depend on x
    oracle = LinearOracle([2.0, -1.0])
    g_prev = np.array([0.5, 0.5])
    est = vr_gradient_step(
        oracle, np.array([3.0, 1.0]), np.array([-2.0, 0.0]), g_prev, 0.05, 16, RngStream(9)
    )
    assert np.allclose(est.vector, g_prev, atol=1e-12)


def test_vr_step_matches_independent_transcript():
    # replay the documented draw order and recompute the update by hand
    oracle = L1NormOracle(2)
    x = np.array([0.5, -1.0])
    x_prev = np.array([0.2, -0.8])
    g_prev = np.array([0.1, 0.3])
    delta, batch = 0.05, 6
    est = vr_gradient_step(oracle, x, x_prev, g_prev, delta, batch, RngStream(10))

    rng = RngStream(10)
    raw = rng.generator.standard_normal((batch, 2))
    directions = raw / np.linalg.norm(raw, axis=1)[:, None]
    rng.generator.integers(0, 2**63, size=batch, dtype=np.int64)  # tokens (unused by |.|_1)

    def l1(v):
        return abs(v[0]) + abs(v[1])

    acc = np.zeros(2)
    for i in range(batch):
        u = directions[i]
        cur = l1(x + delta * u) - l1(x - delta * u)
        prev = l1(x_prev + delta * u) - l1(x_prev - delta * u)
        acc += (2 / (2 * delta)) * (cur - prev) * u
    expected = g_prev + acc / batch
    assert np.allclose(est.vector, expected, atol=1e-12)


def test_estimator_sequence_g2_period_one_is_all_minibatches():
    oracle = LinearOracle([1.0, 1.0])
    cfg = GradEstimatorConfig(option="g2", delta=0.05, batch_b0=4, batch_b1=2, period_q=1)
    iterates = [np.zeros(2)] * 5
    estimates = list(estimator_sequence(oracle, iterates, cfg, RngStream(11)))
    assert [e.fevals for e in estimates] == [8] * 5


def test_estimator_sequence_g2_epoch_starts():
    oracle = LinearOracle([1.0, 1.0])
    cfg = GradEstimatorConfig(option="g2", delta=0.05, batch_b0=5, batch_b1=2, period_q=3)
    iterates = [np.full(2, 0.1 * t) for t in range(7)]
    estimates = list(estimator_sequence(oracle, iterates, cfg, RngStream(12)))
    fevals = [e.fevals for e in estimates]
    # epoch starts at t in {0, 3, 6} cost 2*B0; corrected steps cost 4*B1
    assert fevals == [10, 8, 8, 10, 8, 8, 10]


def test_estimator_sequence_g1_total_fevals():
    oracle = LinearOracle([1.0, 1.0])
    cfg = GradEstimatorConfig(option="g1", delta=0.05, batch=6)
    estimator = GradientEstimator(oracle, cfg, RngStream(13))
    for _ in range(9):
        estimator.step(np.zeros(2))
    assert estimator.cum_fevals == 2 * 9 * 6


def test_g2_epoch_start_bitwise_equals_g1():
    oracle = L1NormOracle(3)
    x = np.array([0.2, 0.4, -0.6])
    cfg = GradEstimatorConfig(option="g2", delta=0.02, batch_b0=12, batch_b1=3, period_q=4)
    out_g2 = GradientEstimator(oracle, cfg, RngStream(14)).step(x)
    out_g1 = minibatch_gradient(oracle, x, 0.02, 12, RngStream(14))
    assert np.array_equal(out_g2.vector, out_g1.vector)


def test_feval_accounting_matches_instrumented_oracle():
    counter = CountingOracle(L1NormOracle(2))
    cfg = GradEstimatorConfig(option="g2", delta=0.05, batch_b0=7, batch_b1=2, period_q=3)
    estimator = GradientEstimator(counter, cfg, RngStream(15))
    x = np.zeros(2)
    for _ in range(8):
        est = estimator.step(x)
        x = x + 0.01 * est.vector
    # epoch starts at t in {0, 3, 6}: 3 * 2 * 7; corrected: 5 * 4 * 2
    assert estimator.cum_fevals == counter.count == 3 * 14 + 5 * 8


def test_smoothed_value_linear_is_unbiased():
    oracle = LinearOracle([2.0, 1.0])
    x = np.array([0.5, -0.3])
    mean, stderr = smoothed_value_estimate(oracle, x, 0.2, 20_000, RngStream(16))
    assert abs(mean - oracle.evaluate(x, 0)) <= 3.0 * stderr


def test_smoothed_value_of_abs_at_origin_is_delta():
    oracle = L1NormOracle(1)
    mean, stderr = smoothed_value_estimate(oracle, np.zeros(1), 0.2, 100, RngStream(17))
    assert mean == pytest.approx(0.2, abs=1e-12)


def test_smoothing_sandwich_bound():
    for dim, G in ((1, 1.0), (5, math.sqrt(5.0))):
        oracle = L1NormOracle(dim)
        rng = RngStream(18 + dim)
        gen = rng.generator
        for delta in (0.01, 0.1):
            for _ in range(20):
                x = gen.standard_normal(dim)
                mean, stderr = smoothed_value_estimate(oracle, x, delta, 2000, rng)
                assert abs(mean - oracle.evaluate(x, 0)) <= delta * G + 3.0 * stderr


def test_pairwise_mean_matches_serial_closely():
    rows = RngStream(19).generator.standard_normal((37, 4))
    assert np.allclose(_pairwise_mean(rows), _serial_mean(rows), atol=1e-12)


def test_pairwise_reduction_option():
    oracle = L1NormOracle(2)
    x = np.array([0.3, 0.4])
    serial = minibatch_gradient(oracle, x, 0.05, 10, RngStream(20))
    pairwise = minibatch_gradient(oracle, x, 0.05, 10, RngStream(20), pairwise=True)
    assert np.allclose(serial.vector, pairwise.vector, atol=1e-12)
    assert serial.fevals == pairwise.fevals


def test_estimator_property_suite():
    report = estimator_suite(trials=20_000, seed=0)
    assert report.ok, "\n".join(report.lines())


def test_config_validation():
    with pytest.raises(ValueError, match="batch is required"):
        GradEstimatorConfig(option="g1", delta=0.1)
    with pytest.raises(ValueError, match="period_q"):
        GradEstimatorConfig(option="g2", delta=0.1, batch_b0=4, batch_b1=2)
    with pytest.raises(ValueError, match="delta"):
        GradEstimatorConfig(option="g1", delta=-0.1, batch=4)
    with pytest.raises(ValueError, match="option"):
        GradEstimatorConfig(option="g3", delta=0.1, batch=4)
