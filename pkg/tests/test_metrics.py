import math

import numpy as np
import pytest

from zocopt import (
    BallIndicator,
    ConstantOracle,
    ElasticNet,
    HalfSquaredNormOracle,
    InfeasiblePoint,
    LinearOracle,
    ProblemSpec,
    RngStream,
    ZeroRegularizer,
    cggsp_metric_estimate,
    fw_gap,
    gradient_mapping,
    pgsp_metric_estimate,
)
from zocopt.properties import metrics_suite


def test_gradient_mapping_zero_regularizer_is_identity_on_g():
    g = np.array([0.3, -0.7])
    out = gradient_mapping(np.array([5.0, 5.0]), g, 0.37, ZeroRegularizer())
    assert np.array_equal(out, g)


def test_gradient_mapping_elastic_net_example():
    out = gradient_mapping(np.array([1.0, 0.0]), np.zeros(2), 1.0, ElasticNet(1.0, 1.0))
    assert np.allclose(out, [1.0, 0.0], atol=1e-15)


def test_gradient_mapping_contraction_random():
    gen = RngStream(0).generator
    reg = ElasticNet(0.5, 0.5)
    for _ in range(200):
        x = gen.standard_normal(3)
        g1, g2 = gen.standard_normal(3), gen.standard_normal(3)
        gamma = gen.uniform(0.05, 2.0)
        lhs = np.linalg.norm(
            gradient_mapping(x, g1, gamma, reg) - gradient_mapping(x, g2, gamma, reg)
        )
        assert lhs <= np.linalg.norm(g1 - g2) + 1e-10


def test_fw_gap_ball_geometry():
    gap = fw_gap(np.zeros(2), np.array([3.0, 4.0]), BallIndicator(np.zeros(2), 2.0))
    assert gap == pytest.approx(10.0, abs=1e-12)  # R * |g|


def test_fw_gap_zero_at_lmo_point():
    reg = BallIndicator(np.zeros(2), 2.0)
    g = np.array([1.0, -2.0])
    x = reg.lmo(g)
    assert fw_gap(x, g, reg) == pytest.approx(0.0, abs=1e-12)


def test_fw_gap_elastic_net_matches_grid_maximization():
    reg = ElasticNet(1.0, 2.0)
    x = np.zeros(2)
    g = np.array([3.0, -0.5])
    gap = fw_gap(x, g, reg)
    assert gap == pytest.approx(1.0, abs=1e-12)
    # brute-force maximization of h(x) - h(y) + <y - x, -g> over a grid
    grid = np.linspace(-3.0, 3.0, 301)
    yy0, yy1 = np.meshgrid(grid, grid, indexing="ij")
    h_y = 1.0 * (np.abs(yy0) + np.abs(yy1)) + 1.0 * (yy0**2 + yy1**2)
    value = reg.value(x) - h_y + (yy0 - x[0]) * -g[0] + (yy1 - x[1]) * -g[1]
    assert gap == pytest.approx(float(value.max()), abs=1e-3)


def test_fw_gap_infeasible_point_raises():
    with pytest.raises(InfeasiblePoint):
        fw_gap(np.array([5.0, 0.0]), np.zeros(2), BallIndicator(np.zeros(2), 1.0))


def _quad_problem():
    oracle = HalfSquaredNormOracle(2)
    return ProblemSpec(dim=2, oracle=oracle, regularizer=ZeroRegularizer(), lipschitz_G=4.0)


def test_pgsp_metric_near_zero_at_stationary_point():
    report = pgsp_metric_estimate(_quad_problem(), np.zeros(2), 0.5, 0.05, 4000, RngStream(1))
    assert report.value <= 3.0 * report.stderr_proxy
    assert report.metric_kind == "pgsp_norm"


def test_pgsp_metric_recovers_gradient_norm():
    # smoothing a quadratic shifts it by a constant, so the smoothed
    # gradient at (1, 0) is exactly (1, 0)
    report = pgsp_metric_estimate(
        _quad_problem(), np.array([1.0, 0.0]), 0.7, 0.05, 4000, RngStream(2)
    )
    assert report.value == pytest.approx(1.0, abs=3.0 * report.stderr_proxy)


def test_pgsp_stderr_scales_with_samples():
    problem = _quad_problem()
    x = np.array([0.5, 0.5])
    r1 = pgsp_metric_estimate(problem, x, 0.5, 0.05, 2000, RngStream(3))
    r2 = pgsp_metric_estimate(problem, x, 0.5, 0.05, 4000, RngStream(4))
    ratio = r1.stderr_proxy / r2.stderr_proxy
    assert ratio == pytest.approx(math.sqrt(2.0), rel=0.2)


def test_cggsp_metric_near_zero_at_ball_vertex():
    slope = np.array([3.0, 4.0])
    oracle = LinearOracle(slope)
    radius = 2.0
    problem = ProblemSpec(
        dim=2,
        oracle=oracle,
        regularizer=BallIndicator(np.zeros(2), radius),
        lipschitz_G=oracle.lipschitz_bound,
    )
    x = -radius * slope / np.linalg.norm(slope)
    report = cggsp_metric_estimate(problem, x, 0.01, 4000, RngStream(5))
    assert report.metric_kind == "cggsp_gap"
    assert report.gamma is None
    assert 0.0 <= report.value <= 3.0 * report.stderr_proxy


def test_cggsp_metric_zero_at_regularizer_minimum_with_constant_oracle():
    problem = ProblemSpec(
        dim=2,
        oracle=ConstantOracle(2, value=1.0),
        regularizer=ElasticNet(0.5, 0.5),
        lipschitz_G=1.0,
    )
    report = cggsp_metric_estimate(problem, np.zeros(2), 0.1, 100, RngStream(6))
    assert report.value == 0.0


def test_cggsp_gap_nonnegative_on_random_probes():
    gen = RngStream(7).generator
    reg = ElasticNet(0.3, 0.8)
    for _ in range(200):
        gap = fw_gap(gen.standard_normal(3), gen.standard_normal(3), reg)
        assert gap >= -1e-12


def test_metric_requires_two_samples():
    with pytest.raises(ValueError):
        pgsp_metric_estimate(_quad_problem(), np.zeros(2), 0.5, 0.05, 1, RngStream(8))


def test_metrics_property_suite():
    report = metrics_suite(trials=400, seed=3)
    assert report.ok, "\n".join(report.lines())
