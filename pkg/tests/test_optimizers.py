import math

import numpy as np
import pytest
from sklearn.base import clone

from zocopt import (
    BallIndicator,
    ConstantOracle,
    CountingOracle,
    ElasticNet,
    EmptyTrace,
    GCGInfeasibleStart,
    GradEstimatorConfig,
    HalfSquaredNormOracle,
    InvalidProblem,
    LinearOracle,
    MissingRadius,
    ProblemSpec,
    RngStream,
    RunConfig,
    RunTrace,
    TraceRecord,
    ZeroRegularizer,
    ZerothOrderConditionalGradient,
    ZerothOrderProximalGradient,
    gcg_step,
    gradient_mapping,
    objective_estimate,
    prox_step,
    run,
    select_output,
    soft_threshold,
    theorem_hyperparams,
)


def test_prox_step_zero_regularizer_is_gradient_step():
    out = prox_step(np.array([1.0, 1.0]), np.array([1.0, 0.0]), 0.5, ZeroRegularizer())
    assert np.allclose(out, [0.5, 1.0], atol=1e-15)


def test_prox_step_elastic_net():
    out = prox_step(np.array([1.0, 0.0]), np.zeros(2), 1.0, ElasticNet(1.0, 1.0))
    assert np.allclose(out, [0.0, 0.0], atol=1e-15)


def test_prox_step_ball_projection():
    out = prox_step(np.array([2.0, 0.0]), np.array([-2.0, 0.0]), 1.0, BallIndicator(np.zeros(2), 1.0))
    assert np.allclose(out, [1.0, 0.0], atol=1e-12)


def test_gcg_step_full_step_returns_lmo_point():
    reg = BallIndicator(np.zeros(2), 2.0)
    y, x_next = gcg_step(np.array([0.5, 0.5]), np.array([3.0, 4.0]), 1.0, reg)
    assert np.array_equal(x_next, y)


def test_gcg_step_ball_example():
    reg = BallIndicator(np.zeros(2), 2.0)
    y, x_next = gcg_step(np.zeros(2), np.array([3.0, 4.0]), 0.5, reg)
    assert np.allclose(y, [-1.2, -1.6], atol=1e-12)
    assert np.allclose(x_next, [-0.6, -0.8], atol=1e-12)


def test_gcg_step_rejects_bad_gamma():
    reg = BallIndicator(np.zeros(2), 2.0)
    with pytest.raises(ValueError):
        gcg_step(np.zeros(2), np.ones(2), 0.0, reg)
    with pytest.raises(ValueError):
        gcg_step(np.zeros(2), np.ones(2), 1.5, reg)


def _pgd_config(steps=20, gamma=0.1, batch=8, x0=None, **kwargs):
    return RunConfig(
        algorithm="pgd",
        estimator=GradEstimatorConfig(option="g1", delta=0.01, batch=batch),
        steps=steps,
        gamma=gamma,
        x0=x0,
        **kwargs,
    )


def test_run_constant_oracle_contracts_toward_zero():
    problem = ProblemSpec(
        dim=2, oracle=ConstantOracle(2), regularizer=ElasticNet(1.0, 1.0), lipschitz_G=1.0
    )
    config = _pgd_config(steps=10, gamma=0.5, x0=np.array([5.0, 5.0]), objective_samples=1)
    trace = run(problem, config)
    norms = [np.linalg.norm(r.x) for r in trace.records]
    # strictly contracting until the soft threshold pins the iterate at zero
    assert all(b < a or a == b == 0.0 for a, b in zip(norms, norms[1:]))
    assert norms[-1] < norms[0]


def test_run_gcg_ball_iterates_stay_feasible():
    radius = 1.5
    problem = ProblemSpec(
        dim=3,
        oracle=LinearOracle([1.0, -1.0, 0.5]),
        regularizer=BallIndicator(np.zeros(3), radius),
        lipschitz_G=2.0,
    )
    config = RunConfig(
        algorithm="gcg",
        estimator=GradEstimatorConfig(option="g1", delta=0.01, batch=16),
        steps=30,
        gamma=0.3,
        x0=np.zeros(3),
        objective_samples=1,
    )
    trace = run(problem, config)
    for rec in trace.records:
        assert np.linalg.norm(rec.x) <= radius + 1e-9


def test_run_gcg_rejects_infeasible_start():
    problem = ProblemSpec(
        dim=2,
        oracle=LinearOracle([1.0, 0.0]),
        regularizer=BallIndicator(np.zeros(2), 1.0),
        lipschitz_G=1.0,
    )
    config = RunConfig(
        algorithm="gcg",
        estimator=GradEstimatorConfig(option="g1", delta=0.01, batch=4),
        steps=5,
        gamma=0.5,
        x0=np.array([3.0, 0.0]),
    )
    with pytest.raises(GCGInfeasibleStart):
        run(problem, config)


def test_run_gcg_rejects_gamma_above_one():
    problem = ProblemSpec(
        dim=2,
        oracle=LinearOracle([1.0, 0.0]),
        regularizer=BallIndicator(np.zeros(2), 1.0),
        lipschitz_G=1.0,
    )
    config = RunConfig(
        algorithm="gcg",
        estimator=GradEstimatorConfig(option="g1", delta=0.01, batch=4),
        steps=5,
        gamma=1.5,
        x0=np.zeros(2),
    )
    with pytest.raises(ValueError, match="gamma"):
        run(problem, config)


def test_run_is_deterministic():
    problem = ProblemSpec(
        dim=2,
        oracle=LinearOracle([1.0, -0.5]),
        regularizer=ElasticNet(0.1, 0.1),
        lipschitz_G=1.2,
    )
    config = _pgd_config(steps=12, x0=np.array([1.0, 1.0]), seed=9, record_metric_every=4, metric_batch=16)
    t1 = run(problem, config)
    t2 = run(problem, config)
    assert t1.output_index == t2.output_index
    for a, b in zip(t1.records, t2.records):
        assert np.array_equal(a.x, b.x)
        assert a.objective == b.objective
        assert a.cum_fevals == b.cum_fevals
        assert a.metric == b.metric


def test_run_feval_accounting_with_instrumented_oracle():
    counter = CountingOracle(LinearOracle([1.0, -0.5]))
    problem = ProblemSpec(
        dim=2, oracle=counter, regularizer=ElasticNet(0.1, 0.1), lipschitz_G=1.2
    )
    config = _pgd_config(
        steps=11, batch=6, x0=np.ones(2), record_metric_every=5, metric_batch=8, objective_samples=3
    )
    trace = run(problem, config)
    assert trace.cum_fevals == 2 * 11 * 6
    assert trace.objective_fevals == 11 * 3
    assert trace.metric_fevals == 3 * 2 * 8  # metrics at t in {0, 5, 10}
    assert counter.count == trace.cum_fevals + trace.objective_fevals + trace.metric_fevals
    assert [r.cum_fevals for r in trace.records] == [2 * 6 * (t + 1) for t in range(11)]


def test_prox_step_consistent_with_gradient_mapping():
    gen = RngStream(1).generator
    reg = ElasticNet(0.4, 0.7)
    for _ in range(100):
        x, g = gen.standard_normal(4), gen.standard_normal(4)
        gamma = gen.uniform(0.05, 2.0)
        lhs = prox_step(x, g, gamma, reg)
        rhs = x - gamma * gradient_mapping(x, g, gamma, reg)
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_run_smooth_composite_reaches_known_minimum():
    center = np.array([1.0, -2.0, 0.5])
    lam1 = lam2 = 0.1
    oracle = HalfSquaredNormOracle(3, center=center)
    problem = ProblemSpec(
        dim=3, oracle=oracle, regularizer=ElasticNet(lam1, lam2), lipschitz_G=4.0
    )
    x_star = soft_threshold(center, lam1) / (1 + lam2)
    phi_star = float(
        0.5 * np.sum((x_star - center) ** 2)
        + lam1 * np.sum(np.abs(x_star))
        + 0.5 * lam2 * np.sum(x_star**2)
    )
    config = RunConfig(
        algorithm="pgd",
        estimator=GradEstimatorConfig(option="g1", delta=1e-3, batch=64),
        steps=400,
        gamma=0.2,
        x0=np.zeros(3),
        objective_samples=0,
        seed=11,
    )
    trace = run(problem, config)
    final = objective_estimate(problem, trace.records[-1].x, 1, RngStream(0))
    assert abs(final - phi_star) <= 1e-2


def test_select_output_single_record():
    trace = RunTrace(records=[TraceRecord(0, np.zeros(2), 0.0, 2)])
    index, point = select_output(trace, RngStream(0))
    assert index == 0
    assert np.array_equal(point, np.zeros(2))


def test_select_output_uniform_frequencies():
    records = [TraceRecord(t, np.array([float(t)]), 0.0, t) for t in range(4)]
    trace = RunTrace(records=records)
    rng = RngStream(5)
    counts = np.zeros(4)
    for _ in range(10_000):
        index, _ = select_output(trace, rng)
        counts[index] += 1
    assert np.all(np.abs(counts / 10_000 - 0.25) <= 0.02)


def test_select_output_empty_trace():
    with pytest.raises(EmptyTrace):
        select_output(RunTrace(), RngStream(0))


def test_best_metric_index():
    records = [
        TraceRecord(0, np.zeros(1), 0.0, 1, metric=None),
        TraceRecord(1, np.zeros(1), 0.0, 2, metric=0.5),
        TraceRecord(2, np.zeros(1), 0.0, 3, metric=0.2),
        TraceRecord(3, np.zeros(1), 0.0, 4, metric=0.9),
    ]
    assert RunTrace(records=records).best_metric_index() == 2
    assert RunTrace(records=[records[0]]).best_metric_index() is None


def test_theorem_hyperparams_pgd_g2_example():
    params = theorem_hyperparams(
        "pgd_g2", lipschitz_G=1.0, dim=100, delta=0.001, eps=0.1, initial_gap=1.0
    )
    assert params.batch_b0 == 17_640_000
    assert params.batch_b1 == 4200
    assert params.period_q == 4200
    assert params.batch_b1 == params.period_q
    assert params.steps % params.period_q == 0
    assert params.gamma == pytest.approx(0.001 / (2.0 * (100 + 10.0)))


def test_theorem_hyperparams_gcg_g2_example():
    params = theorem_hyperparams(
        "gcg_g2", lipschitz_G=1.0, dim=4, delta=0.001, eps=1.0, initial_gap=1.0, radius=1.0
    )
    assert params.batch_b0 == 2704
    assert params.batch_b1 == 52
    assert params.period_q == 52


def test_theorem_hyperparams_pgd_g1_example():
    # initial_gap chosen so that initial_gap + 2 delta G = 2
    params = theorem_hyperparams(
        "pgd_g1", lipschitz_G=1.0, dim=4, delta=0.5, eps=0.5, initial_gap=1.0, smoothing_c=1.0
    )
    assert params.steps == 256
    assert params.batch == 16_384
    assert params.gamma == pytest.approx(0.25)
    assert params.predicted_fevals == 2 * 256 * 16_384


def test_theorem_hyperparams_gcg_needs_radius():
    with pytest.raises(MissingRadius):
        theorem_hyperparams("gcg_g1", lipschitz_G=1.0, dim=4, delta=0.1, eps=0.5, initial_gap=1.0)


def test_theorem_hyperparams_gcg_gamma_formula_and_clamp():
    params = theorem_hyperparams(
        "gcg_g1", lipschitz_G=1.0, dim=4, delta=0.1, eps=0.5, initial_gap=1.0, radius=2.0
    )
    total_gap = 1.0 + 2 * 0.1 * 1.0
    expected = math.sqrt(2 * 0.1 * total_gap / (params.steps * 1.0 * 1.0 * 2.0)) / 2.0
    assert params.gamma == pytest.approx(expected)
    with pytest.warns(UserWarning, match="clamping"):
        clamped = theorem_hyperparams(
            "gcg_g1",
            lipschitz_G=0.01,
            dim=1,
            delta=5.0,
            eps=10.0,
            initial_gap=0.1,
            radius=0.001,
        )
    assert clamped.gamma == 1.0


def test_run_with_theorem_hyperparams_matches_predicted_fevals():
    params = theorem_hyperparams(
        "pgd_g2", lipschitz_G=0.5, dim=2, delta=0.5, eps=5.0, initial_gap=0.01
    )
    oracle = CountingOracle(LinearOracle([0.3, -0.4]))
    problem = ProblemSpec(dim=2, oracle=oracle, regularizer=ElasticNet(0.1, 0.1), lipschitz_G=0.5)
    config = RunConfig(
        algorithm="pgd",
        estimator=params.estimator_config(delta=0.5),
        steps=params.steps,
        gamma=None,
        theorem_params=params,
        objective_samples=0,
    )
    trace = run(problem, config)
    assert trace.cum_fevals == oracle.count == params.predicted_fevals


def test_run_config_validation():
    est = GradEstimatorConfig(option="g1", delta=0.01, batch=4)
    with pytest.raises(ValueError, match="algorithm"):
        RunConfig(algorithm="sgd", estimator=est, steps=5, gamma=0.1)
    with pytest.raises(ValueError, match="gamma"):
        RunConfig(algorithm="pgd", estimator=est, steps=5, gamma=None)
    with pytest.raises(ValueError, match="steps"):
        RunConfig(algorithm="pgd", estimator=est, steps=0, gamma=0.1)


def test_sklearn_estimator_params_round_trip():
    solver = ZerothOrderProximalGradient(gamma=0.02, steps=7, batch=5, seed=3)
    params = solver.get_params()
    assert params["gamma"] == 0.02 and params["steps"] == 7
    cloned = clone(solver)
    assert cloned.get_params() == params
    solver.set_params(gamma=0.5)
    assert solver.gamma == 0.5


def test_sklearn_proximal_fit_exposes_run_results():
    oracle = LinearOracle([1.0, -0.5])
    solver = ZerothOrderProximalGradient(
        regularizer=ElasticNet(0.2, 0.2), gamma=0.1, steps=8, batch=4, seed=1
    )
    fitted = solver.fit(oracle, x0=np.array([1.0, 1.0]))
    assert fitted is solver
    assert len(solver.trace_.records) == 8
    assert solver.output_point_.shape == (2,)
    assert 0 <= solver.output_index_ < 8
    report = solver.stationarity(n_samples=16)
    assert report.metric_kind == "pgsp_norm"


def test_sklearn_conditional_gradient_requires_growth_radius():
    solver = ZerothOrderConditionalGradient(gamma=0.5, steps=3, batch=4)
    with pytest.raises(InvalidProblem, match="growth radius"):
        solver.fit(LinearOracle([1.0, 0.0]))


def test_sklearn_conditional_gradient_fit():
    solver = ZerothOrderConditionalGradient(
        regularizer=BallIndicator(np.zeros(2), 1.0), gamma=0.3, steps=6, batch=8, lipschitz_G=1.0
    )
    solver.fit(LinearOracle([1.0, 0.0]), x0=np.zeros(2))
    assert np.linalg.norm(solver.output_point_) <= 1.0 + 1e-9
    report = solver.stationarity(n_samples=16)
    assert report.metric_kind == "cggsp_gap"
