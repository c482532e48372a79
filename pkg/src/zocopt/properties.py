"""Randomized invariant suites for the core oracles and loops.

Each suite draws a seeded batch of random instances and checks the
contracts that the analysis relies on:

* ``prox``: prox outputs beat random probes, proxes are nonexpansive, and
  separable closed forms agree with per-coordinate golden-section search.
* ``lmo``: LMO outputs beat random probes, stay within the growth radius
  for bounded gradients, and the growth inequality holds outside it.
* ``estimator``: the two-point estimator is unbiased with the expected
  second-moment and minibatch-variance bounds, epoch starts of the
  variance-reduced option match plain minibatches bitwise, evaluation
  counts are exact, and the smoothed value stays within ``delta * G`` of
  the true function.
* ``metrics``: the proximal mapping is nonexpansive in the gradient, the
  descent inner-product inequality holds, the Frank-Wolfe gap is
  nonnegative, and the zero-regularizer metric reduces to the gradient
  norm exactly.
* ``gcg_feasibility``: conditional-gradient iterates and LMO points stay
  within the growth radius of the anchor.

The same functions back both the pytest suites and the ``proptest`` CLI
command; failures carry printable counterexamples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import fw_gap, gradient_mapping, pgsp_metric_estimate
from .oracles import CountingOracle, HalfSquaredNormOracle, L1NormOracle, LinearOracle
from .optimizers import gcg_step
from .problem import ProblemSpec
from .regularizers import (
    BallIndicator,
    BoxIndicator,
    ElasticNet,
    L1,
    SquaredL2,
    ZeroRegularizer,
    soft_threshold,
)
from .rng import RngStream
from .smoothing import (
    GradEstimatorConfig,
    GradientEstimator,
    minibatch_gradient,
    smoothed_value_estimate,
)

SECOND_MOMENT_CONSTANT = 16.0 * math.sqrt(2.0 * math.pi)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteReport:
    name: str
    trials: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(CheckResult(name, bool(passed), detail))

    def lines(self) -> list[str]:
        out = [f"suite {self.name} (trials={self.trials})"]
        for c in self.checks:
            status = "ok" if c.passed else "FAIL"
            detail = f"  {c.detail}" if c.detail else ""
            out.append(f"  [{status}] {c.name}{detail}")
        return out


def golden_section_min(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Minimize a unimodal scalar function on [lo, hi] by golden-section search."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _random_regularizer(gen, d):
    kind = gen.integers(0, 5)
    if kind == 0:
        return L1(gen.uniform(0.1, 2.0))
    if kind == 1:
        return SquaredL2(gen.uniform(0.1, 2.0))
    if kind == 2:
        return ElasticNet(gen.uniform(0.1, 2.0), gen.uniform(0.1, 2.0))
    if kind == 3:
        return BallIndicator(gen.standard_normal(d), gen.uniform(0.5, 3.0))
    lower = gen.uniform(-3.0, -0.2, size=d)
    return BoxIndicator(lower, lower + gen.uniform(0.5, 3.0, size=d))


def _feasible_point(reg, gen, d):
    """A random point with finite regularizer value."""
    if isinstance(reg, BallIndicator):
        u = gen.standard_normal(d)
        u /= np.linalg.norm(u)
        return reg.center + u * reg.radius * gen.uniform(0.0, 1.0)
    if isinstance(reg, BoxIndicator):
        return gen.uniform(reg.lower, reg.upper)
    return gen.standard_normal(d) * 2.0


def prox_suite(trials: int = 1000, seed: int = 0) -> SuiteReport:
    gen = RngStream(seed).generator
    report = SuiteReport("prox", trials)

    worst_gap, bad_opt = 0.0, None
    worst_exp, bad_exp = 0.0, None
    for _ in range(trials):
        d = int(gen.integers(1, 6))
        reg = _random_regularizer(gen, d)
        gamma = gen.uniform(0.05, 2.0)
        v = gen.standard_normal(d) * 3.0
        p = reg.prox(v, gamma)
        fp = reg.value(p) + np.dot(p - v, p - v) / (2 * gamma)
        for _ in range(3):
            y = _feasible_point(reg, gen, d) if gen.uniform() < 0.5 else p + 0.5 * gen.standard_normal(d)
            fy = reg.value(y) + np.dot(y - v, y - v) / (2 * gamma)
            gap = fp - fy
            if gap > worst_gap:
                worst_gap, bad_opt = gap, (type(reg).__name__, v.tolist(), gamma)
        w = gen.standard_normal(d) * 3.0
        expansion = np.linalg.norm(reg.prox(v, gamma) - reg.prox(w, gamma)) - np.linalg.norm(v - w)
        if expansion > worst_exp:
            worst_exp, bad_exp = expansion, (type(reg).__name__, v.tolist(), w.tolist(), gamma)
    report.add(
        "prox minimizes its objective against probes",
        worst_gap <= 1e-10,
        f"worst excess {worst_gap:.3e}" + (f" at {bad_opt}" if worst_gap > 1e-10 else ""),
    )
    report.add(
        "prox is nonexpansive",
        worst_exp <= 1e-10,
        f"worst expansion {worst_exp:.3e}" + (f" at {bad_exp}" if worst_exp > 1e-10 else ""),
    )

    # closed-form separable proxes vs per-coordinate golden-section search
    worst_dev, bad_dev = 0.0, None
    for _ in range(trials):
        gamma = gen.uniform(0.05, 2.0)
        if gen.uniform() < 0.5:
            lam1, lam2 = gen.uniform(0.1, 2.0), gen.uniform(0.1, 2.0)
            reg = ElasticNet(lam1, lam2)
        else:
            lam1, lam2 = gen.uniform(0.1, 2.0), 0.0
            reg = L1(lam1)
        v = float(gen.standard_normal() * 3.0)
        # extended precision: float64 objective values are flat to ~1e-7
        # around the minimizer, below the 1e-8 agreement target
        lam1_l, lam2_l, v_l, gamma_l = (
            np.longdouble(lam1),
            np.longdouble(lam2),
            np.longdouble(v),
            np.longdouble(gamma),
        )

        def scalar_objective(y):
            y = np.longdouble(y)
            return (
                lam1_l * abs(y) + 0.5 * lam2_l * y * y + (y - v_l) ** 2 / (2 * gamma_l)
            )

        bracket = abs(v) + gamma * lam1 + 1.0
        brute = golden_section_min(scalar_objective, -bracket, bracket)
        closed = float(reg.prox(np.array([v]), gamma)[0])
        dev = abs(brute - closed)
        if dev > worst_dev:
            worst_dev, bad_dev = dev, (type(reg).__name__, lam1, lam2, v, gamma)
    report.add(
        "closed-form prox matches golden-section search",
        worst_dev <= 1e-8,
        f"worst deviation {worst_dev:.3e}" + (f" at {bad_dev}" if worst_dev > 1e-8 else ""),
    )
    return report


def lmo_suite(trials: int = 1000, seed: int = 0) -> SuiteReport:
    gen = RngStream(seed).generator
    report = SuiteReport("lmo", trials)
    lipschitz_bound = 1.5

    worst_gap, worst_excess, worst_growth = 0.0, 0.0, 0.0
    bad = {}
    for _ in range(trials):
        d = int(gen.integers(1, 6))
        reg = _random_regularizer(gen, d)
        if isinstance(reg, L1):
            # a growth radius needs the l1 weight above the Lipschitz bound
            reg = L1(lipschitz_bound + gen.uniform(0.1, 1.0))
        g = gen.standard_normal(d)
        norm = np.linalg.norm(g)
        if norm > 0:
            g *= gen.uniform(0.0, lipschitz_bound) / norm
        y_star = reg.lmo(g)
        base = reg.value(y_star) + np.dot(y_star, g)
        for _ in range(3):
            y = _feasible_point(reg, gen, d)
            gap = base - (reg.value(y) + np.dot(y, g))
            if gap > worst_gap:
                worst_gap, bad["opt"] = gap, (type(reg).__name__, g.tolist())
        import warnings as _warnings

        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")
            anchor, radius = reg.anchor_radius(lipschitz_bound, d)
        excess = np.linalg.norm(y_star - anchor) - radius
        if excess > worst_excess:
            worst_excess, bad["bound"] = excess, (type(reg).__name__, g.tolist())
        # growth outside the radius
        u = gen.standard_normal(d)
        u /= max(np.linalg.norm(u), 1e-12)
        x = anchor + u * radius * gen.uniform(1.0 + 1e-6, 10.0)
        margin = reg.value(x) - (
            reg.value(anchor) + lipschitz_bound * np.linalg.norm(x - anchor)
        )
        if not margin > 0:
            worst_growth = min(worst_growth, margin)
            bad["growth"] = (type(reg).__name__, x.tolist())
    report.add(
        "lmo minimizes its objective against probes",
        worst_gap <= 1e-10,
        f"worst excess {worst_gap:.3e}" + (f" at {bad.get('opt')}" if worst_gap > 1e-10 else ""),
    )
    report.add(
        "lmo output stays within the growth radius for bounded gradients",
        worst_excess <= 1e-9,
        f"worst excess {worst_excess:.3e}" + (f" at {bad.get('bound')}" if worst_excess > 1e-9 else ""),
    )
    report.add(
        "growth inequality holds outside the radius",
        worst_growth == 0.0,
        f"worst margin {worst_growth:.3e}" + (f" at {bad.get('growth')}" if worst_growth < 0 else ""),
    )
    return report


def _vector_stderr(estimate, batch):
    return estimate.stderr(batch)


def estimator_suite(trials: int = 100000, seed: int = 0) -> SuiteReport:
    """Monte-Carlo checks of the two-point estimator; ``trials`` is the
    sample count of the unbiasedness and second-moment checks."""
    rng = RngStream(seed)
    report = SuiteReport("estimator", trials)
    samples = max(int(trials), 1000)

    # unbiasedness on oracles with known smoothed gradients
    linear = LinearOracle(np.array([0.6, -0.8]))  # |a| = 1
    quad = HalfSquaredNormOracle(3)
    for oracle, x, truth, delta, label in (
        (linear, np.array([0.3, 0.7]), linear.slope, 0.05, "linear"),
        (quad, np.array([1.0, -0.5, 2.0]), np.array([1.0, -0.5, 2.0]), 0.05, "quadratic"),
    ):
        sub = rng.split(1)[0]
        est = minibatch_gradient(oracle, x, delta, samples, sub)
        err = float(np.linalg.norm(est.vector - truth))
        bound = 3.0 * _vector_stderr(est, samples)
        report.add(
            f"unbiased on {label} oracle",
            err <= bound,
            f"|mean - truth| = {err:.3e} vs 3*stderr = {bound:.3e}",
        )

    # second moment bound on Lipschitz oracles
    for oracle, x, G, label in (
        (linear, np.array([0.3, 0.7]), 1.0, "linear"),
        (L1NormOracle(4), np.array([0.5, -1.0, 0.0, 2.0]), 2.0, "l1-norm"),
    ):
        sub = rng.split(1)[0]
        est = minibatch_gradient(oracle, x, 0.05, samples, sub)
        bound = SECOND_MOMENT_CONSTANT * oracle.dim * G**2
        report.add(
            f"second moment within bound on {label} oracle",
            est.second_moment <= 1.05 * bound,
            f"empirical E|ghat|^2 = {est.second_moment:.4g} vs bound {bound:.4g}",
        )

    # minibatch variance: within the bound and halving with batch size
    oracle = LinearOracle(np.array([0.5, 0.5, 0.5, 0.5]))  # |a| = 1, d = 4
    truth = oracle.slope
    x = np.zeros(4)
    reps = max(2000, min(8000, samples // 10))
    variances = {}
    for batch in (4, 8):
        sub = rng.split(1)[0]
        errs = np.empty(reps)
        for i in range(reps):
            est = minibatch_gradient(oracle, x, 0.05, batch, sub)
            diff = est.vector - truth
            errs[i] = np.dot(diff, diff)
        variances[batch] = float(np.mean(errs))
    bound4 = SECOND_MOMENT_CONSTANT * 4 * 1.0 / 4
    report.add(
        "minibatch variance within bound",
        variances[4] <= 1.10 * bound4,
        f"E|g_B - grad|^2 = {variances[4]:.4g} vs bound {bound4:.4g} at B=4",
    )
    ratio = variances[4] / variances[8]
    report.add(
        "variance halves when the batch doubles",
        1.6 <= ratio <= 2.4,
        f"variance ratio B=4 / B=8 = {ratio:.3f}",
    )

    # epoch start of g2 is bitwise a g1 minibatch on an identical stream
    cfg = GradEstimatorConfig(option="g2", delta=0.05, batch_b0=16, batch_b1=4, period_q=3)
    est_g2 = GradientEstimator(oracle, cfg, RngStream(seed + 41)).step(x)
    est_g1 = minibatch_gradient(oracle, x, 0.05, 16, RngStream(seed + 41))
    report.add(
        "g2 epoch start equals g1 minibatch bitwise",
        bool(np.array_equal(est_g2.vector, est_g1.vector)),
        "",
    )

    # evaluation accounting is exact
    counter = CountingOracle(oracle)
    sub = rng.split(1)[0]
    cfg = GradEstimatorConfig(option="g2", delta=0.05, batch_b0=8, batch_b1=3, period_q=4)
    estimator = GradientEstimator(counter, cfg, sub)
    point = x
    for _ in range(10):
        estimate = estimator.step(point)
        point = point + 0.01 * estimate.vector
    expected = 2 * 8 * 3 + 4 * 3 * 7  # 3 epoch starts, 7 corrected steps
    report.add(
        "evaluation counts are exact",
        estimator.cum_fevals == counter.count == expected,
        f"reported {estimator.cum_fevals}, observed {counter.count}, expected {expected}",
    )

    # smoothing sandwich |F_delta - F| <= delta * G on Lipschitz oracles
    worst = -math.inf
    for oracle, G in ((L1NormOracle(1), 1.0), (L1NormOracle(5), math.sqrt(5))):
        sub = rng.split(1)[0]
        gen = sub.generator
        for delta in (0.01, 0.1):
            for _ in range(100):
                x = gen.standard_normal(oracle.dim) * 2.0
                mean, stderr = smoothed_value_estimate(oracle, x, delta, 2000, sub)
                excess = abs(mean - oracle.evaluate(x, 0)) - (delta * G + 3.0 * stderr)
                worst = max(worst, excess)
    report.add(
        "smoothed value within delta*G of the function",
        worst <= 0.0,
        f"worst excess {worst:.3e}",
    )
    return report


def metrics_suite(trials: int = 1000, seed: int = 0) -> SuiteReport:
    gen = RngStream(seed).generator
    report = SuiteReport("metrics", trials)

    worst_contract, worst_inprod, worst_gap = 0.0, 0.0, 0.0
    bad = {}
    for _ in range(trials):
        d = int(gen.integers(1, 6))
        reg = _random_regularizer(gen, d)
        gamma = gen.uniform(0.05, 2.0)
        x = _feasible_point(reg, gen, d)
        g = gen.standard_normal(d) * 2.0
        g2 = gen.standard_normal(d) * 2.0

        lhs = np.linalg.norm(
            gradient_mapping(x, g2, gamma, reg) - gradient_mapping(x, g, gamma, reg)
        )
        excess = lhs - np.linalg.norm(g2 - g)
        if excess > worst_contract:
            worst_contract, bad["contract"] = excess, (type(reg).__name__, gamma)

        mapping = gradient_mapping(x, g, gamma, reg)
        prox_point = reg.prox(x - gamma * g, gamma)
        rhs = np.dot(mapping, mapping) + (reg.value(prox_point) - reg.value(x)) / gamma
        violation = rhs - np.dot(g, mapping)
        if violation > worst_inprod:
            worst_inprod, bad["inprod"] = violation, (type(reg).__name__, gamma)

        if isinstance(reg, L1):
            gap_g = g * min(1.0, reg.lam / (np.max(np.abs(g)) + 1e-12)) * gen.uniform(0, 1)
        else:
            gap_g = g
        gap = fw_gap(x, gap_g, reg)
        if gap < worst_gap:
            worst_gap, bad["gap"] = gap, (type(reg).__name__, x.tolist())
    report.add(
        "gradient mapping contracts in the gradient",
        worst_contract <= 1e-10,
        f"worst excess {worst_contract:.3e}" + (f" at {bad.get('contract')}" if worst_contract > 1e-10 else ""),
    )
    report.add(
        "inner-product inequality holds",
        worst_inprod <= 1e-10,
        f"worst violation {worst_inprod:.3e}" + (f" at {bad.get('inprod')}" if worst_inprod > 1e-10 else ""),
    )
    report.add(
        "frank-wolfe gap is nonnegative",
        worst_gap >= -1e-12,
        f"worst gap {worst_gap:.3e}" + (f" at {bad.get('gap')}" if worst_gap < -1e-12 else ""),
    )

    # zero regularizer: metric reduces to the plain gradient-estimate norm
    oracle = LinearOracle(np.array([1.0, -2.0]))
    problem = ProblemSpec(
        dim=2, oracle=oracle, regularizer=ZeroRegularizer(), lipschitz_G=3.0
    )
    # two identically seeded streams so the reference sees the same draws
    reference = minibatch_gradient(
        oracle, np.array([0.4, 0.1]), 0.05, 64, RngStream(seed + 17)
    )
    reduction = pgsp_metric_estimate(
        problem, np.array([0.4, 0.1]), 0.7, 0.05, 64, RngStream(seed + 17)
    )
    report.add(
        "zero-regularizer metric equals the gradient-estimate norm exactly",
        reduction.value == float(np.linalg.norm(reference.vector)),
        f"metric {reduction.value!r} vs norm {float(np.linalg.norm(reference.vector))!r}",
    )
    return report


def gcg_feasibility_suite(trials: int = 100, seed: int = 0) -> SuiteReport:
    """Conditional-gradient runs stay within the growth radius."""
    rng = RngStream(seed)
    gen = rng.generator
    report = SuiteReport("gcg_feasibility", trials)
    worst, bad = 0.0, None
    for trial in range(trials):
        d = int(gen.integers(2, 5))
        if gen.uniform() < 0.5:
            reg = BallIndicator(gen.standard_normal(d), gen.uniform(0.5, 2.0))
        else:
            reg = ElasticNet(gen.uniform(0.05, 0.5), gen.uniform(0.3, 1.5))
        if gen.uniform() < 0.5:
            slope = gen.standard_normal(d)
            slope *= 1.0 / np.linalg.norm(slope)
            oracle = LinearOracle(slope)
            G = 1.0
        else:
            oracle = L1NormOracle(d)
            G = math.sqrt(d)
        anchor, radius = reg.anchor_radius(G, d)
        u = gen.standard_normal(d)
        u /= np.linalg.norm(u)
        x = anchor + u * radius * gen.uniform(0.0, 0.9)
        gamma = gen.uniform(0.05, 1.0)
        # batch large enough that the estimate stays within 2G of the mean
        estimator = GradientEstimator(
            oracle,
            GradEstimatorConfig(option="g1", delta=0.01, batch=64 * d),
            rng.split(1)[0],
        )
        for _ in range(20):
            estimate = estimator.step(x)
            y, x = gcg_step(x, estimate.vector, gamma, reg)
            for label, point in (("lmo point", y), ("iterate", x)):
                excess = float(np.linalg.norm(point - anchor)) - radius
                if excess > worst:
                    worst, bad = excess, (trial, label, type(reg).__name__)
    report.add(
        "iterates and lmo points stay within the growth radius",
        worst <= 1e-9,
        f"worst excess {worst:.3e}" + (f" at {bad}" if worst > 1e-9 else ""),
    )
    return report


SUITES = {
    "prox": prox_suite,
    "lmo": lmo_suite,
    "estimator": estimator_suite,
    "metrics": metrics_suite,
    "gcg_feasibility": gcg_feasibility_suite,
}


def run_suite(name: str, trials: int | None = None, seed: int = 0) -> list[SuiteReport]:
    """Run one named suite, or all of them, with an optional trial override."""
    names = list(SUITES) if name == "all" else [name]
    reports = []
    for suite_name in names:
        fn = SUITES[suite_name]
        reports.append(fn(seed=seed) if trials is None else fn(trials=trials, seed=seed))
    return reports
