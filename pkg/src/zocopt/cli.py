"""Command-line front end.

Subcommands:

* ``run``: run one optimizer configuration on the ReLU benchmark problem
  and write a ``step,cum_fevals,objective,metric`` trace CSV.
* ``bench``: same, but with ``train_acc`` / ``test_acc`` columns and
  presets for the four benchmark configurations.
* ``hyperparams``: print the analysis-driven hyperparameters as one JSON
  line.
* ``proptest``: run the randomized invariant suites and exit nonzero on
  any failure.

Configuration comes from a flat ``key=value`` file (``--config``) plus
repeatable ``--set key=value`` overrides; command-line values win over
file values.  Unknown keys are hard errors.  All failures print a single
``error:``-prefixed line and exit 1 (usage errors exit 2).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .bench import (
    BENCH_LAMBDA1,
    BENCH_LAMBDA2,
    NetShape,
    accuracy,
    bench_problem,
    default_init,
    generate_dataset,
    read_dataset_csv,
    write_dataset_csv,
)
from .exceptions import ParseError, UnknownKey, ZocoptError
from .optimizers import RunConfig, run, theorem_hyperparams
from .properties import run_suite
from .rng import RngStream
from .smoothing import GradEstimatorConfig

_INT_KEYS = {"T", "batch", "batch_b0", "batch_b1", "period_q", "seed", "metric_every", "metric_batch"}
_FLOAT_KEYS = {"gamma", "delta", "lambda1", "lambda2"}
_STR_KEYS = {"algorithm", "option"}
CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS

# the four benchmark configurations; ``pgd_g1`` is the default
BENCH_PRESETS = {
    "pgd_g1": {"algorithm": "pgd", "option": "g1", "T": 100, "gamma": 0.005, "batch": 500},
    "pgd_g2": {
        "algorithm": "pgd",
        "option": "g2",
        "T": 523,
        "gamma": 0.001,
        "batch_b0": 500,
        "batch_b1": 50,
        "period_q": 10,
    },
    "gcg_g1": {"algorithm": "gcg", "option": "g1", "T": 100, "gamma": 5e-5, "batch": 500},
    "gcg_g2": {
        "algorithm": "gcg",
        "option": "g2",
        "T": 523,
        "gamma": 1e-5,
        "batch_b0": 500,
        "batch_b1": 50,
        "period_q": 10,
    },
}

_DEFAULTS = {
    "delta": 0.001,
    "lambda1": BENCH_LAMBDA1,
    "lambda2": BENCH_LAMBDA2,
    "seed": 0,
    "metric_every": 0,
    "metric_batch": 2000,
}


def _convert(key: str, raw: str, where: str):
    if key not in CONFIG_KEYS:
        raise UnknownKey(f"{where}: unknown key {key!r}")
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise ParseError(f"{where}: {key} must be a number, got {raw!r}") from exc
    return raw.strip().lower()


def parse_config(path) -> dict:
    """Parse a flat ``key=value`` config file into typed values.

    Blank lines and ``#`` comments are skipped; unknown keys and malformed
    lines are hard errors carrying the line number.
    """
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ParseError(f"{path}: line {lineno}: expected key=value, got {stripped!r}")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            values[key] = _convert(key, raw.strip(), f"{path}: line {lineno}")
    return values


def _validate_settings(cfg: dict) -> dict:
    if cfg.get("algorithm") not in ("pgd", "gcg"):
        raise ParseError(f"algorithm must be pgd or gcg, got {cfg.get('algorithm')!r}")
    if cfg.get("option") not in ("g1", "g2"):
        raise ParseError(f"option must be g1 or g2, got {cfg.get('option')!r}")
    for key in ("gamma", "delta", "lambda1", "lambda2"):
        if not cfg.get(key, 0) > 0:
            raise ParseError(f"{key} must be positive, got {cfg.get(key)}")
    if cfg.get("T", 0) < 1:
        raise ParseError(f"T must be a positive integer, got {cfg.get('T')}")
    if cfg["option"] == "g1":
        if cfg.get("batch", 0) < 1:
            raise ParseError("batch required for g1 and must be positive")
    else:
        for key in ("batch_b0", "batch_b1", "period_q"):
            if cfg.get(key) is None:
                raise ParseError(f"{key} required for g2")
            if cfg[key] < 1:
                raise ParseError(f"{key} must be positive, got {cfg[key]}")
    if cfg.get("metric_every", 0) < 0:
        raise ParseError("metric_every must be >= 0")
    if cfg.get("metric_every", 0) and cfg.get("metric_batch", 0) < 2:
        raise ParseError("metric_batch must be >= 2")
    return cfg


def merge_settings(preset: str | None, file_values: dict, overrides: dict, seed=None) -> dict:
    """Defaults < preset < config file < --set overrides < --seed."""
    cfg = dict(_DEFAULTS)
    cfg.update(BENCH_PRESETS[preset if preset else "pgd_g1"])
    cfg.update(file_values)
    cfg.update(overrides)
    if seed is not None:
        cfg["seed"] = int(seed)
    return _validate_settings(cfg)


def _parse_overrides(pairs) -> dict:
    values = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ParseError(f"--set {pair!r}: expected key=value")
        key, _, raw = pair.partition("=")
        values[key.strip()] = _convert(key.strip(), raw.strip(), f"--set {pair!r}")
    return values


def _run_config_from(cfg: dict) -> RunConfig:
    if cfg["option"] == "g1":
        estimator = GradEstimatorConfig(option="g1", delta=cfg["delta"], batch=cfg["batch"])
    else:
        estimator = GradEstimatorConfig(
            option="g2",
            delta=cfg["delta"],
            batch_b0=cfg["batch_b0"],
            batch_b1=cfg["batch_b1"],
            period_q=cfg["period_q"],
        )
    return RunConfig(
        algorithm=cfg["algorithm"],
        estimator=estimator,
        steps=cfg["T"],
        gamma=cfg["gamma"],
        seed=cfg["seed"],
        record_metric_every=cfg["metric_every"],
        metric_batch=cfg["metric_batch"],
        objective_samples=0,
        objective_exact=True,
    )


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        value = float(value)  # plain-float repr round-trips at full precision
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def write_trace_csv(path, trace, train=None, test=None) -> None:
    """Write one trace row per recorded step.

    With datasets given (bench mode) the rows carry train/test accuracy of
    each iterate; otherwise those columns are omitted.
    """
    bench_mode = train is not None
    header = ["step", "cum_fevals", "objective"]
    if bench_mode:
        header += ["train_acc", "test_acc"]
    header.append("metric")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in trace.records:
            row = [rec.step, rec.cum_fevals, _format_value(rec.objective)]
            if bench_mode:
                row += [
                    _format_value(accuracy(rec.x, train)),
                    _format_value(accuracy(rec.x, test)),
                ]
            row.append(_format_value(rec.metric))
            writer.writerow(row)


def read_trace_csv(path) -> list[dict]:
    """Read a trace CSV back into typed row dictionaries."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row = {
                "step": int(raw["step"]),
                "cum_fevals": int(raw["cum_fevals"]),
                "objective": float(raw["objective"]),
                "metric": float(raw["metric"]) if raw["metric"] else None,
            }
            if "train_acc" in raw:
                row["train_acc"] = float(raw["train_acc"])
                row["test_acc"] = float(raw["test_acc"])
            rows.append(row)
        return rows


def _prepare_bench(cfg: dict, dataset_in: str | None):
    shape = NetShape()
    root = RngStream(cfg["seed"])
    data_rng, init_rng, run_rng = root.split(3)
    if dataset_in:
        train = read_dataset_csv(f"{dataset_in}_train.csv")
        test = read_dataset_csv(f"{dataset_in}_test.csv")
        shape = train.shape
    else:
        train, test = generate_dataset(shape, 1000, data_rng)
    problem = bench_problem(train, lam1=cfg["lambda1"], lam2=cfg["lambda2"])
    run_config = _run_config_from(cfg)
    run_config.x0 = default_init(shape, init_rng)
    return problem, run_config, run_rng, train, test


def _cmd_run(args) -> int:
    file_values = parse_config(args.config) if args.config else {}
    cfg = merge_settings(args.preset, file_values, _parse_overrides(args.set), args.seed)
    problem, run_config, run_rng, train, test = _prepare_bench(cfg, getattr(args, "dataset_in", None))
    trace = run(problem, run_config, run_rng)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / "trace.csv"
    if args.command == "bench":
        write_trace_csv(trace_path, trace, train=train, test=test)
        if args.dataset_out:
            write_dataset_csv(f"{args.dataset_out}_train.csv", train)
            write_dataset_csv(f"{args.dataset_out}_test.csv", test)
        final = trace.records[-1]
        print(
            f"{cfg['algorithm']}-{cfg['option']}: steps={cfg['T']} "
            f"fevals={final.cum_fevals} objective={final.objective:.6g} "
            f"train_acc={accuracy(final.x, train):.4f} test_acc={accuracy(final.x, test):.4f}"
        )
    else:
        write_trace_csv(trace_path, trace)
        final = trace.records[-1]
        print(
            f"{cfg['algorithm']}-{cfg['option']}: steps={cfg['T']} "
            f"fevals={final.cum_fevals} objective={final.objective:.6g}"
        )
    print(f"trace written to {trace_path}")
    return 0


def _cmd_hyperparams(args) -> int:
    params = theorem_hyperparams(
        args.kind,
        lipschitz_G=args.G,
        dim=args.d,
        delta=args.delta,
        eps=args.eps,
        initial_gap=args.delta0,
        radius=args.R,
        smoothing_c=args.c,
    )
    payload = {
        "kind": params.kind,
        "T": params.steps,
        "gamma": params.gamma,
        "batch": params.batch,
        "batch_b0": params.batch_b0,
        "batch_b1": params.batch_b1,
        "period_q": params.period_q,
        "predicted_fevals": params.predicted_fevals,
    }
    print(json.dumps({k: v for k, v in payload.items() if v is not None}))
    return 0


def _cmd_proptest(args) -> int:
    reports = run_suite(args.suite, trials=args.trials, seed=args.seed)
    ok = True
    for report in reports:
        print("\n".join(report.lines()))
        ok = ok and report.ok
    if not ok:
        failed = [c.name for r in reports for c in r.failures]
        print(f"error: proptest failures: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zocopt",
        description="Zeroth-order composite optimization: runs, benchmarks, "
        "hyperparameter calculators, and property suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p, with_bench_flags):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int, help="seed override (wins over config values)")
        p.add_argument("--out", default=".", help="output directory for trace.csv")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="config override; wins over --config file values, repeatable",
        )
        p.add_argument(
            "--preset",
            choices=sorted(BENCH_PRESETS),
            default=None,
            help="benchmark configuration preset (default pgd_g1)",
        )
        if with_bench_flags:
            p.add_argument("--dataset-out", help="write the datasets to PREFIX_{train,test}.csv")
            p.add_argument("--dataset-in", help="read the datasets from PREFIX_{train,test}.csv")

    run_p = sub.add_parser("run", help="run one configuration, write a trace CSV")
    add_run_flags(run_p, with_bench_flags=False)
    run_p.set_defaults(func=_cmd_run)

    bench_p = sub.add_parser("bench", help="benchmark run with accuracy columns")
    add_run_flags(bench_p, with_bench_flags=True)
    bench_p.set_defaults(func=_cmd_run)

    hyper_p = sub.add_parser("hyperparams", help="print analysis-driven hyperparameters")
    hyper_p.add_argument("kind", choices=["pgd_g1", "pgd_g2", "gcg_g1", "gcg_g2"])
    hyper_p.add_argument("--G", type=float, required=True, help="Lipschitz bound")
    hyper_p.add_argument("--d", type=int, required=True, help="dimension")
    hyper_p.add_argument("--delta", type=float, required=True, help="smoothing radius")
    hyper_p.add_argument("--eps", type=float, required=True, help="target accuracy")
    hyper_p.add_argument(
        "--delta0",
        type=float,
        required=True,
        help="estimated initial composite suboptimality",
    )
    hyper_p.add_argument("--R", type=float, default=None, help="growth radius (gcg kinds)")
    hyper_p.add_argument("--c", type=float, default=1.0, help="smoothed-gradient constant")
    hyper_p.set_defaults(func=_cmd_hyperparams)

    prop_p = sub.add_parser("proptest", help="run randomized invariant suites")
    prop_p.add_argument(
        "--suite",
        default="all",
        choices=["prox", "lmo", "estimator", "metrics", "gcg_feasibility", "all"],
    )
    prop_p.add_argument("--trials", type=int, default=None, help="trial-count override")
    prop_p.add_argument("--seed", type=int, default=0)
    prop_p.set_defaults(func=_cmd_proptest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ZocoptError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
