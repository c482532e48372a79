"""Two-layer ReLU network benchmark on synthetic sparse-teacher data.

A teacher parameter vector with half its entries zeroed labels standard
Gaussian inputs through a small ReLU network; training minimizes the
softmax cross-entropy of the student network plus an elastic-net penalty.
The parameter vector concatenates, in order: the first-layer weights (row
major), the second-layer weights (row major), the first-layer bias, the
second-layer bias.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .exceptions import NonFiniteLogits, ParseError
from .oracles import FiniteSumOracle
from .problem import ProblemSpec
from .regularizers import ElasticNet
from .rng import RngStream
from .validation import as_vector, check_positive_int

# Elastic-net weights of the benchmark objective.
BENCH_LAMBDA1 = 0.01
BENCH_LAMBDA2 = 0.01
# Documented Lipschitz bound supplied for the benchmark problem.  It only
# feeds validation and the growth radius of the elastic net; the benchmark
# step sizes are fine-tuned values, not derived ones.
BENCH_LIPSCHITZ_G = 1.0


@dataclass(frozen=True)
class NetShape:
    """Layer sizes of the two-layer network."""

    d_xi: int = 5
    d1: int = 4
    d2: int = 2

    def __post_init__(self):
        check_positive_int(self.d_xi, "d_xi")
        check_positive_int(self.d1, "d1")
        check_positive_int(self.d2, "d2")

    @property
    def total_dim(self) -> int:
        return self.d1 * self.d_xi + self.d1 * self.d2 + self.d1 + self.d2

    def unpack(self, params: np.ndarray):
        """Split a flat parameter vector into (W1, W2, b1, b2)."""
        params = as_vector(params, dim=self.total_dim, name="params")
        n1 = self.d1 * self.d_xi
        n2 = n1 + self.d2 * self.d1
        w1 = params[:n1].reshape(self.d1, self.d_xi)
        w2 = params[n1:n2].reshape(self.d2, self.d1)
        b1 = params[n2 : n2 + self.d1]
        b2 = params[n2 + self.d1 :]
        return w1, w2, b1, b2


@dataclass
class Dataset:
    """Labeled inputs plus the teacher parameters that generated the labels."""

    shape: NetShape
    inputs: np.ndarray
    labels: np.ndarray
    teacher: np.ndarray
    seed: int = 0

    @property
    def n(self) -> int:
        return self.inputs.shape[0]


def relu_forward(params, xi, shape: NetShape) -> np.ndarray:
    """Exact forward pass; returns the output logits."""
    w1, w2, b1, b2 = shape.unpack(params)
    xi = as_vector(xi, dim=shape.d_xi, name="xi")
    hidden = np.maximum(w1 @ xi + b1, 0.0)
    return w2 @ hidden + b2


def _forward_dataset(params, inputs, shape: NetShape) -> np.ndarray:
    """Logits of one parameter vector on many inputs, one row per input."""
    w1, w2, b1, b2 = shape.unpack(params)
    hidden = np.maximum(inputs @ w1.T + b1, 0.0)
    return hidden @ w2.T + b2


def _forward_many_params(param_rows, inputs, shape: NetShape) -> np.ndarray:
    """Logits of param_rows[i] on inputs[i], one row per pair."""
    n1 = shape.d1 * shape.d_xi
    n2 = n1 + shape.d2 * shape.d1
    w1 = param_rows[:, :n1].reshape(-1, shape.d1, shape.d_xi)
    w2 = param_rows[:, n1:n2].reshape(-1, shape.d2, shape.d1)
    b1 = param_rows[:, n2 : n2 + shape.d1]
    b2 = param_rows[:, n2 + shape.d1 :]
    hidden = np.maximum(np.einsum("bij,bj->bi", w1, inputs) + b1, 0.0)
    return np.einsum("boh,bh->bo", w2, hidden) + b2


def cross_entropy_loss(logits, label: int) -> float:
    """Softmax cross entropy of two logits against a binary label."""
    logits = as_vector(logits, dim=2, name="logits")
    if not np.all(np.isfinite(logits)):
        raise NonFiniteLogits(f"logits must be finite, got {logits}")
    shifted = logits - np.max(logits)
    log_norm = float(np.log(np.sum(np.exp(shifted))))
    return log_norm - float(shifted[int(label)])


def _cross_entropy_rows(logits, labels) -> np.ndarray:
    if not np.all(np.isfinite(logits)):
        raise NonFiniteLogits("logits must be finite")
    shifted = logits - np.max(logits, axis=1, keepdims=True)
    log_norm = np.log(np.sum(np.exp(shifted), axis=1))
    picked = shifted[np.arange(len(labels)), np.asarray(labels, dtype=int)]
    return log_norm - picked


def generate_dataset(
    shape: NetShape, n: int, rng: RngStream
) -> tuple[Dataset, Dataset]:
    """Generate a train set and an equally sized held-out test set.

    The teacher vector zeroes ``total_dim // 2`` uniformly random positions
    and draws the rest from a standard normal.  Inputs are i.i.d. standard
    normal; the label is 0 when the teacher's first logit is strictly
    larger than its second, otherwise 1.  Both sets share the teacher.
    """
    n = check_positive_int(n, "n")
    gen = rng.generator
    d = shape.total_dim
    teacher = gen.standard_normal(d)
    zero_positions = gen.permutation(d)[: d // 2]
    teacher[zero_positions] = 0.0

    def make_split(seed_tag: int) -> Dataset:
        inputs = gen.standard_normal((n, shape.d_xi))
        logits = _forward_dataset(teacher, inputs, shape)
        labels = np.where(logits[:, 0] > logits[:, 1], 0, 1).astype(np.int64)
        return Dataset(
            shape=shape, inputs=inputs, labels=labels, teacher=teacher.copy(), seed=seed_tag
        )

    seed_tag = rng.seed if isinstance(rng.seed, int) else 0
    return make_split(seed_tag), make_split(seed_tag)


class ReluBenchOracle(FiniteSumOracle):
    """Per-example cross-entropy loss of the student network.

    Tokens index training examples; the expectation over uniform tokens is
    the dataset's average loss.
    """

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self.shape = dataset.shape
        self.dim = dataset.shape.total_dim
        self.n_samples = dataset.n

    def evaluate(self, x, token):
        xi = self.dataset.inputs[int(token)]
        label = int(self.dataset.labels[int(token)])
        return cross_entropy_loss(relu_forward(x, xi, self.shape), label)

    def evaluate_batch(self, points, tokens):
        points = np.asarray(points, dtype=float)
        tokens = np.asarray(tokens, dtype=int)
        logits = _forward_many_params(points, self.dataset.inputs[tokens], self.shape)
        return _cross_entropy_rows(logits, self.dataset.labels[tokens])

    def mean_loss(self, x) -> float:
        """Exact average loss over the whole dataset."""
        x = as_vector(x, dim=self.dim)
        logits = _forward_dataset(x, self.dataset.inputs, self.shape)
        return float(np.mean(_cross_entropy_rows(logits, self.dataset.labels)))


def bench_oracle(dataset: Dataset, shape: NetShape | None = None) -> ReluBenchOracle:
    """Stochastic oracle for the benchmark's loss term."""
    if shape is not None and shape != dataset.shape:
        raise ValueError("shape does not match the dataset's shape")
    return ReluBenchOracle(dataset)


def bench_problem(
    dataset: Dataset,
    lam1: float = BENCH_LAMBDA1,
    lam2: float = BENCH_LAMBDA2,
    lipschitz_G: float = BENCH_LIPSCHITZ_G,
    smoothing_c: float = 1.0,
) -> ProblemSpec:
    """The benchmark's composite problem: average loss plus elastic net."""
    oracle = bench_oracle(dataset)
    return ProblemSpec(
        dim=oracle.dim,
        oracle=oracle,
        regularizer=ElasticNet(lam1, lam2),
        lipschitz_G=lipschitz_G,
        smoothing_c=smoothing_c,
        name="relu_bench",
    )


def accuracy(params, dataset: Dataset) -> float:
    """Fraction of examples whose argmax logit matches the label.

    Ties between the two logits count as a prediction of label 0.
    """
    logits = _forward_dataset(params, dataset.inputs, dataset.shape)
    predictions = np.where(logits[:, 0] >= logits[:, 1], 0, 1)
    return float(np.mean(predictions == dataset.labels))


def default_init(shape: NetShape, rng: RngStream) -> np.ndarray:
    """Start point for benchmark runs.

    Hidden-layer weights and biases are standard normal while the readout
    layer starts at zero, so the initial logits are zero (loss log 2) and
    every bit of readout movement is signal-driven rather than fighting a
    random initial readout.
    """
    gen = rng.generator
    n_w1 = shape.d1 * shape.d_xi
    x0 = np.zeros(shape.total_dim)
    x0[:n_w1] = gen.standard_normal(n_w1)
    w2_end = n_w1 + shape.d2 * shape.d1
    x0[w2_end : w2_end + shape.d1] = gen.standard_normal(shape.d1)
    return x0


def write_dataset_csv(path, dataset: Dataset) -> None:
    """Write a dataset to CSV with a header recording shape, size and seed.

    Floats are written with full round-trip precision.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["d_xi", "d1", "d2", "n", "seed"])
        writer.writerow(
            [dataset.shape.d_xi, dataset.shape.d1, dataset.shape.d2, dataset.n, dataset.seed]
        )
        writer.writerow(["teacher"])
        writer.writerow([repr(float(v)) for v in dataset.teacher])
        writer.writerow([f"xi{i}" for i in range(dataset.shape.d_xi)] + ["label"])
        for row, label in zip(dataset.inputs, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def read_dataset_csv(path) -> Dataset:
    """Read a dataset written by :func:`write_dataset_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    try:
        if rows[0] != ["d_xi", "d1", "d2", "n", "seed"]:
            raise ParseError(f"{path}: line 1: unrecognized dataset header {rows[0]}")
        d_xi, d1, d2, n, seed = (int(v) for v in rows[1])
        shape = NetShape(d_xi=d_xi, d1=d1, d2=d2)
        if rows[2] != ["teacher"]:
            raise ParseError(f"{path}: line 3: expected the teacher section")
        teacher = np.array([float(v) for v in rows[3]])
        data = rows[5 : 5 + n]
        inputs = np.array([[float(v) for v in row[:-1]] for row in data])
        labels = np.array([int(row[-1]) for row in data], dtype=np.int64)
    except (IndexError, ValueError) as exc:
        raise ParseError(f"{path}: malformed dataset file: {exc}") from exc
    if teacher.shape[0] != shape.total_dim or inputs.shape != (n, d_xi):
        raise ParseError(f"{path}: dataset sections do not match the declared shape")
    return Dataset(shape=shape, inputs=inputs, labels=labels, teacher=teacher, seed=seed)
