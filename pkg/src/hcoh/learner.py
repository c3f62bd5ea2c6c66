"""Single-instance SGD for linear hash functions under a tanh relaxation.

The model is a linear map W in R^{d x r} with bias b in R^r.  The hard
hash sign(W.T x + b) is relaxed to a = tanh(W.T x + b) and fitted to the
{-1,+1} target code t of the instance's class by squared error

    L(x) = || a - t ||^2,        batch mean over n instances.

One update step of plain gradient descent with rate eta:

    E      = (a - t) * (1 - a * a)          (elementwise)
    grad_W = (2/n) X.T E,   grad_b = (2/n) sum_rows(E)
    W     -= eta * grad_W,  b     -= eta * grad_b

where 1 - a*a is the derivative of tanh.  The alternative factor
(1 - a) * a sometimes seen for this update is the *sigmoid* derivative
form; it is not the derivative of tanh and fails finite-difference
verification, but is available via ``gradient="sigmoid"`` for
comparison runs.  The constant 2 from the squared norm stays inside the
gradient rather than being folded into eta, so quoted learning rates
mean what they say.

Batches of size one are the intended streaming mode; larger n averages
the per-instance gradients, so duplicating an instance changes nothing
and instance order within a batch never matters.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericFailureError
from .hadamard import HadamardCodebook
from .lsh import LshReducer, TargetCodeTable

GRADIENT_FACTORS = ("exact", "sigmoid")


@dataclass
class TrainBatch:
    """One round of streaming input: n feature rows with their labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features, dtype=np.float64))
        self.labels = np.atleast_1d(np.asarray(self.labels))
        if self.features.shape[0] != self.labels.shape[0]:
            raise DimensionError(
                f"{self.features.shape[0]} feature rows but "
                f"{self.labels.shape[0]} labels")
        if self.features.shape[0] < 1:
            raise DimensionError("batch must contain at least one instance")
        if not np.isfinite(self.features).all():
            raise ValueError("batch contains non-finite feature values")

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass
class HashModel:
    """Learned projection W (d x r), bias b (r), and training state."""

    weights: np.ndarray
    bias: np.ndarray
    eta: float
    round: int = 0

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def code_length(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "HashModel":
        return HashModel(self.weights.copy(), self.bias.copy(), self.eta, self.round)


def init_model(d: int, r: int, eta: float, seed: int) -> HashModel:
    """Fresh model with W and b drawn i.i.d. standard normal from ``seed``."""
    if d < 1 or r < 1:
        raise DimensionError(f"model dims must be positive, got d={d}, r={r}")
    if eta <= 0:
        raise ValueError(f"learning rate must be positive, got {eta}")
    rng = np.random.default_rng(seed)
    weights = rng.standard_normal((d, r))
    bias = rng.standard_normal(r)
    return HashModel(weights=weights, bias=bias, eta=float(eta))


def _activations(model: HashModel, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.feature_dim:
        raise DimensionError(
            f"features have shape {features.shape}, expected "
            f"(n, {model.feature_dim})")
    return np.tanh(features @ model.weights + model.bias)


def relaxed_codes(model: HashModel, features: np.ndarray) -> np.ndarray:
    """tanh(W.T x + b) per instance; an (n, r) matrix with entries in (-1, 1)."""
    return _activations(model, features)


def loss(model: HashModel, batch: TrainBatch, targets: np.ndarray) -> float:
    """Batch-mean squared error between relaxed codes and target codes."""
    targets = np.asarray(targets, dtype=np.float64)
    a = _activations(model, batch.features)
    if targets.shape != a.shape:
        raise DimensionError(
            f"targets have shape {targets.shape}, expected {a.shape}")
    diff = a - targets
    return float((diff * diff).sum() / len(batch))


def sgd_step(model: HashModel, batch: TrainBatch, targets: np.ndarray,
             gradient: str = "exact") -> HashModel:
    """One in-place gradient step on ``model``; increments the round counter.

    ``gradient="exact"`` uses the tanh derivative 1 - a^2; ``"sigmoid"``
    uses (1 - a) * a instead (see module docstring).
    """
    if gradient not in GRADIENT_FACTORS:
        raise ValueError(f"gradient must be one of {GRADIENT_FACTORS}")
    targets = np.asarray(targets, dtype=np.float64)
    a = _activations(model, batch.features)
    if targets.shape != a.shape:
        raise DimensionError(
            f"targets have shape {targets.shape}, expected {a.shape}")
    if gradient == "exact":
        factor = 1.0 - a * a
    else:
        factor = (1.0 - a) * a
    n = len(batch)
    err = (a - targets) * factor
    with np.errstate(invalid="ignore", over="ignore"):  # guard below reports
        grad_w = (2.0 / n) * (batch.features.T @ err)
        grad_b = (2.0 / n) * err.sum(axis=0)
        model.weights -= model.eta * grad_w
        model.bias -= model.eta * grad_b
    model.round += 1
    if not (np.isfinite(model.weights).all() and np.isfinite(model.bias).all()):
        raise NumericFailureError(
            f"non-finite parameters after update at round {model.round}",
            round_index=model.round)
    return model


def train_stream(model: HashModel, batches, book: HadamardCodebook,
                 reducer: LshReducer, table: TargetCodeTable = None,
                 milestones=(), hook=None, gradient: str = "exact"):
    """Consume an ordered stream of TrainBatch, one SGD step per batch.

    Each batch's labels are resolved to target codes through the codebook
    and reducer (cached in ``table``), then applied with :func:`sgd_step`.
    Whenever the cumulative instance count crosses the next milestone a
    snapshot (instances_seen, model copy) is recorded and, if given,
    ``hook(instances_seen, snapshot)`` is invoked.  Returns the final
    model and the list of snapshots.
    """
    if table is None:
        table = TargetCodeTable(out_dim=model.code_length)
    milestones = sorted(int(m) for m in milestones)
    next_ms = 0
    seen = 0
    snapshots = []
    for batch in batches:
        targets = np.stack(
            [table.target_for(label, book, reducer) for label in batch.labels]
        ).astype(np.float64)
        sgd_step(model, batch, targets, gradient=gradient)
        seen += len(batch)
        if next_ms < len(milestones) and seen >= milestones[next_ms]:
            while next_ms < len(milestones) and milestones[next_ms] <= seen:
                next_ms += 1
            snap = model.copy()
            snapshots.append((seen, snap))
            if hook is not None:
                hook(seen, snap)
    return model, snapshots
