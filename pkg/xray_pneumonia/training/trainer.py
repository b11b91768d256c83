"""
Training loop, evaluation and dataset splitting.

Random streams of one run are derived from a single base Rng:
stream 0 initialises the model, stream 1 shuffles batches and stream 2
drives dropout. Identical seeds therefore give identical runs.
"""

from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from ..config.logging import log_epoch
from ..errors import DivergedError, ParameterError, ShapeError
from ..layers import LayerStack
from ..models.core import TrainConfig
from ..models.enums import HeadKind, LayerMode
from ..models.metrics import EpochRecord, Metrics
from ..tensor_core import Rng, Tensor
from .loss import bce_grad, bce_loss
from .metrics import compute_metrics
from .optim import AdamState, adam_step

logger = logging.getLogger("trainer")

INIT_STREAM = 0
SHUFFLE_STREAM = 1
DROPOUT_STREAM = 2
SPLIT_STREAM = 3


@dataclass
class Dataset:
    """Preprocessed images (N×3×S×S) with 0/1 labels and optional source paths."""
    x: Tensor
    y: np.ndarray
    paths: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        if self.x.shape[0] != self.y.shape[0]:
            raise ShapeError.mismatch("images and labels differ in count", self.x.shape[:1], self.y.shape)
        if np.any((self.y != 0) & (self.y != 1)):
            raise ParameterError("labels must be 0 or 1")
        if self.paths and len(self.paths) != len(self.y):
            raise ShapeError.mismatch("paths and labels differ in count", (len(self.paths),), self.y.shape)

    def __len__(self) -> int:
        return int(self.y.shape[0])

    def subset(self, indices: Sequence[int]) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        paths = [self.paths[i] for i in indices] if self.paths else []
        return Dataset(self.x[indices], self.y[indices], paths)


@dataclass
class TrainResult:
    model: LayerStack
    history: List[EpochRecord]
    optimizer: AdamState

    @property
    def final(self) -> Optional[EpochRecord]:
        return self.history[-1] if self.history else None


def split_dataset(n: int, test_fraction: float, rng: Rng) -> Tuple[np.ndarray, np.ndarray]:
    """
    Seeded train/test partition of range(n).

    The last round(n·test_fraction) entries of a permutation form the test
    set; at least one item always stays in the training set. Both index
    arrays are returned sorted.
    """
    if n <= 0:
        raise ParameterError("cannot split an empty dataset")
    if not 0.0 <= test_fraction < 1.0:
        raise ParameterError(f"test_fraction must be in [0, 1), got {test_fraction}")
    n_test = min(int(math.floor(n * test_fraction + 0.5)), n - 1)
    order = rng.permutation(n)
    return np.sort(order[: n - n_test]), np.sort(order[n - n_test:])


def iterate_batches(n: int, batch_size: int, rng: Rng) -> Iterator[np.ndarray]:
    """
    Shuffled index batches. The last partial batch is kept; a trailing
    single example joins the previous batch.
    """
    if batch_size <= 0:
        raise ParameterError(f"batch_size must be positive, got {batch_size}")
    order = rng.permutation(n)
    starts = list(range(0, n, batch_size))
    if len(starts) > 1 and n - starts[-1] == 1:
        starts.pop()
    for i, start in enumerate(starts):
        end = starts[i + 1] if i + 1 < len(starts) else n
        yield order[start:end]


def positive_probability(model: LayerStack, output: Tensor) -> Tensor:
    """Positive-class probability column of a model output."""
    column = 1 if model.head == HeadKind.SOFTMAX else 0
    return output[:, column]


def output_gradient(model: LayerStack, output: Tensor, labels: np.ndarray) -> Tuple[float, Tensor]:
    """Mean BCE loss of a batch and its gradient with respect to the model output."""
    column = 1 if model.head == HeadKind.SOFTMAX else 0
    p = output[:, column]
    grad = np.zeros_like(output)
    grad[:, column] = bce_grad(p, labels)
    return bce_loss(p, labels), grad


def predict_probabilities(model: LayerStack, x: Tensor, batch_size: int = 256) -> Tensor:
    """Eval-mode positive probabilities for an N×3×S×S batch."""
    model.set_mode(LayerMode.EVAL)
    x = np.asarray(x, dtype=np.float64)
    chunks = [
        positive_probability(model, model.forward(x[start:start + batch_size]))
        for start in range(0, x.shape[0], batch_size)
    ]
    return np.concatenate(chunks) if chunks else np.zeros(0)


def evaluate(model: LayerStack, dataset: Dataset, threshold: float = 0.5, batch_size: int = 256) -> Metrics:
    """
    Confusion metrics of the model on a dataset.

    Raises:
        ParameterError: empty dataset
    """
    if len(dataset) == 0:
        raise ParameterError("cannot evaluate on an empty dataset")
    probabilities = predict_probabilities(model, dataset.x, batch_size)
    return compute_metrics(probabilities, dataset.y, threshold)


def make_optimizer(cfg: TrainConfig) -> AdamState:
    return AdamState(
        lr=cfg.learning_rate,
        beta1=cfg.adam_beta1,
        beta2=cfg.adam_beta2,
        eps=cfg.adam_epsilon
    )


def train(
    model: LayerStack,
    dataset: Dataset,
    cfg: TrainConfig,
    test_set: Optional[Dataset] = None,
    rng: Optional[Rng] = None,
    optimizer: Optional[AdamState] = None,
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
    run_name: Optional[str] = None
) -> TrainResult:
    """
    Train with mini-batch Adam on binary cross-entropy.

    Args:
        model: Network to train in place
        dataset: Training examples
        cfg: Epochs, batch size, learning rate, threshold and Adam constants
        test_set: Optional held-out set scored after every epoch
        rng: Base stream of the run; defaults to Rng(cfg.seed)
        optimizer: Optimizer state; defaults to a fresh state built from cfg
        on_epoch: Callback receiving each epoch record
        run_name: Logger suffix for experiment rows

    Returns:
        TrainResult with the model left in eval mode and one record per epoch

    Raises:
        ParameterError: empty dataset
        DivergedError: non-finite loss
    """
    if len(dataset) == 0:
        raise ParameterError("cannot train on an empty dataset")
    rng = Rng(cfg.seed) if rng is None else rng
    shuffle_rng = rng.spawn(SHUFFLE_STREAM)
    dropout_rng = rng.spawn(DROPOUT_STREAM)
    optimizer = make_optimizer(cfg) if optimizer is None else optimizer
    has_test = test_set is not None and len(test_set) > 0

    history: List[EpochRecord] = []
    n = len(dataset)
    logger.info(f"training {model.arch.value} on {n} examples for {cfg.epochs} epochs")

    for epoch in range(1, cfg.epochs + 1):
        model.set_mode(LayerMode.TRAIN)
        loss_sum = 0.0
        correct = 0

        for batch, indices in enumerate(iterate_batches(n, cfg.batch_size, shuffle_rng), start=1):
            xb = dataset.x[indices]
            yb = dataset.y[indices]

            output = model.forward(xb, dropout_rng)
            loss, grad = output_gradient(model, output, yb)
            if not math.isfinite(loss) or not np.all(np.isfinite(output)):
                model.set_mode(LayerMode.EVAL)
                raise DivergedError(epoch, batch, loss)

            model.backward(grad)
            adam_step(optimizer, model.named_parameters(), model.named_grads())

            loss_sum += loss * len(indices)
            predictions = positive_probability(model, output) >= cfg.threshold
            correct += int(np.sum(predictions == yb.astype(bool)))

        test_acc = evaluate(model, test_set, cfg.threshold).accuracy if has_test else None
        record = EpochRecord(epoch=epoch, train_loss=loss_sum / n, train_acc=correct / n, test_acc=test_acc)
        history.append(record)
        log_epoch(record, run_name)
        if on_epoch is not None:
            on_epoch(record)

    model.set_mode(LayerMode.EVAL)
    return TrainResult(model=model, history=history, optimizer=optimizer)
