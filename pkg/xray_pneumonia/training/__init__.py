"""
Loss, optimizer, training loop, metrics and gradient checking.
"""

from .loss import bce_loss, bce_grad, PROBABILITY_EPSILON
from .optim import AdamState, adam_step
from .metrics import compute_metrics, confusion_counts
from .architectures import build_model, build_cnn, build_resnet, feature_sizes
from .trainer import (
    Dataset,
    TrainResult,
    split_dataset,
    iterate_batches,
    positive_probability,
    output_gradient,
    predict_probabilities,
    evaluate,
    make_optimizer,
    train,
    INIT_STREAM,
    SHUFFLE_STREAM,
    DROPOUT_STREAM,
    SPLIT_STREAM
)
from .gradcheck import GradCheckEntry, GradCheckReport, grad_check, relative_error

__all__ = [
    "bce_loss",
    "bce_grad",
    "PROBABILITY_EPSILON",
    "AdamState",
    "adam_step",
    "compute_metrics",
    "confusion_counts",
    "build_model",
    "build_cnn",
    "build_resnet",
    "feature_sizes",
    "Dataset",
    "TrainResult",
    "split_dataset",
    "iterate_batches",
    "positive_probability",
    "output_gradient",
    "predict_probabilities",
    "evaluate",
    "make_optimizer",
    "train",
    "INIT_STREAM",
    "SHUFFLE_STREAM",
    "DROPOUT_STREAM",
    "SPLIT_STREAM",
    "GradCheckEntry",
    "GradCheckReport",
    "grad_check",
    "relative_error"
]
