"""Confusion-matrix metrics from probabilities."""

import numpy as np

from ..errors import ParameterError, ShapeError
from ..models.metrics import Metrics


def confusion_counts(predictions, labels):
    """(tp, fp, tn, fn) for 0/1 predictions against 0/1 labels."""
    predictions = np.asarray(predictions).astype(bool)
    labels = np.asarray(labels).astype(bool)
    if predictions.shape != labels.shape:
        raise ShapeError.mismatch("predictions and labels differ in shape", predictions.shape, labels.shape)
    tp = int(np.sum(predictions & labels))
    fp = int(np.sum(predictions & ~labels))
    tn = int(np.sum(~predictions & ~labels))
    fn = int(np.sum(~predictions & labels))
    return tp, fp, tn, fn


def compute_metrics(probabilities, labels, threshold: float = 0.5) -> Metrics:
    """
    Predict 1 iff p ≥ threshold and derive the confusion metrics.

    Raises:
        ParameterError: no predictions
    """
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if probabilities.size == 0:
        raise ParameterError("cannot compute metrics on an empty dataset")
    return Metrics.from_counts(*confusion_counts(probabilities >= threshold, labels))
