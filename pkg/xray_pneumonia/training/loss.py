"""Binary cross-entropy."""

import numpy as np

from ..errors import ShapeError
from ..tensor_core import Tensor

PROBABILITY_EPSILON = 1e-12


def _prepare(p, y):
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if p.shape != y.shape:
        raise ShapeError.mismatch("probabilities and labels differ in shape", p.shape, y.shape)
    return np.clip(p, PROBABILITY_EPSILON, 1.0 - PROBABILITY_EPSILON), y


def bce_loss(p, y) -> float:
    """
    Mean of −[y·ln p + (1−y)·ln(1−p)] with p clipped to [1e-12, 1 − 1e-12].

    Args:
        p: Probability or vector of probabilities
        y: Matching 0/1 labels

    Returns:
        Non-negative batch mean
    """
    p, y = _prepare(p, y)
    losses = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    return float(losses.mean())


def bce_grad(p, y) -> Tensor:
    """d bce_loss / d p for each element of the batch (includes the 1/N of the mean)."""
    p, y = _prepare(p, y)
    return (-(y / p) + (1.0 - y) / (1.0 - p)) / p.size
