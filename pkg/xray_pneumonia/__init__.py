"""
Pneumonia X-ray Classification Toolkit

A numpy-based toolkit for classifying chest X-rays as pneumonia / no
pneumonia with small convolutional and residual networks, including image
enhancement preprocessing, a synthetic corpus generator and an ablation
experiment harness.
"""

__version__ = "0.1.0"
__author__ = "Pneumonia X-ray Toolkit Team"

# Import core components
from .tensor_core import Rng
from .models.core import TrainConfig, PreprocessConfig, SyntheticSpec
from .models.metrics import Metrics, EpochRecord, ExperimentRow
from .layers import LayerStack
from .training import build_model, train, evaluate, grad_check
from .checkpoint import save_checkpoint, load_checkpoint
from .experiment import run_experiment

__all__ = [
    "Rng",
    "TrainConfig",
    "PreprocessConfig",
    "SyntheticSpec",
    "Metrics",
    "EpochRecord",
    "ExperimentRow",
    "LayerStack",
    "build_model",
    "train",
    "evaluate",
    "grad_check",
    "save_checkpoint",
    "load_checkpoint",
    "run_experiment"
]
