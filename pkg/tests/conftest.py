"""
Shared fixtures for the test suite.
"""

import logging

import numpy as np
import pytest

from xray_pneumonia.config import reset_settings
from xray_pneumonia.datagen import generate
from xray_pneumonia.models.core import SyntheticSpec, TrainConfig
from xray_pneumonia.preprocess import Image
from xray_pneumonia.tensor_core import Rng


@pytest.fixture(autouse=True)
def clean_runtime_state(monkeypatch):
    """Isolate tests from local settings files and leftover log handlers."""
    monkeypatch.setenv("XRAY_CONFIG", "/nonexistent/settings.json")
    for name in ("XRAY_LOG_LEVEL", "XRAY_LOG_FILE", "XRAY_EXPERIMENT_WORKERS", "XRAY_EVAL_BATCH_SIZE"):
        monkeypatch.delenv(name, raising=False)
    reset_settings()
    yield
    logging.getLogger().handlers.clear()
    reset_settings()


@pytest.fixture
def rng():
    return Rng(1234)


@pytest.fixture
def golden_image():
    """2×2 image with values chosen to hit the clamp cases."""
    pixels = np.array(
        [
            [[100, 150, 200], [0, 10, 255]],
            [[170, 60, 30], [128, 128, 128]],
        ],
        dtype=np.uint8
    )
    return Image(pixels)


@pytest.fixture
def tiny_config():
    """Small cnn that trains in well under a second per epoch."""
    return TrainConfig(
        epochs=2,
        batch_size=8,
        image_size=16,
        conv_filters=(4, 8, 8),
        hidden_units=16,
        dropout_rate=0.2,
        learning_rate=0.01,
        test_fraction=0.25,
        seed=3
    )


@pytest.fixture
def tiny_corpus(tmp_path):
    """12 synthetic 16×16 images with their manifest."""
    out = tmp_path / "corpus"
    generate(SyntheticSpec(n_images=12, image_size=16, positive_fraction=0.5, seed=5), out)
    return out / "manifest.csv"


@pytest.fixture(scope="session")
def learning_corpus(tmp_path_factory):
    """500 images at 32×32 from seed 7: 400 train / 100 test at test_fraction 0.2."""
    out = tmp_path_factory.mktemp("learning")
    generate(SyntheticSpec(n_images=500, image_size=32, positive_fraction=0.5, seed=7), out)
    return out / "manifest.csv"
