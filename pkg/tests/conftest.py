"""Shared fixtures for the dsrkit test suite."""

from pathlib import Path

import numpy as np
import pytest

from dsrkit.classifier.trainer import init_classifier
from dsrkit.harness.config import ExperimentConfig, load_config
from dsrkit.harness.dataset import DatasetSpec, generate_dataset
from dsrkit.harness.experiments import ExperimentSession, prepare_session
from dsrkit.models import Classifier, LabeledDataset
from dsrkit.numerics.random import RandomSource

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def rng() -> RandomSource:
    """Fresh seeded random source."""
    return RandomSource(1234)


@pytest.fixture
def small_model() -> Classifier:
    """Untrained two-layer network on 8x8 images with 3 classes."""
    return init_classifier((8, 8), 3, (12,), RandomSource(7))


@pytest.fixture
def linear_model() -> Classifier:
    """Untrained single-layer network on 8x8 images with 3 classes."""
    return init_classifier((8, 8), 3, (), RandomSource(11))


@pytest.fixture(scope="session")
def small_data() -> tuple[LabeledDataset, LabeledDataset]:
    """Small synthetic train/test splits (8x8, 3 classes, 72 train examples)."""
    return generate_dataset(
        DatasetSpec(image_size=8, num_classes=3, per_class=30, noise_sigma=0.04), seed=5
    )


@pytest.fixture(scope="session")
def quick_config() -> ExperimentConfig:
    """The quick preset with its default seed."""
    return load_config(preset="quick")


@pytest.fixture(scope="session")
def quick_session(quick_config: ExperimentConfig) -> ExperimentSession:
    """Session with data and a trained model for the quick preset."""
    return prepare_session(quick_config)


@pytest.fixture
def images(rng: RandomSource) -> np.ndarray:
    """Batch of 20 random 8x8 images in [0, 1]."""
    return rng.uniform((20, 8, 8))
