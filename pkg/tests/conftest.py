import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to Python path
project_root = Path(__file__).parent.parent
sys.path.append(str(project_root))

from ml_msda.config import Config, ENV_PREFIX, RunConfig
from ml_msda.data import generate_ring_domains
from ml_msda.utils.validators import ArchConfig, DatasetConfig


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Keep MLMSDA_* variables of the calling shell out of every test."""
    import os
    for key in list(os.environ):
        if key.startswith(ENV_PREFIX):
            monkeypatch.delenv(key)


@pytest.fixture
def tiny_arch():
    return ArchConfig(
        input_dim=2,
        trunk_layers=(4,),
        private_layers=(),
        feature_dim=3,
        num_classes=3,
        num_sources=2,
        discriminator_layers=(4,),
    )


@pytest.fixture
def tiny_dataset():
    cfg = DatasetConfig(
        source_rotations=(0.0, 40.0),
        target_rotation=80.0,
        train_size=24,
        test_size=30,
    )
    return generate_ring_domains(cfg.domain_specs(), tag="tiny")


@pytest.fixture
def smoke_config() -> RunConfig:
    return Config("smoke").run_config


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
