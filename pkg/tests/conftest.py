# -*- coding: utf-8 -*-

"""
GASTL - Source Sample Selection for Self-Taught Learning

Shared fixtures for the test suite
"""

from pathlib import Path

import numpy as np
import pytest

from gastl.dataset import DatasetBundle, make_synthetic_transfer
from gastl.settings.data import SyntheticData
from gastl.settings.experiment import ExperimentConfig
from gastl.settings.lbfgs import LbfgsOptions
from gastl.settings.transfer import TransferHyperParams


@pytest.fixture
def configuration_directory() -> Path:
    """
    Directory holding the sample configuration files
    """
    return Path(__file__).parent / "configuration"


@pytest.fixture
def rng() -> np.random.Generator:
    """
    Seeded random generator
    """
    return np.random.default_rng(20240917)


@pytest.fixture
def small_bundle() -> DatasetBundle:
    """
    Small clustered bundle: 6 features, 12 source samples (8 relevant), 2 target classes
    """
    return make_synthetic_transfer(
        d=6,
        clusters=3,
        n_src_per_cluster=4,
        n_trg_per_class=3,
        relevant_clusters=2,
        noise_sd=0.05,
        seed=7,
    )


@pytest.fixture
def fast_transfer() -> TransferHyperParams:
    """
    Transfer hyperparameters small enough for unit tests
    """
    return TransferHyperParams(
        hidden_size=4,
        lam=1e-2,
        gamma=1e-3,
        knn=3,
        max_outer=3,
        lbfgs=LbfgsOptions(max_iterations=40),
    )


@pytest.fixture
def fast_experiment(fast_transfer: TransferHyperParams) -> ExperimentConfig:
    """
    Experiment on a small synthetic bundle with fast solver settings
    """
    return ExperimentConfig(
        data=SyntheticData(features=6, clusters=3, source_per_cluster=5, target_per_class=3, seed=3),
        transfer=fast_transfer,
        p=6,
        classifier={"lbfgs": {"max_iterations": 100}},
        seed=1,
    )
