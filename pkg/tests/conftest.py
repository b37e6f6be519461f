from pathlib import Path

import numpy as np
import pytest

from rodservo import WorldConfig, fit_feature_model, generate_dataset, save_model

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def world():
    return WorldConfig()


@pytest.fixture(scope="session")
def model(world):
    # 600 samples is plenty: the noise-free curve family has rank 5 and the
    # fit saturates after a few dozen samples.
    return fit_feature_model(generate_dataset(world, 600, seed=3), 5)


@pytest.fixture(scope="session")
def small_world():
    return WorldConfig(n_points=40)


@pytest.fixture(scope="session")
def small_model(small_world):
    return fit_feature_model(generate_dataset(small_world, 300, seed=11), 5)


@pytest.fixture(scope="session")
def small_model_path(small_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "small_model.txt"
    save_model(small_model, path)
    return path


@pytest.fixture(scope="session")
def scenario_dir():
    return REPO_ROOT / "scenarios"


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
