import numpy as np
import pytest

import latentsat
from latentsat.helpers import make_rng
from latentsat.fixtures import gen_weights, reference_arch, write_reference_model
from latentsat.model_io import BoundModel, bind


@pytest.fixture(scope='session')
def model() -> BoundModel:
    return bind(gen_weights(42), reference_arch())


@pytest.fixture(scope='session')
def model_files(tmp_path_factory):
    """`(weights_path, arch_path)` of the reference encoder."""
    return write_reference_model(tmp_path_factory.mktemp('model'), seed=42)


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(1234)


@pytest.fixture
def engine():
    return latentsat.init()
