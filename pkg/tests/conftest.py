import numpy as np
import pytest

from degrade_forge import weights_io


@pytest.fixture(scope="session")
def fixture_bundle():
    return weights_io.make_fixture_bundle(seed=0)


@pytest.fixture(scope="session")
def fixture_weights_path(fixture_bundle, tmp_path_factory):
    path = tmp_path_factory.mktemp("weights") / "fixture.dasrw"
    weights_io.save_bundle(path, fixture_bundle)
    return path


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


def random_image(shape, seed=0):
    return np.random.default_rng(seed).random(shape)


@pytest.fixture()
def small_image():
    return random_image((16, 16, 3), seed=3)
