import numpy as np
import pytest

from clothswap import ToyDatasetSpec, synthesize_toy_dataset

# Small-but-real dataset shared by tests that just need valid inputs.
# 16x16 keeps conv stacks cheap; divisible by 8 so depth-3 generators fit.
TINY_RES = (16, 16)


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny_ds")
    spec = ToyDatasetSpec(count=8, resolution=TINY_RES, seed=11)
    manifest, masks = synthesize_toy_dataset(spec, root)
    return manifest, masks


@pytest.fixture(scope="session")
def tiny_manifest(tiny_dataset):
    return tiny_dataset[0]


@pytest.fixture(scope="session")
def tiny_masks(tiny_dataset):
    return [m.data[0].copy() for m in tiny_dataset[1]]


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
