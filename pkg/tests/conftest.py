import numpy as np
import pytest

from crdmd.field import Field
from crdmd.synthetic import SyntheticSpec, default_mode_bank, generate_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_synthetic():
    """16x16x32 field with 3 conjugate pairs and its ground truth."""
    spec = SyntheticSpec(16, 16, 32, default_mode_bank(3, 0))
    return generate_synthetic(spec)


@pytest.fixture
def random_field(rng):
    def make(n1, n2, m, scale=1.0):
        return Field(n1, n2, m, scale * rng.standard_normal(n1 * n2 * m))

    return make
