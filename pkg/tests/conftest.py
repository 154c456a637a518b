import numpy as np
import pytest

from hosfem.mesh import REFERENCE_CUBE, make_element


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_trilinear_element(rng, jitter=0.2):
    """Random non-degenerate hex: jittered unit reference cube.

    Jitter 0.2 keeps the Jacobian determinant safely positive everywhere.
    """
    return make_element(REFERENCE_CUBE + rng.uniform(-jitter, jitter, (8, 3)))


def random_parallelepiped(rng):
    """Random affine image of the reference cube with positive orientation."""
    while True:
        a = np.eye(3) + rng.uniform(-0.3, 0.3, (3, 3))
        if np.linalg.det(a) > 0.1:
            break
    return make_element(REFERENCE_CUBE @ a.T + rng.uniform(-1.0, 1.0, 3))
