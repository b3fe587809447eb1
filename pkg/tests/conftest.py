import numpy as np
import pytest

from pcadense import DepthMap, PcaBasis, SparseMeasurement, TrainingSet


def random_training_set(rng, n, height, width):
    maps = tuple(
        DepthMap(rng.uniform(0.0, 30.0, size=(height, width))) for _ in range(n)
    )
    return TrainingSet(maps)


def random_basis(rng, height, width, l):
    """Orthonormal basis from a QR factorization, with descending eigenvalues."""
    s = height * width
    q, _ = np.linalg.qr(rng.standard_normal((s, max(l, 1))))
    lam = np.sort(rng.uniform(0.5, 5.0, size=l))[::-1]
    return PcaBasis(
        width=width,
        height=height,
        mean=rng.uniform(1.0, 20.0, size=s),
        basis=q[:, :l],
        eigenvalues=lam,
        total_variance=float(lam.sum() * 1.2),
    )


def random_sparse(rng, basis_or_shape, m):
    if isinstance(basis_or_shape, tuple):
        height, width = basis_or_shape
    else:
        height, width = basis_or_shape.height, basis_or_shape.width
    flat = rng.choice(height * width, size=m, replace=False)
    return SparseMeasurement(
        width=width,
        height=height,
        rows=flat // width,
        cols=flat % width,
        disparities=rng.uniform(0.0, 30.0, size=m),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
