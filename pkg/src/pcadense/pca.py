"""Truncated PCA model of a depth-map corpus.

The sample covariance C = D D^T / (n-1) is never materialized: its nonzero
spectrum is obtained from the n x n Gram matrix G = D^T D, which shares
eigenvalues with D D^T, and each eigenvector of C is recovered as
u = D v / sqrt(gamma).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTrainingSetError, ValidationError
from .types import DepthMap, TrainingSet

DEFAULT_MAX_COMPONENTS = 500
DEFAULT_MIN_VARIANCE_FRACTION = 0.90
DEFAULT_EIGENVALUE_FLOOR = 1e-12


@dataclass(frozen=True)
class PcaBasis:
    """Learned model: mean image, orthonormal basis columns, eigenvalues.

    basis has shape (s, l) with orthonormal columns; eigenvalues are the
    corpus variances along each column, strictly positive and descending.
    total_variance is the sum over the full (untruncated) nonzero spectrum.
    """

    width: int
    height: int
    mean: np.ndarray          # (s,)
    basis: np.ndarray         # (s, l)
    eigenvalues: np.ndarray   # (l,)
    total_variance: float

    def __post_init__(self):
        mean = np.ascontiguousarray(self.mean, dtype=np.float64)
        basis = np.ascontiguousarray(self.basis, dtype=np.float64)
        lam = np.ascontiguousarray(self.eigenvalues, dtype=np.float64)
        s = self.width * self.height
        if mean.shape != (s,):
            raise ValidationError(f"mean must have length {s}, got {mean.shape}")
        if basis.ndim != 2 or basis.shape[0] != s:
            raise ValidationError(f"basis must be ({s}, l), got {basis.shape}")
        l = basis.shape[1]
        if lam.shape != (l,):
            raise ValidationError("eigenvalue count must match basis columns")
        if l < 1:
            raise ValidationError("basis must keep at least one component")
        if np.any(lam <= 0) or np.any(np.diff(lam) > 0):
            raise ValidationError("eigenvalues must be positive and non-increasing")
        gram = basis.T @ basis
        if np.max(np.abs(gram - np.eye(l))) > 1e-9:
            raise ValidationError("basis columns are not orthonormal")
        if self.total_variance <= 0:
            raise ValidationError("total_variance must be positive")
        if lam.sum() > self.total_variance * (1 + 1e-9):
            raise ValidationError("retained variance exceeds total variance")
        for name, arr in (("mean", mean), ("basis", basis), ("eigenvalues", lam)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_components(self) -> int:
        return self.basis.shape[1]

    @property
    def size(self) -> int:
        return self.width * self.height

    def mean_map(self) -> DepthMap:
        return DepthMap.from_vector(self.mean, self.width, self.height)


def compute_mean(training: TrainingSet) -> DepthMap:
    """Pixelwise arithmetic mean of the corpus."""
    mean = training.as_matrix().mean(axis=1)
    return DepthMap.from_vector(mean, training.width, training.height)


def _canonicalize_signs(basis: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude component is positive.

    np.argmax returns the first maximum, so ties resolve to the lowest
    pixel index.
    """
    idx = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[idx, np.arange(basis.shape[1])])
    signs[signs == 0] = 1.0
    return basis * signs


def learn_basis(
    training: TrainingSet,
    max_components: int = DEFAULT_MAX_COMPONENTS,
    min_variance_fraction: float = DEFAULT_MIN_VARIANCE_FRACTION,
    eigenvalue_floor: float = DEFAULT_EIGENVALUE_FLOOR,
) -> PcaBasis:
    """Learn the truncated basis via the n x n Gram-matrix decomposition.

    Keeps the smallest l whose cumulative variance fraction reaches
    min_variance_fraction, capped at max_components.  Eigenvalues below
    eigenvalue_floor relative to the largest are treated as zero (this
    absorbs the structural zero introduced by mean subtraction).
    """
    if max_components < 1:
        raise ValidationError("max_components must be >= 1")
    if not (0 < min_variance_fraction <= 1):
        raise ValidationError("min_variance_fraction must be in (0, 1]")
    n = training.n
    data = training.as_matrix()
    mean = data.mean(axis=1)
    centered = data - mean[:, None]

    gram = centered.T @ centered
    gamma, vecs = np.linalg.eigh(gram)
    order = np.argsort(gamma, kind="stable")[::-1]
    gamma = gamma[order]
    vecs = vecs[:, order]

    if gamma[0] <= 0:
        raise DegenerateTrainingSetError(
            "degenerate training set: zero variance across the corpus"
        )
    keep = gamma > eigenvalue_floor * gamma[0]
    gamma = gamma[keep]
    vecs = vecs[:, keep]
    if gamma.size == 0:
        raise DegenerateTrainingSetError(
            "degenerate training set: no eigenvalues above the floor"
        )

    eigenvalues = gamma / (n - 1)
    total_variance = float(eigenvalues.sum())

    frac = np.cumsum(eigenvalues) / total_variance
    l = int(np.searchsorted(frac, min_variance_fraction - 1e-15) + 1)
    l = min(l, max_components, eigenvalues.size)

    basis = centered @ (vecs[:, :l] / np.sqrt(gamma[:l]))
    basis = _canonicalize_signs(basis)

    return PcaBasis(
        width=training.width,
        height=training.height,
        mean=mean,
        basis=basis,
        eigenvalues=eigenvalues[:l],
        total_variance=total_variance,
    )


def cumulative_variance_fraction(
    eigenvalues: np.ndarray, total_variance: float, k: int
) -> float:
    """Fraction of corpus variance captured by the k largest components."""
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    if not (1 <= k <= eigenvalues.size):
        raise ValidationError(f"k must be in [1, {eigenvalues.size}], got {k}")
    if total_variance <= 0:
        raise ValidationError("total_variance must be positive")
    return float(eigenvalues[:k].sum() / total_variance)


def truncate_basis(basis: PcaBasis, l_new: int) -> PcaBasis:
    """Keep the first l_new components; total_variance is unchanged."""
    if not (1 <= l_new <= basis.n_components):
        raise ValidationError(
            f"l_new must be in [1, {basis.n_components}], got {l_new}"
        )
    if l_new == basis.n_components:
        return basis
    return PcaBasis(
        width=basis.width,
        height=basis.height,
        mean=basis.mean,
        basis=basis.basis[:, :l_new],
        eigenvalues=basis.eigenvalues[:l_new],
        total_variance=basis.total_variance,
    )


def project_coeffs(basis: PcaBasis, dense: DepthMap) -> np.ndarray:
    """Coefficients y = B^T (d - m) of a fully valid map."""
    if (dense.width, dense.height) != (basis.width, basis.height):
        raise ValidationError("map dimensions do not match basis")
    if not dense.fully_valid():
        raise ValidationError("map contains invalid pixels")
    return basis.basis.T @ (dense.vector - basis.mean)


def reconstruct_coeffs(basis: PcaBasis, coeffs: np.ndarray) -> DepthMap:
    """Dense map d = B y + m from coefficients."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (basis.n_components,):
        raise ValidationError(
            f"coefficients must have length {basis.n_components}, got {coeffs.shape}"
        )
    vec = basis.basis @ coeffs + basis.mean
    return DepthMap.from_vector(vec, basis.width, basis.height)
