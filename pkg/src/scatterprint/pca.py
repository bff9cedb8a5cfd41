"""Principal component analysis on pooled feature vectors.

The decomposition is of the unnormalized scatter matrix ``C = sum_i z_i z_i^T``
of the centered training features (no 1/M factor: eigenvectors are identical
either way, eigenvalues carry a factor of M).  Internally a thin SVD of the
centered data matrix is used, which avoids forming the d x d matrix; the
invariant tests compare against an explicit dense eigendecomposition.

Eigenvector signs are canonicalized so each vector's largest-magnitude entry
is positive, making fitted models byte-comparable.  Projection is the raw dot
product against the leading basis vectors (no whitening).

Model files are binary, magic ``PCA1``: little-endian int32 (d, r, K) followed
by float64 mean[d], eigenvalues[r], and the r basis rows of length d.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._binio import atomic_write, expect_magic, read_f64, read_i32, write_f64, write_i32
from .errors import ValidationError

__all__ = [
    "PcaModel",
    "fit_pca",
    "project",
    "retained_variance",
    "choose_k",
    "truncate",
    "save_pca",
    "load_pca",
]

PCA_MAGIC = b"PCA1"


@dataclass(frozen=True)
class PcaModel:
    """Mean, non-increasing eigenvalues, orthonormal basis rows, and the
    retained component count ``n_components``."""

    mean: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray
    n_components: int

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def rank(self) -> int:
        return self.eigenvalues.shape[0]


def _as_matrix(features) -> np.ndarray:
    if isinstance(features, np.ndarray):
        mat = np.asarray(features, dtype=np.float64)
    else:
        rows = [np.asarray(getattr(f, "values", f), dtype=np.float64) for f in features]
        if not rows:
            raise ValidationError("need at least 2 feature vectors")
        lengths = {r.shape for r in rows}
        if len(lengths) != 1 or rows[0].ndim != 1:
            raise ValidationError("feature vectors must be 1-D and of equal length")
        mat = np.vstack(rows)
    if mat.ndim != 2:
        raise ValidationError("expected a 2-D feature matrix")
    return mat


def _canonical_signs(basis: np.ndarray) -> np.ndarray:
    flips = np.ones(basis.shape[0])
    for i, row in enumerate(basis):
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            flips[i] = -1.0
    return basis * flips[:, None]


def fit_pca(features, n_components: int) -> PcaModel:
    """Fit the scatter-matrix eigendecomposition on training features and
    retain the leading ``n_components`` directions.

    Requires at least 2 vectors and ``1 <= n_components <= min(M-1, d)``.
    """
    mat = _as_matrix(features)
    m, d = mat.shape
    if m < 2:
        raise ValidationError("need at least 2 feature vectors")
    rank_cap = min(m - 1, d)
    if not 1 <= n_components <= rank_cap:
        raise ValidationError(
            f"component count {n_components} out of range; "
            f"the maximum achievable for this set is {rank_cap}"
        )
    mean = mat.mean(axis=0)
    centered = mat - mean
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    eigenvalues = (singular ** 2)[:rank_cap]
    basis = _canonical_signs(vt[:rank_cap])
    return PcaModel(mean, eigenvalues, basis, n_components)


def project(model: PcaModel, vector) -> np.ndarray:
    """Coordinates of centered input(s) on the leading components.

    Accepts a single length-d vector or a (n, d) batch; returns length-K or
    (n, K) accordingly.
    """
    arr = np.asarray(getattr(vector, "values", vector), dtype=np.float64)
    if arr.shape[-1] != model.dim:
        raise ValidationError(
            f"vector length {arr.shape[-1]} does not match model dimension {model.dim}"
        )
    return (arr - model.mean) @ model.basis[: model.n_components].T


def retained_variance(model: PcaModel, k: int) -> float:
    """Fraction of total eigenvalue mass carried by the leading k components.

    A zero-variance training set (all eigenvalues 0) retains everything at
    any k, so the ratio is 1."""
    if not 1 <= k <= model.rank:
        raise ValidationError(f"k must lie in [1, {model.rank}], got {k}")
    cumulative = np.cumsum(model.eigenvalues)
    if cumulative[-1] <= 0.0:
        return 1.0
    return float(cumulative[k - 1] / cumulative[-1])


def choose_k(model: PcaModel, epsilon: float) -> int:
    """Smallest k whose retained-variance ratio is at least ``epsilon``."""
    if not 0.0 < epsilon <= 1.0:
        raise ValidationError(f"epsilon must lie in (0, 1], got {epsilon}")
    cumulative = np.cumsum(model.eigenvalues)
    if cumulative[-1] <= 0.0:
        return 1
    ratios = cumulative / cumulative[-1]
    return int(np.argmax(ratios >= epsilon)) + 1


def truncate(model: PcaModel, k: int) -> PcaModel:
    """The same fitted model retaining only the leading k components."""
    if not 1 <= k <= model.rank:
        raise ValidationError(f"k must lie in [1, {model.rank}], got {k}")
    return replace(model, n_components=k)


def save_pca(path, model: PcaModel) -> None:
    def writer(fh):
        fh.write(PCA_MAGIC)
        write_i32(fh, model.dim, model.rank, model.n_components)
        write_f64(fh, model.mean)
        write_f64(fh, model.eigenvalues)
        write_f64(fh, model.basis)

    atomic_write(path, writer)


def load_pca(path) -> PcaModel:
    with open(path, "rb") as fh:
        expect_magic(fh, PCA_MAGIC, path)
        d, r, k = read_i32(fh, 3)
        mean = read_f64(fh, d)
        eigenvalues = read_f64(fh, r)
        basis = read_f64(fh, r * d).reshape(r, d)
    return PcaModel(mean, eigenvalues, basis, k)
