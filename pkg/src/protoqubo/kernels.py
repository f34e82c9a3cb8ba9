"""Mercer kernels, pairwise kernel/distance matrices and the kernel-complement distance.

Kernel conventions used throughout:

* RBF:       ``K(x, y) = exp(-||x - y||^2 / h)``
* Laplacian: ``K(x, y) = exp(-||x - y||_1 / h)``

Both are normalized (``K(x, x) = 1``), which is what licenses turning a kernel
matrix into a distance matrix via ``D = 1 - K``.  With ``h = 2`` the RBF
complement distance is exactly Welsch's M-estimator ``1 - exp(-||x - y||^2 / 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import InputError, PreconditionError

SYMMETRY_TOL = 1e-12
DIAGONAL_TOL = 1e-12
NEGATIVE_CLAMP = -1e-12


def _as_matrix(entries, name: str) -> np.ndarray:
    m = np.asarray(entries, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"{name} must be a square 2-D matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise InputError(f"{name} must have at least one row")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} contains non-finite entries")
    return m


def _check_symmetric(m: np.ndarray, name: str) -> None:
    skew = np.abs(m - m.T).max()
    if skew > SYMMETRY_TOL:
        raise InputError(f"{name} is not symmetric (max |M - M^T| = {skew:.3e})")


@dataclass(frozen=True)
class Dataset:
    """An ordered set of n points in d-dimensional real space.

    Point order is stable: index i identifies the same point in every matrix,
    selection and report built downstream.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise InputError(f"points must be a 2-D array of shape (n, d), got ndim={pts.ndim}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InputError(f"dataset needs n >= 1 and d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InputError("dataset contains non-finite coordinates")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class RbfKernel:
    """Normalized RBF kernel exp(-||x - y||^2 / h) with scalar bandwidth h > 0."""

    h: float

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise InputError(f"RBF bandwidth must be positive, got {self.h}")


@dataclass(frozen=True)
class LaplacianKernel:
    """Normalized Laplacian kernel exp(-||x - y||_1 / h) with scalar scale h > 0."""

    h: float

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise InputError(f"Laplacian scale must be positive, got {self.h}")


@dataclass(frozen=True)
class PrecomputedKernel:
    """A user-supplied n-by-n kernel matrix; validated, never re-derived from points."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix, "precomputed kernel")
        _check_symmetric(m, "precomputed kernel")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


KernelSpec = Union[RbfKernel, LaplacianKernel, PrecomputedKernel]


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric n-by-n kernel matrix; `normalized` is derived from the diagonal."""

    entries: np.ndarray
    normalized: bool = field(init=False)

    def __post_init__(self):
        m = _as_matrix(self.entries, "kernel matrix")
        _check_symmetric(m, "kernel matrix")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        normalized = bool(np.abs(np.diag(m) - 1.0).max() <= DIAGONAL_TOL)
        object.__setattr__(self, "normalized", normalized)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative n-by-n dissimilarity matrix with zero diagonal.

    Entries in [-1e-12, 0) are clamped to 0; anything more negative is rejected.
    """

    entries: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.entries, "distance matrix")
        _check_symmetric(m, "distance matrix")
        diag_err = np.abs(np.diag(m)).max()
        if diag_err > DIAGONAL_TOL:
            raise InputError(f"distance matrix diagonal is not zero (max |D_ii| = {diag_err:.3e})")
        low = m.min()
        if low < NEGATIVE_CLAMP:
            raise InputError(f"distance matrix has negative entry {low:.3e}")
        m = m.copy()
        np.fill_diagonal(m, 0.0)
        m[m < 0.0] = 0.0
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def _check_point(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64).reshape(-1)
    if v.size < 1:
        raise InputError(f"{name} must have at least one coordinate")
    if not np.all(np.isfinite(v)):
        raise InputError(f"{name} contains non-finite coordinates")
    return v


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Evaluate a parametric kernel on a single pair of points."""
    if isinstance(spec, PrecomputedKernel):
        raise InputError("a precomputed kernel cannot be evaluated on raw points")
    xv = _check_point(x, "x")
    yv = _check_point(y, "y")
    if xv.shape != yv.shape:
        raise InputError(f"dimension mismatch: x has d={xv.size}, y has d={yv.size}")
    if isinstance(spec, RbfKernel):
        return float(np.exp(-np.sum((xv - yv) ** 2) / spec.h))
    if isinstance(spec, LaplacianKernel):
        return float(np.exp(-np.sum(np.abs(xv - yv)) / spec.h))
    raise InputError(f"unknown kernel spec {spec!r}")


def kernel_matrix(spec: KernelSpec, data: Dataset) -> KernelMatrix:
    """Build the n-by-n kernel matrix of a dataset.

    For parametric kernels the pairwise terms are computed once for the upper
    triangle and mirrored, so the result is exactly symmetric.  A precomputed
    matrix is passed through after validation against the dataset size.
    """
    if isinstance(spec, PrecomputedKernel):
        if spec.matrix.shape[0] != data.n:
            raise InputError(
                f"precomputed kernel is {spec.matrix.shape[0]}x{spec.matrix.shape[0]} "
                f"but the dataset has n={data.n}"
            )
        return KernelMatrix(spec.matrix)
    if isinstance(spec, RbfKernel):
        if data.n == 1:
            return KernelMatrix(np.ones((1, 1)))
        sq = squareform(pdist(data.points, metric="sqeuclidean"))
        return KernelMatrix(np.exp(-sq / spec.h))
    if isinstance(spec, LaplacianKernel):
        if data.n == 1:
            return KernelMatrix(np.ones((1, 1)))
        l1 = squareform(pdist(data.points, metric="cityblock"))
        return KernelMatrix(np.exp(-l1 / spec.h))
    raise InputError(f"unknown kernel spec {spec!r}")


def kernel_to_distance(K: KernelMatrix) -> DistanceMatrix:
    """Turn a normalized kernel matrix into the complement distance ``D = 1 - K``.

    For unit-diagonal kernels this equals half the squared feature-space
    distance, so it is symmetric, nonnegative and zero on the diagonal.
    """
    if not K.normalized:
        bad = int(np.argmax(np.abs(np.diag(K.entries) - 1.0)))
        raise PreconditionError(
            f"kernel is not normalized: diagonal entry {bad} is {K.entries[bad, bad]!r}"
        )
    return DistanceMatrix(1.0 - K.entries)


def euclidean_distance_matrix(data: Dataset) -> DistanceMatrix:
    """Plain pairwise Euclidean distances of a dataset."""
    if data.n == 1:
        return DistanceMatrix(np.zeros((1, 1)))
    return DistanceMatrix(squareform(pdist(data.points, metric="euclidean")))
