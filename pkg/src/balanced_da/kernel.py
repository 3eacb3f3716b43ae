"""Input representations for the optimiser: raw features or a kernel matrix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .core import LabeledDomain, UnlabeledDomain, validate_pair
from .errors import DimensionMismatch, NonpositiveGamma

PRIMAL = "primal"
KERNELIZED = "kernelized"


@dataclass(frozen=True, eq=False)
class InputMatrix:
    """``data`` is features x samples in primal mode, samples x samples when kernelized."""

    data: np.ndarray
    mode: str

    def __post_init__(self):
        if self.mode not in (PRIMAL, KERNELIZED):
            raise ValueError(f"unknown mode {self.mode!r}")
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise DimensionMismatch(f"input matrix must be 2-d, got shape {data.shape}")
        if self.mode == KERNELIZED:
            if data.shape[0] != data.shape[1]:
                raise DimensionMismatch(f"kernel matrix must be square, got {data.shape}")
            if data.size and np.max(np.abs(data - data.T)) > 1e-10:
                raise ValueError("kernel matrix is not symmetric")
            if np.any(np.diag(data) < 0):
                raise ValueError("kernel matrix has a negative diagonal entry")
        object.__setattr__(self, "data", data)

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def samples(self) -> np.ndarray:
        """Samples as rows (primal mode only)."""
        if self.mode != PRIMAL:
            raise ValueError("samples() needs a primal matrix")
        return self.data.T


def stack_domains(source: LabeledDomain, target: UnlabeledDomain) -> InputMatrix:
    """Features x (n+m) matrix: source samples first, then target, order kept."""
    validate_pair(source, target)
    return InputMatrix(np.vstack([source.features, target.features]).T.copy(), PRIMAL)


def _primal(X) -> np.ndarray:
    if isinstance(X, InputMatrix):
        if X.mode != PRIMAL:
            raise ValueError("kernel functions need a primal input matrix")
        return X.data
    return np.asarray(X, dtype=np.float64)


def linear_kernel(X) -> InputMatrix:
    data = _primal(X)
    K = data.T @ data
    # BLAS may round the two triangles differently
    K = 0.5 * (K + K.T)
    return InputMatrix(K, KERNELIZED)


def rbf_kernel(X, gamma: float) -> InputMatrix:
    """exp(-gamma * ||x_i - x_j||^2) over all sample pairs."""
    if not gamma > 0:
        raise NonpositiveGamma(f"gamma must be positive, got {gamma}")
    samples = np.ascontiguousarray(_primal(X).T)
    d2 = _backend.sq_distances(samples, samples)
    return InputMatrix(np.exp(-gamma * d2), KERNELIZED)


def centering_matrix(total: int) -> np.ndarray:
    """H = I - J / total, with J the all-ones matrix."""
    if total < 1:
        raise ValueError(f"total must be positive, got {total}")
    H = np.full((total, total), -1.0 / total)
    H[np.diag_indices(total)] += 1.0
    return H
