"""Generalized symmetric eigensolver for the regularised trace minimisation.

Minimising tr(A^T S A) subject to A^T B A = I leads to the pencil
S a = theta B a, of which we want the ``d`` smallest finite theta. B is
singular (the centering matrix annihilates constants), so the raw pencil
has infinite eigenvalues. Factoring S = L L^T turns the problem into the
ordinary symmetric one

    C y = eta y,    C = L^-1 B L^-T,    theta = 1 / eta,    a = L^-T y,

where the wanted directions are the ``d`` largest eta.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, NotPositiveDefinite, RankDeficientB

# eta at or below this fraction of the largest eta is treated as null space of B
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Projection:
    basis: np.ndarray        # representation dim x d
    eigenvalues: np.ndarray  # ascending theta

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def transform(self, R: np.ndarray) -> np.ndarray:
        """Project a representation matrix with one sample per column."""
        return self.basis.T @ R


def _cholesky(S, ridge):
    try:
        return linalg.cholesky(S, lower=True), 0.0
    except linalg.LinAlgError:
        pass
    if ridge is None:
        ridge = 1e-9 * np.trace(S) / S.shape[0]
    if not ridge > 0:
        raise NotPositiveDefinite("objective matrix is not positive definite")
    try:
        return linalg.cholesky(S + ridge * np.eye(S.shape[0]), lower=True), ridge
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite(
            f"objective matrix is not positive definite even after adding {ridge:g} * I") from exc


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # first coordinate that is clearly nonzero gets a positive sign
    V = V.copy()
    for k in range(V.shape[1]):
        col = V[:, k]
        scale = np.max(np.abs(col))
        if scale == 0:
            continue
        first = np.flatnonzero(np.abs(col) > 1e-8 * scale)[0]
        if col[first] < 0:
            V[:, k] = -col
    return V


def solve_projection(S, B, d: int, ridge: float | None = None) -> Projection:
    """Return the ``d`` constraint-orthonormal directions with smallest theta.

    ``S`` must already include the regularisation term; ``ridge`` is only
    used if its Cholesky factorisation fails (one retry).
    """
    S = np.asarray(S, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape != B.shape:
        raise DimensionMismatch(f"S {S.shape} and B {B.shape} must be equal square matrices")
    p = S.shape[0]
    if not 1 <= d <= p:
        raise DimensionMismatch(f"d={d} must lie in 1..{p}")
    S = 0.5 * (S + S.T)
    B = 0.5 * (B + B.T)

    L, _ = _cholesky(S, ridge)
    # C = L^-1 B L^-T
    W = linalg.solve_triangular(L, B, lower=True)
    C = linalg.solve_triangular(L, W.T, lower=True)
    C = 0.5 * (C + C.T)

    eta, Y = linalg.eigh(C, subset_by_index=[p - d, p - 1])
    # eta[0] is the d-th largest; compare against the largest
    if not (eta[-1] > 0 and eta[0] > RANK_TOL * eta[-1]):
        eta_all = linalg.eigvalsh(C)
        usable = int(np.sum(eta_all > RANK_TOL * max(eta_all[-1], 0.0))) if eta_all[-1] > 0 else 0
        raise RankDeficientB(
            f"constraint matrix supports only {usable} directions, {d} requested")
    # descending eta == ascending theta
    eta, Y = eta[::-1], Y[:, ::-1]
    A = linalg.solve_triangular(L, Y, lower=True, trans="T")
    A = A / np.sqrt(eta)
    return Projection(_fix_signs(A), 1.0 / eta)
