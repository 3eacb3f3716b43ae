"""MMD coefficient matrices and the balanced distance they encode.

Every matrix is indexed over the stacked samples, source rows first. The
marginal, per-class and prior-weighted matrices are all rank-one outer
products ``w w^T``; the combined matrix mixes them with the balance factor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .errors import DimensionMismatch

MARGINAL = "marginal"
CONDITIONAL = "conditional"
WEIGHTED = "weighted"
COMBINED = "combined"

# entries below this Frobenius norm are left unscaled by combine()
_NORM_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class MmdMatrix:
    matrix: np.ndarray
    kind: str
    cls: int | None = None
    mu: float | None = None

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True, eq=False)
class ClassPriors:
    source_prior: np.ndarray
    target_prior: np.ndarray


def _as_labels(v) -> np.ndarray:
    return np.asarray(v, dtype=np.int64).reshape(-1)


def _domain_index(n: int, m: int) -> np.ndarray:
    return np.concatenate([np.zeros(n, dtype=np.int8), np.ones(m, dtype=np.int8)])


def marginal_coefficients(n: int, m: int) -> np.ndarray:
    """2x2 table of M0 entries indexed by (domain_i, domain_j), 0 = source."""
    cross = -1.0 / (n * m)
    return np.array([[1.0 / (n * n), cross], [cross, 1.0 / (m * m)]])


def class_coefficients(n_c: int, m_c: int, p_s: float = 1.0, p_t: float = 1.0) -> np.ndarray:
    """2x2 table of a class block. Unit priors give the plain conditional matrix.

    Degenerate classes (absent from either side) give all zeros. The cross
    term takes the square root of the prior product first so a zero prior
    yields exactly zero.
    """
    if n_c == 0 or m_c == 0:
        return np.zeros((2, 2))
    cross = -np.sqrt(p_s * p_t) / (m_c * n_c)
    return np.array([[p_s / (n_c * n_c), cross], [cross, p_t / (m_c * m_c)]])


def _embed(table: np.ndarray, domain: np.ndarray, member: np.ndarray | None = None) -> np.ndarray:
    M = table[domain[:, None].astype(np.intp), domain[None, :].astype(np.intp)]
    if member is not None:
        M = np.where(member[:, None] & member[None, :], M, 0.0)
    return M


def build_m0(n: int, m: int) -> MmdMatrix:
    if n < 1 or m < 1:
        raise ValueError(f"n and m must be positive, got n={n}, m={m}")
    return MmdMatrix(_embed(marginal_coefficients(n, m), _domain_index(n, m)), MARGINAL)


def _class_block(source_labels, target_pseudo, c, p_s=1.0, p_t=1.0):
    ys, yt = _as_labels(source_labels), _as_labels(target_pseudo)
    in_s, in_t = ys == c, yt == c
    n_c, m_c = int(in_s.sum()), int(in_t.sum())
    domain = _domain_index(ys.size, yt.size)
    member = np.concatenate([in_s, in_t])
    return _embed(class_coefficients(n_c, m_c, p_s, p_t), domain, member)


def build_mc(source_labels, target_pseudo, c: int) -> MmdMatrix:
    """Class-conditional matrix for class ``c``; zero when c is missing on either side."""
    return MmdMatrix(_class_block(source_labels, target_pseudo, c), CONDITIONAL, cls=c)


def estimate_priors(source_labels, target_pseudo, n_classes: int) -> ClassPriors:
    ys, yt = _as_labels(source_labels), _as_labels(target_pseudo)
    if ys.size == 0 or yt.size == 0:
        raise ValueError("label vectors must be non-empty")
    ps = np.bincount(ys, minlength=n_classes + 1)[1:n_classes + 1] / ys.size
    pt = np.bincount(yt, minlength=n_classes + 1)[1:n_classes + 1] / yt.size
    return ClassPriors(ps, pt)


def build_wc(source_labels, target_pseudo, priors: ClassPriors, c: int) -> MmdMatrix:
    """Prior-weighted class matrix: source block scaled by P_s(c), target by P_t(c)."""
    p_s = float(priors.source_prior[c - 1])
    p_t = float(priors.target_prior[c - 1])
    return MmdMatrix(_class_block(source_labels, target_pseudo, c, p_s, p_t), WEIGHTED, cls=c)


def frobenius_normalize(M: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(M)
    return M / norm if norm > _NORM_FLOOR else M


def combine(mu: float, m0: MmdMatrix, class_matrices: Sequence[MmdMatrix],
            normalize: bool = True) -> MmdMatrix:
    """(1 - mu) * M0 + mu * sum of class matrices, Frobenius-normalised by default."""
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    total = np.zeros_like(m0.matrix)
    for mc in class_matrices:
        if mc.shape != m0.shape:
            raise DimensionMismatch(f"class matrix shape {mc.shape} != {m0.shape}")
        total = total + mc.matrix
    M = (1.0 - mu) * m0.matrix + mu * total
    if normalize:
        M = frobenius_normalize(M)
    return MmdMatrix(M, COMBINED, mu=mu)


def combined_matrix(source_labels, target_pseudo, n_classes: int, mu: float,
                    weighted: bool = False, normalize: bool = True) -> np.ndarray:
    """Fused equivalent of ``combine(mu, build_m0(..), [build_mc/build_wc ...])``.

    Runs in a single pass through the kernel backend; the result is
    bit-identical to the list-based construction.
    """
    ys, yt = _as_labels(source_labels), _as_labels(target_pseudo)
    n, m = ys.size, yt.size
    ns = np.bincount(ys, minlength=n_classes + 1)[1:n_classes + 1]
    mt = np.bincount(yt, minlength=n_classes + 1)[1:n_classes + 1]
    if weighted:
        priors = estimate_priors(ys, yt, n_classes)
        ps, pt = priors.source_prior, priors.target_prior
    else:
        ps = pt = np.ones(n_classes)
    table = np.stack([class_coefficients(int(ns[c]), int(mt[c]), float(ps[c]), float(pt[c]))
                      for c in range(n_classes)])
    cls = np.concatenate([ys, yt]) - 1
    cls = np.where((cls >= 0) & (cls < n_classes), cls, -1)
    M = _backend.mmd_combined(_domain_index(n, m), cls, marginal_coefficients(n, m), table, mu)
    return frobenius_normalize(M) if normalize else M


def mmd_distance(projected, source_labels, target_pseudo, mu: float) -> float:
    """Balanced empirical MMD between projected source and target samples.

    ``projected`` holds one sample per column, source columns first. The
    marginal term is weighted by (1 - mu) and each class term by mu; classes
    empty on either side are skipped.
    """
    Z = np.asarray(projected, dtype=np.float64)
    ys, yt = _as_labels(source_labels), _as_labels(target_pseudo)
    n = ys.size
    if Z.shape[1] != n + yt.size:
        raise DimensionMismatch(f"{Z.shape[1]} columns for {n + yt.size} samples")
    Zs, Zt = Z[:, :n], Z[:, n:]
    diff = Zs.mean(axis=1) - Zt.mean(axis=1)
    marginal = float(diff @ diff)
    conditional = 0.0
    if mu > 0:
        for c in np.union1d(ys, yt):
            in_s, in_t = ys == c, yt == c
            if not in_s.any() or not in_t.any():
                continue
            dc = Zs[:, in_s].mean(axis=1) - Zt[:, in_t].mean(axis=1)
            conditional += float(dc @ dc)
    return (1.0 - mu) * marginal + mu * conditional
