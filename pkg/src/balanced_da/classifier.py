"""Exhaustive-scan nearest-neighbour classification."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DimensionMismatch, KTooLarge, LengthMismatch


@dataclass(frozen=True, eq=False)
class NnModel:
    references: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        refs = np.ascontiguousarray(self.references, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if refs.ndim != 2:
            raise DimensionMismatch(f"references must be 2-d, got shape {refs.shape}")
        if refs.shape[0] != labels.shape[0]:
            raise LengthMismatch(f"{refs.shape[0]} references but {labels.shape[0]} labels")
        if refs.shape[0] == 0:
            raise ValueError("a nearest-neighbour model needs at least one reference point")
        object.__setattr__(self, "references", refs)
        object.__setattr__(self, "labels", labels)


def _vote(neighbour_labels: np.ndarray) -> int:
    # neighbours arrive ordered by (distance, reference index); on a count tie the
    # label seen first wins, i.e. the one carried by the closest / lowest-index reference
    best, best_count = neighbour_labels[0], 0
    counts = {}
    for lab in neighbour_labels:
        counts[lab] = counts.get(lab, 0) + 1
    for lab in neighbour_labels:
        if counts[lab] > best_count:
            best, best_count = lab, counts[lab]
    return int(best)


def knn_predict(model: NnModel, queries, k: int = 1) -> np.ndarray:
    """Majority label among the ``k`` nearest references (Euclidean).

    Distance ties go to the lower reference index, so ``k=1`` returns the
    label of the first reference at minimal distance.
    """
    Q = np.ascontiguousarray(queries, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[1] != model.references.shape[1]:
        raise DimensionMismatch(
            f"queries of shape {Q.shape} do not match {model.references.shape[1]} reference features")
    if k < 1 or k > model.references.shape[0]:
        raise KTooLarge(f"k={k} with {model.references.shape[0]} references")
    if Q.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    if k == 1:
        return model.labels[_backend.nearest_index(Q, model.references)]
    D = _backend.sq_distances(Q, model.references)
    order = np.argsort(D, axis=1, kind="stable")[:, :k]
    return np.array([_vote(model.labels[row]) for row in order], dtype=np.int64)


def accuracy(predicted, truth) -> float:
    p = np.asarray(predicted).reshape(-1)
    t = np.asarray(truth).reshape(-1)
    if p.shape != t.shape:
        raise LengthMismatch(f"{p.size} predictions vs {t.size} true labels")
    if p.size == 0:
        raise LengthMismatch("cannot score an empty prediction vector")
    return float(np.mean(p == t))
