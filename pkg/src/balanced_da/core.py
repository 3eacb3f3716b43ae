"""Domain datasets, solver configuration and run reports."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .errors import (
    BadLabel,
    DimensionMismatch,
    EmptyDomain,
    InvalidConfig,
    NonFiniteFeatures,
    NonpositiveGamma,
)

REPORT_SCHEMA = "balanced_da.run_report/1"
# "linear" optimises over the raw features (D x D problem); "rbf" over the
# (n+m) x (n+m) kernel matrix
KERNELS = ("linear", "rbf")


def _frozen_features(features) -> np.ndarray:
    arr = np.array(features, dtype=np.float64, copy=True)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    if arr.ndim != 2:
        raise DimensionMismatch(f"features must be a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise NonFiniteFeatures(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
    arr.setflags(write=False)
    return arr


def _frozen_labels(labels) -> np.ndarray:
    raw = np.asarray(labels)
    if raw.ndim != 1:
        raw = raw.reshape(-1)
    if raw.size and raw.dtype.kind == "f":
        if not np.all(np.isfinite(raw)) or np.any(raw != np.round(raw)):
            raise BadLabel("labels must be integers")
    elif raw.size and raw.dtype.kind not in "iub":
        raise BadLabel(f"labels must be integers, got dtype {raw.dtype}")
    arr = raw.astype(np.int64, copy=True)
    arr.setflags(write=False)
    return arr


def check_labels(labels: np.ndarray, n_classes: int) -> None:
    """Raise BadLabel unless every label lies in 1..n_classes."""
    if labels.size == 0:
        return
    lo, hi = int(labels.min()), int(labels.max())
    if lo < 1 or hi > n_classes:
        bad = lo if lo < 1 else hi
        raise BadLabel(f"label {bad} outside 1..{n_classes}")


@dataclass(frozen=True, eq=False)
class UnlabeledDomain:
    features: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "features", _frozen_features(self.features))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True, eq=False)
class LabeledDomain:
    """Feature matrix (samples x features) with 1-based integer class labels.

    ``n_classes`` defaults to the largest label present. Pass it explicitly
    when the labels are pseudo-labels that may not cover every class.
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: Optional[int] = None

    def __post_init__(self):
        feats = _frozen_features(self.features)
        labels = _frozen_labels(self.labels)
        if feats.shape[0] != labels.shape[0]:
            raise DimensionMismatch(
                f"{feats.shape[0]} feature rows but {labels.shape[0]} labels")
        n_classes = self.n_classes
        if n_classes is None:
            n_classes = int(labels.max()) if labels.size else 0
        n_classes = int(n_classes)
        check_labels(labels, n_classes)
        if labels.size and n_classes < 2:
            raise BadLabel(f"need at least 2 classes, got {n_classes}")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_classes", n_classes)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes + 1)[1:]


def validate_pair(source: LabeledDomain, target: UnlabeledDomain) -> None:
    """Check that a source/target pair can be adapted. Pure; returns None."""
    if source.n_samples == 0:
        raise EmptyDomain("source domain has no samples")
    if target.n_samples == 0:
        raise EmptyDomain("target domain has no samples")
    if source.n_features != target.n_features:
        raise DimensionMismatch(
            f"source has {source.n_features} features, target has {target.n_features}")
    check_labels(source.labels, source.n_classes)
    if source.n_classes < 2:
        raise BadLabel(f"need at least 2 classes, got {source.n_classes}")


@dataclass(frozen=True)
class AdaptConfig:
    """Everything that determines a run.

    ``lam`` is the regularisation weight on the projection's Frobenius norm.
    ``ridge`` is the fallback conditioner added to the objective matrix when
    its Cholesky factorisation fails; ``None`` selects 1e-9 * trace / dim.
    """

    mu: float = 0.5
    lam: float = 0.1
    dim: int = 100
    kernel: str = "linear"
    gamma: Optional[float] = None
    iterations: int = 10
    weighted: bool = False
    ridge: Optional[float] = None
    zscore: bool = True

    def __post_init__(self):
        if not (isinstance(self.mu, (int, float)) and 0.0 <= self.mu <= 1.0):
            raise InvalidConfig(f"mu must lie in [0, 1], got {self.mu}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise InvalidConfig(f"lambda must be positive, got {self.lam}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidConfig(f"dim must be a positive integer, got {self.dim}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise InvalidConfig(f"iterations must be >= 1, got {self.iterations}")
        if self.kernel not in KERNELS:
            raise InvalidConfig(f"unknown kernel {self.kernel!r}")
        if self.gamma is not None and not self.gamma > 0:
            raise NonpositiveGamma(f"gamma must be positive, got {self.gamma}")
        if self.ridge is not None and not self.ridge > 0:
            raise InvalidConfig(f"ridge must be positive, got {self.ridge}")
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "iterations", int(self.iterations))

    def resolved_gamma(self, n_features: int) -> Optional[float]:
        if self.kernel != "rbf":
            return None
        return self.gamma if self.gamma is not None else 1.0 / n_features

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AdaptConfig":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)


@dataclass
class IterationRecord:
    iteration: int
    mmd_distance: float
    pseudo_label_counts: list
    input_label_counts: list
    accuracy: Optional[float] = None

    def to_dict(self) -> dict:
        d = {"iteration": self.iteration}
        if self.accuracy is not None:
            d["accuracy"] = self.accuracy
        d["mmd_distance"] = self.mmd_distance
        d["input_label_counts"] = list(self.input_label_counts)
        d["pseudo_label_counts"] = list(self.pseudo_label_counts)
        return d


@dataclass
class RunReport:
    """Per-iteration trace of one fit.

    ``initial_*`` describe the unadapted input space (z-scored features,
    each sample scaled to unit norm) with the first 1-NN pseudo-labels, so
    they are on the same scale as the per-iteration distances.
    """

    config: dict
    per_iteration: list = field(default_factory=list)
    final_pseudo_labels: list = field(default_factory=list)
    initial_mmd_distance: Optional[float] = None
    initial_accuracy: Optional[float] = None

    @property
    def final_accuracy(self) -> Optional[float]:
        return self.per_iteration[-1].accuracy if self.per_iteration else None

    @property
    def final_mmd_distance(self) -> Optional[float]:
        return self.per_iteration[-1].mmd_distance if self.per_iteration else None

    def to_dict(self) -> dict:
        d = {"schema": REPORT_SCHEMA, "config": dict(self.config)}
        if self.initial_accuracy is not None:
            d["initial_accuracy"] = self.initial_accuracy
        if self.initial_mmd_distance is not None:
            d["initial_mmd_distance"] = self.initial_mmd_distance
        d["per_iteration"] = [r.to_dict() for r in self.per_iteration]
        d["final_accuracy"] = self.final_accuracy
        d["final_mmd_distance"] = self.final_mmd_distance
        d["final_pseudo_labels"] = [int(v) for v in self.final_pseudo_labels]
        return d

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), indent=indent, allow_nan=False)
