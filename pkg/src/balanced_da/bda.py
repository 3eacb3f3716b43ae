"""BDA: projection learning with pseudo-label refinement.

One ``fit`` covers BDA and its weighted variant W-BDA, and the special cases
TCA (``mu=0``) and JDA (``mu=0.5``, unweighted).
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .classifier import NnModel, accuracy, knn_predict
from .core import AdaptConfig, IterationRecord, LabeledDomain, RunReport, UnlabeledDomain, validate_pair
from .data_io import zscore_joint
from .eigsolver import Projection, solve_projection
from .errors import DimensionMismatch, LengthMismatch
from .kernel import KERNELIZED, PRIMAL, rbf_kernel
from .mmd import combined_matrix, mmd_distance

log = logging.getLogger(__name__)

DEFAULT_GRID = tuple(round(0.1 * i, 1) for i in range(11))


@dataclass(eq=False)
class AdaptModel:
    projection: Projection
    input_mode: str
    reference: np.ndarray          # representation matrix the basis was fitted on (columns = samples)
    source_embedding: np.ndarray   # n x d, unit-norm rows
    target_embedding: np.ndarray   # m x d, unit-norm rows
    source_labels: np.ndarray
    pseudo_labels: np.ndarray
    report: RunReport

    def classifier(self) -> NnModel:
        """1-NN over the projected source samples."""
        return NnModel(self.source_embedding, self.source_labels)


def unit_rows(Z: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(Z, axis=1, keepdims=True)
    return Z / np.where(norms > 0, norms, 1.0)


def _representation(Xs: np.ndarray, Xt: np.ndarray, config: AdaptConfig):
    # a linear kernel is solved in its primal form, R = X; only rbf needs K
    X = np.vstack([Xs, Xt]).T  # features x samples
    if config.kernel == "linear":
        return X, PRIMAL
    return rbf_kernel(X, config.resolved_gamma(X.shape[0])).data, KERNELIZED


def _check_truth(truth, m):
    if truth is None:
        return None
    truth = np.asarray(truth, dtype=np.int64).reshape(-1)
    if truth.size != m:
        raise LengthMismatch(f"{truth.size} true target labels for {m} target samples")
    return truth


def _counts(labels: np.ndarray, n_classes: int) -> list:
    return np.bincount(labels, minlength=n_classes + 1)[1:n_classes + 1].tolist()


def _config_echo(config: AdaptConfig, n_features: int) -> dict:
    echo = config.to_dict()
    echo["gamma"] = config.resolved_gamma(n_features)
    return echo


def prepare(source: LabeledDomain, target: UnlabeledDomain, config: AdaptConfig):
    """Validate and (optionally) z-score the pair; returns source / target feature arrays."""
    validate_pair(source, target)
    if config.zscore:
        s, t = zscore_joint(source.features, target.features)
        return s, t
    return np.asarray(source.features), np.asarray(target.features)


def fit(source: LabeledDomain, target: UnlabeledDomain, config: AdaptConfig = AdaptConfig(),
        true_target_labels=None) -> AdaptModel:
    """Learn the adapted projection and pseudo-label the target domain.

    The initial pseudo-labels come from 1-NN on the (z-scored) input
    features. Each of the ``config.iterations`` rounds then rebuilds the
    combined MMD matrix from the current pseudo-labels, solves for the
    projection, unit-normalises every projected sample and relabels the
    target with 1-NN against the projected source. There is no early stop.

    The per-iteration ``mmd_distance`` is the un-normalised balanced MMD of
    the unit-normalised projected samples, evaluated with the pseudo-labels
    that built that round's objective.
    """
    Xs, Xt = prepare(source, target, config)
    n, m = Xs.shape[0], Xt.shape[0]
    C = source.n_classes
    ys = np.asarray(source.labels)
    truth = _check_truth(true_target_labels, m)

    R, mode = _representation(Xs, Xt, config)
    p = R.shape[0]
    if config.dim > p:
        raise DimensionMismatch(f"dim={config.dim} exceeds representation size {p}")
    Rc = R - R.mean(axis=1, keepdims=True)   # R H, H the centering matrix
    B = Rc @ Rc.T
    reg = config.lam * np.eye(p)

    labels = knn_predict(NnModel(Xs, ys), Xt, k=1)
    report = RunReport(config=_config_echo(config, Xs.shape[1]))
    raw = unit_rows(np.vstack([Xs, Xt])).T
    report.initial_mmd_distance = mmd_distance(raw, ys, labels, config.mu)
    if truth is not None:
        report.initial_accuracy = accuracy(labels, truth)

    proj = None
    Z = None
    for it in range(1, config.iterations + 1):
        M = combined_matrix(ys, labels, C, config.mu, weighted=config.weighted)
        S = R @ M @ R.T + reg
        proj = solve_projection(S, B, config.dim, config.ridge)
        Z = unit_rows(proj.transform(R).T)
        new_labels = knn_predict(NnModel(Z[:n], ys), Z[n:], k=1)
        rec = IterationRecord(
            iteration=it,
            mmd_distance=mmd_distance(Z.T, ys, labels, config.mu),
            pseudo_label_counts=_counts(new_labels, C),
            input_label_counts=_counts(labels, C),
            accuracy=None if truth is None else accuracy(new_labels, truth),
        )
        report.per_iteration.append(rec)
        log.debug("iteration %d: acc=%s mmd=%.6g", it, rec.accuracy, rec.mmd_distance)
        labels = new_labels

    report.final_pseudo_labels = labels.tolist()
    return AdaptModel(proj, mode, R, Z[:n], Z[n:], ys, labels, report)


def special_case_jda(source, target, config: AdaptConfig = AdaptConfig(), true_target_labels=None):
    """Equal-weight joint adaptation: ``fit`` with mu=0.5, unweighted."""
    return fit(source, target, replace(config, mu=0.5, weighted=False), true_target_labels)


def special_case_tca(source, target, config: AdaptConfig = AdaptConfig(), true_target_labels=None):
    """Marginal-only adaptation: ``fit`` with mu=0, unweighted."""
    return fit(source, target, replace(config, mu=0.0, weighted=False), true_target_labels)


def sweep_reports(source, target, base_config: AdaptConfig, grid: Sequence[float] = DEFAULT_GRID,
                  truth=None, workers: int = 1) -> list:
    """Run ``fit`` for every mu in ``grid``; returns ``[(mu, RunReport)]`` in grid order."""
    grid = [float(g) for g in grid]
    for g in grid:
        if not 0.0 <= g <= 1.0:
            raise ValueError(f"grid value {g} outside [0, 1]")

    def one(mu):
        try:
            return fit(source, target, replace(base_config, mu=mu), truth).report
        except Exception as exc:
            exc.mu = mu
            if exc.args and isinstance(exc.args[0], str):
                exc.args = (f"mu={mu}: {exc.args[0]}",) + exc.args[1:]
            raise

    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one, grid))
    else:
        reports = [one(mu) for mu in grid]
    return list(zip(grid, reports))


def sweep_mu(source, target, base_config: AdaptConfig, grid: Sequence[float] = DEFAULT_GRID,
             truth=None, workers: int = 1) -> list:
    """Final target accuracy for every mu in ``grid``: ``[(mu, accuracy)]``."""
    if truth is None:
        raise ValueError("sweep_mu needs the true target labels")
    return [(mu, rep.final_accuracy)
            for mu, rep in sweep_reports(source, target, base_config, grid, truth, workers)]


def best_mu(curve) -> tuple:
    """(mu, accuracy) with the highest accuracy; ties go to the smaller mu."""
    best = None
    for mu, acc in sorted(curve, key=lambda pair: pair[0]):
        if best is None or acc > best[1]:
            best = (mu, acc)
    return best
