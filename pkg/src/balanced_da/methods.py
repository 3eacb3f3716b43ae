"""Fixed registry of comparison methods run by the command-line tool.

Every entry takes the same arguments and returns a ``MethodResult``; the
adaptation entries are thin wrappers over ``bda.fit`` so a registry report
is byte-identical to the corresponding direct call.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .bda import DEFAULT_GRID, best_mu, fit, prepare, special_case_jda, special_case_tca, \
    sweep_reports, unit_rows
from .classifier import NnModel, accuracy, knn_predict
from .core import AdaptConfig, IterationRecord, LabeledDomain, RunReport, UnlabeledDomain
from .errors import DimensionMismatch
from .mmd import mmd_distance


@dataclass
class MethodResult:
    method: str
    report: Optional[RunReport] = None
    mu: Optional[float] = None
    curve: list = field(default_factory=list)   # [(mu, accuracy)] when the method swept mu
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        d = {"method": self.method, "status": "ok" if self.ok else "error", "mu": self.mu}
        if self.curve:
            d["curve"] = [{"mu": m, "accuracy": a} for m, a in self.curve]
        d["report"] = None if self.report is None else self.report.to_dict()
        d["error"] = self.error
        return d


def _baseline_report(config: AdaptConfig, Zs, Zt, ys, truth) -> RunReport:
    # baselines have no iterations; one record keeps the report layout uniform.
    # 1-NN runs on the features as given (as for fit's initial labels), the
    # distance on unit rows so it is on the scale of fit's reports
    C = int(ys.max())
    pred = knn_predict(NnModel(Zs, ys), Zt, k=1)
    counts = np.bincount(pred, minlength=C + 1)[1:C + 1].tolist()
    dist = mmd_distance(unit_rows(np.vstack([Zs, Zt])).T, ys, pred, config.mu)
    acc = None if truth is None else accuracy(pred, truth)
    report = RunReport(config=config.to_dict())
    report.initial_mmd_distance = dist
    report.initial_accuracy = acc
    report.per_iteration.append(IterationRecord(1, dist, counts, counts, acc))
    report.final_pseudo_labels = pred.tolist()
    return report


def raw_1nn(source, target, config: AdaptConfig, truth=None, grid=None, workers=1) -> MethodResult:
    """1-NN on the preprocessed input features, no adaptation."""
    Xs, Xt = prepare(source, target, config)
    return MethodResult("raw1nn", _baseline_report(config, Xs, Xt, np.asarray(source.labels), truth))


def pca_1nn(source, target, config: AdaptConfig, truth=None, grid=None, workers=1) -> MethodResult:
    """1-NN after projecting both domains on their joint top ``dim`` principal axes."""
    Xs, Xt = prepare(source, target, config)
    X = np.vstack([Xs, Xt])
    if config.dim > min(X.shape):
        raise DimensionMismatch(f"dim={config.dim} exceeds the rank bound {min(X.shape)}")
    Xc = X - X.mean(axis=0)
    _, _, Vt = np.linalg.svd(Xc, full_matrices=False)
    V = Vt[:config.dim].T
    Z = Xc @ V
    n = Xs.shape[0]
    return MethodResult("pca1nn", _baseline_report(config, Z[:n], Z[n:], np.asarray(source.labels), truth))


def tca(source, target, config: AdaptConfig, truth=None, grid=None, workers=1) -> MethodResult:
    model = special_case_tca(source, target, config, truth)
    return MethodResult("tca", model.report, mu=0.0)


def jda(source, target, config: AdaptConfig, truth=None, grid=None, workers=1) -> MethodResult:
    model = special_case_jda(source, target, config, truth)
    return MethodResult("jda", model.report, mu=0.5)


def _balanced(name, weighted, source, target, config, truth, grid, workers):
    config = replace(config, weighted=weighted)
    if grid is None or truth is None:
        # nothing to select mu against: use the configured value
        return MethodResult(name, fit(source, target, config, truth).report, mu=config.mu)
    reports = sweep_reports(source, target, config, grid, truth, workers)
    curve = [(mu, rep.final_accuracy) for mu, rep in reports]
    mu, _ = best_mu(curve)
    return MethodResult(name, dict(reports)[mu], mu=mu, curve=curve)


def bda(source, target, config: AdaptConfig, truth=None, grid=None, workers=1) -> MethodResult:
    """BDA at ``config.mu``, or at the best mu of ``grid`` when one is given with truth."""
    return _balanced("bda", False, source, target, config, truth, grid, workers)


def wbda(source, target, config: AdaptConfig, truth=None, grid=None, workers=1) -> MethodResult:
    """Prior-weighted BDA; mu handling as for ``bda``."""
    return _balanced("wbda", True, source, target, config, truth, grid, workers)


REGISTRY: dict[str, Callable[..., MethodResult]] = {
    "raw1nn": raw_1nn,
    "pca1nn": pca_1nn,
    "tca": tca,
    "jda": jda,
    "bda": bda,
    "wbda": wbda,
}


def run_method(name: str, source: LabeledDomain, target: UnlabeledDomain, config: AdaptConfig,
               truth=None, grid: Optional[Sequence[float]] = DEFAULT_GRID, workers: int = 1) -> MethodResult:
    """Run one registry entry; failures come back as a result with ``error`` set."""
    if name not in REGISTRY:
        raise KeyError(f"unknown method {name!r}; choose from {', '.join(REGISTRY)}")
    try:
        return REGISTRY[name](source, target, config, truth, grid, workers)
    except Exception as exc:  # reported per method, the other methods still run
        return MethodResult(name, error=f"{type(exc).__name__}: {exc}")
