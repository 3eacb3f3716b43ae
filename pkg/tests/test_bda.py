import numpy as np
import pytest

from balanced_da.bda import DEFAULT_GRID, best_mu, fit, special_case_jda, special_case_tca, sweep_mu, \
    sweep_reports
from balanced_da.core import AdaptConfig, LabeledDomain, UnlabeledDomain
from balanced_da.data_io import generate_shift, synthetic_task
from balanced_da.eigsolver import solve_projection
from balanced_da.errors import DimensionMismatch, LengthMismatch
from balanced_da.kernel import KERNELIZED, PRIMAL
from balanced_da.mmd import build_m0, build_mc, combine, combined_matrix, estimate_priors

from conftest import random_pair


def zero_shift(seed=0, n=40, D=5, C=3):
    rng = np.random.default_rng(seed)
    y = np.r_[np.arange(1, C + 1), rng.integers(1, C + 1, n - C)]
    X = 4.0 * np.eye(C, D)[y - 1] + 0.3 * rng.standard_normal((n, D))
    return LabeledDomain(X, y), UnlabeledDomain(X), y


def task(kind, seed, **kw):
    return generate_shift(synthetic_task(kind, seed, **kw))


def test_zero_shift_copy():
    src, tgt, y = zero_shift()
    model = fit(src, tgt, AdaptConfig(mu=0.5, dim=2, iterations=2), y)
    assert model.report.final_accuracy == 1.0
    assert all(r.mmd_distance <= 1e-8 for r in model.report.per_iteration)


def test_report_invariants(pair):
    src, tgt, yt = pair
    cfg = AdaptConfig(dim=3, iterations=4)
    model = fit(src, tgt, cfg, yt)
    rep = model.report
    assert model.projection.dim == 3 and model.input_mode == PRIMAL
    assert len(model.pseudo_labels) == tgt.n_samples == len(rep.final_pseudo_labels)
    assert len(rep.per_iteration) == 4
    for r in rep.per_iteration:
        assert sum(r.pseudo_label_counts) == tgt.n_samples
        assert len(r.pseudo_label_counts) == src.n_classes
        assert r.mmd_distance >= 0


def test_refinement_chain(pair):
    src, tgt, yt = pair
    rep = fit(src, tgt, AdaptConfig(dim=3, iterations=5), yt).report
    for prev, cur in zip(rep.per_iteration, rep.per_iteration[1:]):
        assert cur.input_label_counts == prev.pseudo_label_counts
    final = np.bincount(rep.final_pseudo_labels, minlength=src.n_classes + 1)[1:].tolist()
    assert final == rep.per_iteration[-1].pseudo_label_counts


def test_no_truth_no_accuracy(pair):
    src, tgt, _ = pair
    rep = fit(src, tgt, AdaptConfig(dim=2, iterations=2)).report
    assert rep.final_accuracy is None and rep.initial_accuracy is None
    assert "accuracy" not in rep.to_dict()["per_iteration"][0]


def test_mu_zero_uses_only_marginal_matrix():
    ys, yt = [1, 2, 2, 1, 3], [3, 3, 1, 2]
    M = combined_matrix(ys, yt, 3, 0.0)
    assert np.array_equal(M, combine(0.0, build_m0(5, 4), []).matrix)


@pytest.mark.parametrize("seed", range(3))
def test_mu_zero_label_permutation_invariance(seed):
    src, tgt, _ = random_pair(seed)
    perm = np.array([0, 3, 1, 2])            # class c -> perm[c]
    permuted = LabeledDomain(src.features, perm[src.labels])
    cfg = AdaptConfig(mu=0.0, dim=3, iterations=3)
    A = fit(src, tgt, cfg).projection.basis
    B = fit(permuted, tgt, cfg).projection.basis
    assert np.allclose(np.abs(A), np.abs(B), rtol=0, atol=1e-10)


def test_seed7_shift_beats_raw():
    src, tgt, y = task("shift", 7)
    rep = fit(src, tgt, AdaptConfig(dim=4), y).report
    assert rep.final_accuracy > rep.initial_accuracy


def test_jda_and_tca_delegate(pair):
    src, tgt, yt = pair
    cfg = AdaptConfig(dim=3, iterations=3, mu=0.9, weighted=True)
    assert special_case_jda(src, tgt, cfg, yt).report.to_json() == \
        fit(src, tgt, AdaptConfig(dim=3, iterations=3, mu=0.5), yt).report.to_json()
    assert special_case_tca(src, tgt, cfg, yt).report.to_json() == \
        fit(src, tgt, AdaptConfig(dim=3, iterations=3, mu=0.0), yt).report.to_json()


def test_jda_zero_shift():
    src, tgt, y = zero_shift(1)
    assert special_case_jda(src, tgt, AdaptConfig(dim=2, iterations=2), y).report.final_accuracy == 1.0


def test_sweep_zero_shift_endpoints():
    src, tgt, y = zero_shift(2)
    curve = sweep_mu(src, tgt, AdaptConfig(dim=2, iterations=2), [0.0, 1.0], y)
    assert curve == [(0.0, 1.0), (1.0, 1.0)]


def test_default_grid():
    assert len(DEFAULT_GRID) == 11 and DEFAULT_GRID[0] == 0.0 and DEFAULT_GRID[-1] == 1.0
    src, tgt, y = task("shift", 1)
    curve = sweep_mu(src, tgt, AdaptConfig(dim=4, iterations=2), truth=y)
    assert [mu for mu, _ in curve] == list(DEFAULT_GRID)


def test_conditional_task_prefers_large_mu():
    # target mean left in place, only the class means move
    src, tgt, y = task("conditional", 4)
    curve = sweep_mu(src, tgt, AdaptConfig(dim=4), truth=y)
    assert best_mu(curve)[0] > 0.5


def test_jda_below_sweep_on_imbalanced_seed3():
    src, tgt, y = task("imbalanced", 3)
    cfg = AdaptConfig(dim=4)
    jda_acc = special_case_jda(src, tgt, cfg, y).report.final_accuracy
    assert jda_acc <= best_mu(sweep_mu(src, tgt, cfg, truth=y))[1]


def test_sweep_parallel_matches_serial(pair):
    src, tgt, yt = pair
    cfg = AdaptConfig(dim=3, iterations=3)
    serial = sweep_reports(src, tgt, cfg, [0.2, 0.6, 1.0], yt, workers=1)
    parallel = sweep_reports(src, tgt, cfg, [0.2, 0.6, 1.0], yt, workers=3)
    assert [mu for mu, _ in parallel] == [0.2, 0.6, 1.0]
    assert [r.to_json() for _, r in serial] == [r.to_json() for _, r in parallel]


def test_sweep_errors():
    src, tgt, y = zero_shift()
    with pytest.raises(ValueError):
        sweep_mu(src, tgt, AdaptConfig(dim=2), [0.5, 1.2], y)
    with pytest.raises(ValueError):
        sweep_mu(src, tgt, AdaptConfig(dim=2), [0.5])
    with pytest.raises(DimensionMismatch) as err:
        sweep_mu(src, tgt, AdaptConfig(dim=50), [0.3], y)
    assert err.value.mu == 0.3 and "mu=0.3" in str(err.value)


def test_best_mu_ties_to_smaller():
    assert best_mu([(0.5, 0.9), (0.1, 0.9), (0.7, 0.8)]) == (0.1, 0.9)


def test_fit_errors(pair):
    src, tgt, yt = pair
    with pytest.raises(DimensionMismatch):
        fit(src, tgt, AdaptConfig(dim=6))
    with pytest.raises(LengthMismatch):
        fit(src, tgt, AdaptConfig(dim=2), yt[:-1])


def test_rbf_mode(pair):
    src, tgt, yt = pair
    model = fit(src, tgt, AdaptConfig(kernel="rbf", dim=5, iterations=3), yt)
    N = src.n_samples + tgt.n_samples
    assert model.input_mode == KERNELIZED
    assert model.projection.basis.shape == (N, 5)
    assert model.report.config["gamma"] == 1.0 / src.n_features


def test_deterministic(pair):
    src, tgt, yt = pair
    cfg = AdaptConfig(dim=3, weighted=True, mu=0.4)
    assert fit(src, tgt, cfg, yt).report.to_json() == fit(src, tgt, cfg, yt).report.to_json()


def test_classifier_reproduces_pseudo_labels(pair):
    src, tgt, yt = pair
    model = fit(src, tgt, AdaptConfig(dim=3), yt)
    from balanced_da.classifier import knn_predict
    assert np.array_equal(knn_predict(model.classifier(), model.target_embedding), model.pseudo_labels)


def test_weighted_matches_prior_scaled_conditional():
    # equal source / target priors: W_c is M_c scaled by the common prior
    rng = np.random.default_rng(9)
    ys = np.repeat([1, 2, 3], [6, 3, 3])
    yt = np.repeat([1, 2, 3], [4, 2, 2])
    pri = estimate_priors(ys, yt, 3)
    assert np.allclose(pri.source_prior, pri.target_prior, rtol=0, atol=1e-15)
    mu = 0.6
    Mw = combined_matrix(ys, yt, 3, mu, weighted=True)
    scaled = [build_mc(ys, yt, c) for c in (1, 2, 3)]
    scaled = [type(m)(pri.source_prior[m.cls - 1] * m.matrix, m.kind, m.cls) for m in scaled]
    Mref = combine(mu, build_m0(12, 8), scaled).matrix
    assert np.max(np.abs(Mw - Mref)) <= 1e-15
    X = rng.standard_normal((4, 20))
    B = X @ (np.eye(20) - 1 / 20) @ X.T
    objs = []
    for M in (Mw, Mref):
        S = X @ M @ X.T + 0.1 * np.eye(4)
        A = solve_projection(S, B, 2).basis
        objs.append(np.trace(A.T @ S @ A))
    assert abs(objs[0] - objs[1]) <= 1e-8
