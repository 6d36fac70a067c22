import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riskscope import regress
from riskscope.dataset import SIGNAL_FEATURES, generate_synthetic, standardize, train_test_split
from riskscope.exceptions import ShapeError
from riskscope.metrics import r2
from riskscope.regress import Hyperparams, ModelFit

from conftest import well_conditioned
from oracles import (
    dual_oracle_grid,
    dual_oracle_slsqp,
    exhaustive_stump,
    knn_oracle,
    normal_equation_oracle,
)


# -- KNN --------------------------------------------------------------------------

def test_knn_k1_interpolates(rng):
    x, y = rng.normal(size=(25, 3)), rng.normal(size=25)
    m = regress.fit_knn(x, y, Hyperparams(knn_k=1))
    np.testing.assert_array_equal(regress.predict(m, x), y)


def test_knn_equidistant_pair_mean():
    x = np.array([[-1.0, 0.0], [1.0, 0.0], [10.0, 0.0]])
    m = regress.fit_knn(x, np.array([2.0, 4.0, 100.0]), Hyperparams(knn_k=2))
    assert regress.predict(m, np.array([[0.0, 0.0]]))[0] == 3.0


def test_knn_matches_exhaustive_oracle(rng):
    x, y = rng.normal(size=(30, 5)), rng.normal(size=30)
    q = rng.normal(size=(12, 5))
    m = regress.fit_knn(x, y, Hyperparams(knn_k=5))
    np.testing.assert_array_equal(regress.predict(m, q), knn_oracle(x, y, q, 5))


def test_knn_k_equals_n_predicts_mean(rng):
    x, y = rng.normal(size=(10, 2)), rng.normal(size=10)
    m = regress.fit_knn(x, y, Hyperparams(knn_k=10))
    np.testing.assert_allclose(regress.predict(m, rng.normal(size=(4, 2))), y.mean())


def test_knn_rejects_large_k(rng):
    with pytest.raises(ValueError):
        regress.fit_knn(rng.normal(size=(3, 2)), np.zeros(3), Hyperparams(knn_k=4))


# -- OLS / ridge -------------------------------------------------------------------

def test_ols_exact_linear(rng):
    x = rng.normal(size=(40, 4))
    y = 2.0 * x[:, 0]
    m = regress.fit_ols(x, y)
    np.testing.assert_allclose(m.coef, [2.0, 0, 0, 0], atol=1e-8)
    assert abs(m.intercept) < 1e-8
    q = np.zeros((1, 4))
    q[0, 0] = 3.0
    assert abs(regress.predict(m, q)[0] - 6.0) < 1e-8


def test_ols_constant_target(rng):
    x = rng.normal(size=(20, 3))
    m = regress.fit_ols(x, np.full(20, 7.5))
    np.testing.assert_allclose(m.coef, 0.0, atol=1e-12)
    assert m.intercept == pytest.approx(7.5)


def test_ols_matches_oracle(rng):
    x = well_conditioned(rng, 40, 6)
    y = rng.normal(size=40)
    beta, b0 = normal_equation_oracle(x, y)
    m = regress.fit_ols(x, y)
    np.testing.assert_allclose(m.coef, beta, atol=1e-8)
    assert abs(m.intercept - b0) < 1e-8


def test_ols_rank_deficient_uses_jitter(rng):
    x = rng.normal(size=(15, 2))
    x = np.column_stack([x, x[:, 0]])
    m = regress.fit_ols(x, x[:, 1])
    assert m.diagnostics["jitter"] > 0
    assert np.all(np.isfinite(m.coef))


def test_ridge_alpha_zero_is_ols(rng):
    x, y = well_conditioned(rng, 30, 4), rng.normal(size=30)
    np.testing.assert_allclose(
        regress.fit_ridge(x, y, Hyperparams(alpha=0.0)).coef, regress.fit_ols(x, y).coef, atol=1e-8
    )


def test_ridge_huge_alpha_shrinks(rng):
    x, y = rng.normal(size=(30, 4)), rng.normal(size=30)
    assert np.linalg.norm(regress.fit_ridge(x, y, Hyperparams(alpha=1e9)).coef) < 1e-3


def test_ridge_matches_closed_form(rng):
    x, y = well_conditioned(rng, 35, 5), rng.normal(size=35)
    beta, b0 = normal_equation_oracle(x, y, 1.0)
    m = regress.fit_ridge(x, y, Hyperparams(alpha=1.0))
    np.testing.assert_allclose(m.coef, beta, atol=1e-8)
    assert abs(m.intercept - b0) < 1e-8


def test_negative_alpha_rejected():
    with pytest.raises(ValueError):
        Hyperparams(alpha=-1.0)


def test_ridge_norm_nonincreasing_in_alpha(rng):
    x, y = rng.normal(size=(40, 6)), rng.normal(size=40)
    norms = [np.linalg.norm(regress.fit_ridge(x, y, Hyperparams(alpha=a)).coef)
             for a in np.logspace(-3, 4, 15)]
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


# -- lasso -------------------------------------------------------------------------

def _standardized(rng, n, d):
    x = rng.normal(size=(n, d))
    return (x - x.mean(0)) / x.std(0)


def test_lasso_zero_above_alpha_max(rng):
    x = _standardized(rng, 50, 6)
    y = x @ rng.normal(size=6) + rng.normal(size=50)
    amax = regress.lasso_alpha_max(x, y)
    for a in (amax, 1.5 * amax):
        m = regress.fit_lasso(x, y, Hyperparams(alpha=a))
        assert np.all(m.coef == 0.0)
    assert np.any(regress.fit_lasso(x, y, Hyperparams(alpha=0.9 * amax)).coef != 0)


def test_lasso_alpha_zero_is_ols(rng):
    x = _standardized(rng, 60, 5)
    y = x @ rng.normal(size=5) + 0.3 * rng.normal(size=60)
    m = regress.fit_lasso(x, y, Hyperparams(alpha=0.0))
    np.testing.assert_allclose(m.coef, regress.fit_ols(x, y).coef, atol=1e-5)
    assert m.diagnostics["converged"]


def test_lasso_kkt(rng):
    x = _standardized(rng, 60, 8)
    y = x @ rng.normal(size=8) + rng.normal(size=60)
    m = regress.fit_lasso(x, y, Hyperparams(alpha=0.1))
    assert regress.lasso_kkt_violation(x, y, m.coef, 0.1) < 1e-5


def test_lasso_sparsity_grows_with_alpha(rng):
    x = _standardized(rng, 80, 10)
    y = x[:, :4] @ np.array([3.0, -2.0, 1.0, 0.5]) + rng.normal(size=80)
    zeros = [int(np.sum(regress.fit_lasso(x, y, Hyperparams(alpha=a)).coef == 0))
             for a in np.logspace(-3, 1, 12)]
    assert all(b >= a for a, b in zip(zeros, zeros[1:]))


def test_lasso_nonconvergence_is_flagged(rng):
    x = _standardized(rng, 40, 5)
    y = rng.normal(size=40)
    m = regress.fit_lasso(x, y, Hyperparams(alpha=1e-4, lasso_max_sweeps=1, lasso_tol=0.0))
    assert m.diagnostics["converged"] is False


# -- SVR ---------------------------------------------------------------------------

def test_rbf_kernel_self_similarity(rng):
    x = rng.normal(size=(5, 3))
    for gamma in (0.01, 1.0, 50.0):
        np.testing.assert_allclose(np.diag(regress.rbf_kernel(x, x, gamma)), 1.0)


def test_svr_constant_target_is_flat(rng):
    x = rng.normal(size=(15, 2))
    m = regress.fit_svr(x, np.full(15, 3.0), Hyperparams(svr_epsilon=1.0), "rbf")
    pred = regress.predict(m, x)
    assert np.all(np.abs(pred - 3.0) <= 1.0)
    np.testing.assert_allclose(regress.predict(m, rng.normal(size=(5, 2))), 3.0, atol=1e-12)


@pytest.mark.parametrize("kernel", ["linear", "rbf"])
def test_svr_eight_point_dual_matches_qp_oracle(kernel):
    x = np.linspace(-2.0, 2.0, 8)[:, None]
    y = np.sin(1.5 * x[:, 0]) + 0.1 * np.array([1, -1, 2, 0, -2, 1, 0, -1])
    h = Hyperparams(svr_c=1.0, svr_epsilon=0.1, rbf_gamma=0.5, svr_tol=1e-6)
    m = regress.fit_svr(x, y, h, kernel)
    K = regress.rbf_kernel(x, x, 0.5) if kernel == "rbf" else x @ x.T
    assert abs(m.diagnostics["dual_objective"] - dual_oracle_slsqp(K, y, 1.0, 0.1)) < 1e-3
    assert abs(m.diagnostics["dual_objective"] - dual_oracle_grid(K, y, 1.0, 0.1)[0]) < 1e-3


def test_svr_three_point_dual_matches_grid_oracle():
    x = np.array([[0.0], [1.0], [2.5]])
    y = np.array([0.0, 1.5, 0.5])
    h = Hyperparams(svr_c=1.0, svr_epsilon=0.1, rbf_gamma=0.7, svr_tol=1e-8)
    m = regress.fit_svr(x, y, h, "rbf")
    K = regress.rbf_kernel(x, x, 0.7)
    assert abs(m.diagnostics["dual_objective"] - dual_oracle_grid(K, y, 1.0, 0.1)[0]) < 1e-3


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from(["linear", "rbf"]), st.floats(0.1, 10.0))
def test_svr_dual_feasibility(seed, kernel, c):
    r = np.random.default_rng(seed)
    x = r.normal(size=(25, 3))
    y = x[:, 0] - x[:, 1] ** 2 + 0.2 * r.normal(size=25)
    m = regress.fit_svr(x, y, Hyperparams(svr_c=c), kernel)
    delta = m.state["delta"]
    assert abs(delta.sum()) < 1e-6
    assert np.all(np.abs(delta) <= c + 1e-9)
    assert m.diagnostics["converged"]
    assert np.all(np.isfinite(regress.predict(m, x)))


def test_svr_linear_coef_matches_dual_expansion(rng):
    x = rng.normal(size=(20, 3))
    y = x @ np.array([1.0, -2.0, 0.5])
    m = regress.fit_svr(x, y, Hyperparams(svr_c=10.0), "linear")
    np.testing.assert_allclose(m.coef, x.T @ m.state["delta"])
    assert r2(regress.predict(m, x), y) > 0.99


def test_svr_iteration_cap_reports_nonconvergence(rng):
    x, y = rng.normal(size=(30, 2)), rng.normal(size=30)
    m = regress.fit_svr(x, y, Hyperparams(svr_max_iter=2), "rbf")
    assert m.diagnostics["converged"] is False


# -- trees -------------------------------------------------------------------------

def test_tree_depth_zero_predicts_mean(rng):
    x, y = rng.normal(size=(20, 3)), rng.normal(size=20)
    m = regress.fit_tree(x, y, Hyperparams(tree_max_depth=0))
    np.testing.assert_allclose(regress.predict(m, x), y.mean())


def test_tree_step_function_depth_one(rng):
    x = rng.uniform(size=(60, 3))
    y = np.where(x[:, 0] > 0.5, 2.0, -1.0)
    m = regress.fit_tree(x, y, Hyperparams(tree_max_depth=1))
    sse, f, t = exhaustive_stump(x, y)
    assert m.state["feature"][0] == f == 0
    below = x[:, 0][x[:, 0] <= 0.5].max()
    above = x[:, 0][x[:, 0] > 0.5].min()
    assert below < m.state["threshold"][0] < above
    assert m.state["threshold"][0] == pytest.approx(t)
    np.testing.assert_array_equal(regress.predict(m, x), y)


def test_tree_stump_matches_exhaustive_oracle(rng):
    x = rng.normal(size=(40, 4))
    y = np.sin(x[:, 2]) + 0.1 * rng.normal(size=40)
    m = regress.fit_tree(x, y, Hyperparams(tree_max_depth=1))
    sse, f, t = exhaustive_stump(x, y)
    assert m.state["feature"][0] == f
    assert m.state["threshold"][0] == pytest.approx(t)


def test_tree_pure_target_no_split(rng):
    m = regress.fit_tree(rng.normal(size=(10, 2)), np.full(10, 4.0))
    assert m.state["feature"].tolist() == [-1]


def test_tree_unrestricted_interpolates(rng):
    x, y = rng.normal(size=(50, 3)), rng.normal(size=50)
    m = regress.fit_tree(x, y)
    np.testing.assert_allclose(regress.predict(m, x), y)


def test_tree_min_leaf(rng):
    x, y = rng.normal(size=(40, 2)), rng.normal(size=40)
    m = regress.fit_tree(x, y, Hyperparams(tree_min_leaf=5))
    leaves = m.state["feature"] == -1
    assert m.state["n_samples"][leaves].min() >= 5


def test_forest_degenerate_equals_tree(rng):
    x, y = rng.normal(size=(40, 4)), rng.normal(size=40)
    h = Hyperparams(forest_n_trees=1, forest_bootstrap=False, forest_max_features=4,
                    tree_max_depth=4)
    q = rng.normal(size=(15, 4))
    np.testing.assert_array_equal(
        regress.predict(regress.fit_forest(x, y, h), q),
        regress.predict(regress.fit_tree(x, y, h), q),
    )


def test_forest_deterministic_and_mean_of_trees(rng):
    x, y = rng.normal(size=(60, 6)), rng.normal(size=60)
    h = Hyperparams(forest_n_trees=7, forest_seed=3)
    a, b = regress.fit_forest(x, y, h), regress.fit_forest(x, y, h)
    q = rng.normal(size=(10, 6))
    np.testing.assert_array_equal(regress.predict(a, q), regress.predict(b, q))
    per_tree = regress.per_tree_predictions(a, q)
    hand = np.array([sum(per_tree[t, i] for t in range(7)) / 7 for i in range(10)])
    np.testing.assert_allclose(regress.predict(a, q), hand, rtol=0, atol=1e-12)


def test_forest_feature_subsampling_default():
    x = np.random.default_rng(0).normal(size=(30, 28))
    m = regress.fit_forest(x, x[:, 0], Hyperparams(forest_n_trees=2))
    assert m.state["max_features"] == 5


def test_forest_reduces_variance_across_seeds():
    r = np.random.default_rng(4)
    x = r.normal(size=(120, 5))
    y = np.sin(2 * x[:, 0]) + x[:, 1] + 0.5 * r.normal(size=120)
    q = r.normal(size=(40, 5))

    def spread(n_trees):
        preds = [regress.predict(regress.fit_forest(
            x, y, Hyperparams(forest_n_trees=n_trees, forest_seed=s)), q) for s in range(8)]
        return np.mean(np.var(np.array(preds), axis=0))

    assert spread(30) < 0.5 * spread(1)


def test_importances_normalised(rng):
    x = rng.normal(size=(60, 4))
    y = 3 * x[:, 1] + 0.1 * rng.normal(size=60)
    imp = regress.importances(regress.fit_tree(x, y, Hyperparams(tree_max_depth=3)))
    assert imp.sum() == pytest.approx(1.0)
    assert np.argmax(imp) == 1


# -- predict / tuning / serialization ----------------------------------------------------

def test_predict_shape_error(rng):
    m = regress.fit_ols(rng.normal(size=(10, 3)), rng.normal(size=10))
    with pytest.raises(ShapeError):
        regress.predict(m, np.ones((2, 4)))


def test_all_kinds_finite_predictions(standardized_991):
    d = standardized_991.take(np.arange(150))
    for kind in regress.KINDS:
        h = Hyperparams(forest_n_trees=5)
        m = regress.fit(kind, d.x, d.y, h)
        assert np.all(np.isfinite(regress.predict(m, d.x))), kind
        if kind in regress.LINEAR_KINDS:
            assert m.coef.shape == (28,)


def test_tune_knn_single_candidate(rng):
    h = regress.tune_knn(rng.normal(size=(20, 2)), rng.normal(size=20), [7])
    assert h.knn_k == 7


def test_tune_knn_default_centered_on_sqrt_features():
    assert round(np.sqrt(28)) == 5
    assert 5 in regress.DEFAULT_KNN_CANDIDATES


def test_tune_knn_picks_lower_validation_mae(rng):
    x = rng.uniform(-2, 2, size=(80, 1))
    y = np.sin(x[:, 0])
    n_train = 80 - round(80 * 0.2)
    h = regress.tune_knn(x, y, [1, n_train], split_seed=3)
    scores = regress.validation_scores("knn", x, y, "knn_k", [1, n_train], split_seed=3)
    assert scores[h.knn_k] <= min(scores.values())
    assert h.knn_k == 1


def test_tune_alpha_single_and_minimum(rng):
    x = rng.normal(size=(60, 5))
    y = rng.normal(size=60)
    assert regress.tune_alpha(x, y, "ridge", [0.3]).alpha == 0.3
    alphas = [1e-3, 1e-1, 10.0, 1e3]
    for kind in ("ridge", "lasso"):
        h = regress.tune_alpha(x, y, kind, alphas, split_seed=1)
        scores = regress.validation_scores(kind, x, y, "alpha", alphas, split_seed=1)
        assert scores[h.alpha] == min(scores.values())


def test_ridge_alpha_zero_validation_equals_ols(rng):
    x, y = rng.normal(size=(50, 4)), rng.normal(size=50)
    ridge = regress.validation_scores("ridge", x, y, "alpha", [0.0], split_seed=2)[0.0]
    ols = regress.validation_scores("ols", x, y, "alpha", [0.0], split_seed=2)[0.0]
    assert ridge == pytest.approx(ols, abs=1e-10)


@pytest.mark.parametrize("kind", regress.KINDS)
def test_modelfit_json_roundtrip(kind, rng):
    x, y = rng.normal(size=(30, 3)), rng.normal(size=30)
    m = regress.fit(kind, x, y, Hyperparams(forest_n_trees=3, knn_k=3))
    doc = json.loads(m.to_json())
    assert doc["version"] == 1 and doc["kind"] == kind
    back = ModelFit.from_json(m.to_json())
    q = rng.normal(size=(6, 3))
    np.testing.assert_array_equal(regress.predict(back, q), regress.predict(m, q))


def test_modelfit_rejects_unknown_version(rng):
    m = regress.fit_ols(rng.normal(size=(5, 2)), rng.normal(size=5))
    doc = m.to_dict()
    doc["version"] = 99
    with pytest.raises(ValueError):
        ModelFit.from_dict(doc)


def test_synthetic_signal_recoverable_by_forest():
    d, _ = standardize(generate_synthetic(991, 7))
    sub = d.select_features(SIGNAL_FEATURES)
    sp = train_test_split(sub, 0.2, 0)
    m = regress.fit_forest(sp.train.x, sp.train.y, Hyperparams(forest_n_trees=30))
    assert r2(regress.predict(m, sp.test.x), sp.test.y) > 0.5
