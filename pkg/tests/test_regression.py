import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq
from scipy.special import expit

from loanverbs.stats.regression import (
    DEFAULT_GRID, Design, Nonconvergence, fit_ridge_logistic, gradient, grid_search_l2, log_likelihood,
    null_loglik, objective, stratified_split, summarize,
)
from oracles import central_difference, gradient_ascent_logistic

TRUE_BETA = np.array([0.5, -1.0, 2.0])


def _synthetic(n, beta=TRUE_BETA, seed=0):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=(n, len(beta) - 1))])
    y = (rng.random(n) < expit(X @ beta)).astype(float)
    return X, y


def _grouped(n=400, groups=12, seed=1):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=n), rng.integers(0, 2, n)])
    g = rng.integers(0, groups, n)
    eta = X @ np.array([0.2, 0.8, -0.5]) + rng.normal(0, 0.5, groups)[g]
    y = (rng.random(n) < expit(eta)).astype(float)
    d = Design(X, ["intercept", "x", "b"], np.array([False, True, True]), 0, None, g,
               [f"g{k}" for k in range(groups)])
    return d, y


def test_gradient_matches_finite_differences():
    d, y = _grouped()
    q = d.X.shape[1]
    rng = np.random.default_rng(5)
    for _ in range(10):
        theta = rng.normal(0, 0.5, q + d.n_groups)
        f = lambda t: objective(d, y, 0.7, t[:q], t[q:])
        num = central_difference(f, theta)
        gb, gg = gradient(d, y, 0.7, theta[:q], theta[q:])
        ana = np.concatenate([gb, gg])
        assert np.linalg.norm(ana - num) / np.linalg.norm(num) < 1e-6


def test_intercept_only_all_ones():
    n, lam = 20, 1.0
    d = Design(np.ones((n, 1)), ["intercept"], np.array([True]), 0)
    fit = fit_ridge_logistic(d, np.ones(n), lam)
    root = brentq(lambda b: expit(b) * n - n + 2 * lam * b, 0.0, 50.0)
    assert fit.beta[0] == pytest.approx(root, abs=1e-9)
    assert 0 < fit.beta[0] < np.inf


def test_constant_outcome_with_free_intercept_rejected():
    with pytest.raises(ValueError):
        fit_ridge_logistic(Design.from_matrix(np.ones((5, 1))), np.ones(5), 1.0)


def test_negative_lambda_rejected():
    X, y = _synthetic(50)
    with pytest.raises(ValueError):
        fit_ridge_logistic(Design.from_matrix(X), y, -1.0)


def test_symmetric_slope_vanishes():
    # balanced outcome, predictor mirrored across classes: slope exactly 0 at the optimum
    y = np.repeat([0.0, 1.0], 2000)
    x = np.tile([-2.0, -1.0, 1.0, 2.0], 1000)
    fit = fit_ridge_logistic(Design.from_matrix(np.column_stack([np.ones(4000), x])), y, 1e-6)
    assert abs(fit.beta[1]) < 1e-6


def test_recovery_and_oracle():
    X, y = _synthetic(10_000)
    fit = fit_ridge_logistic(Design.from_matrix(X), y, 1e-6)
    assert np.all(np.abs(fit.beta - TRUE_BETA) < 0.1)
    oracle = gradient_ascent_logistic(X, y, 1e-6, [0, 1, 1])
    assert np.allclose(fit.beta, oracle, atol=1e-5)


def test_matches_oracle_with_penalty():
    X, y = _synthetic(2000, seed=4)
    fit = fit_ridge_logistic(Design.from_matrix(X), y, 5.0)
    assert np.allclose(fit.beta, gradient_ascent_logistic(X, y, 5.0, [0, 1, 1]), atol=1e-5)


def test_group_block_equals_dense_dummies():
    d, y = _grouped()
    fit = fit_ridge_logistic(d, y, 0.5)
    dense_X = np.column_stack([d.X, np.eye(d.n_groups)[d.groups]])
    pen = np.concatenate([d.penalized, np.ones(d.n_groups, dtype=bool)])
    dense = fit_ridge_logistic(Design(dense_X, [str(i) for i in range(dense_X.shape[1])], pen, 0), y, 0.5)
    assert np.allclose(np.concatenate([fit.beta, fit.gamma]), dense.beta, atol=1e-8)
    assert np.allclose(np.concatenate([fit.se, fit.se_gamma]), dense.se, atol=1e-8)
    assert fit.edf == pytest.approx(dense.edf, abs=1e-8)


def test_standard_errors_from_penalized_information():
    X, y = _synthetic(500, seed=9)
    lam = 2.0
    fit = fit_ridge_logistic(Design.from_matrix(X), y, lam)
    p = expit(X @ fit.beta)
    H = X.T @ (X * (p * (1 - p))[:, None]) + np.diag([0, 2 * lam, 2 * lam])
    cov = np.linalg.inv(H)
    assert np.allclose(fit.se, np.sqrt(np.diag(cov)), rtol=1e-8)
    unpen = X.T @ (X * (p * (1 - p))[:, None])
    assert fit.edf == pytest.approx(np.trace(unpen @ cov), rel=1e-9)


def test_gradient_tolerance_reached():
    d, y = _grouped()
    fit = fit_ridge_logistic(d, y, 1e-3)
    assert fit.grad_norm < 1e-8


def test_nonconvergence_reported():
    X, y = _synthetic(500)
    with pytest.raises(Nonconvergence):
        fit_ridge_logistic(Design.from_matrix(X), y, 1e-3, max_iter=1)


def test_norm_monotone_over_default_grid():
    d, y = _grouped()
    norms = []
    for lam in DEFAULT_GRID:
        f = fit_ridge_logistic(d, y, lam)
        norms.append(np.sqrt(np.sum(f.beta[1:] ** 2) + np.sum(f.gamma ** 2)))
    assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 1e2), st.floats(1e-3, 1e2))
def test_norm_monotone_property(seed, l1, l2):
    l1, l2 = sorted((l1, l2))
    X, y = _synthetic(200, seed=seed)
    d = Design.from_matrix(X)
    b1, b2 = fit_ridge_logistic(d, y, l1).beta, fit_ridge_logistic(d, y, l2).beta
    assert np.linalg.norm(b1[1:]) >= np.linalg.norm(b2[1:]) - 1e-9


def test_grid_of_one_equals_single_fit():
    X, y = _synthetic(1000)
    d = Design.from_matrix(X)
    res = grid_search_l2(d, y, [0.1], seed=3)
    fit = fit_ridge_logistic(d, y, 0.1)
    assert [c.beta for c in res.coefficients] == list(fit.beta)
    assert res.l2_weight == 0.1


def test_grid_prefers_small_weight_on_informative_data():
    X, y = _synthetic(2000, seed=2)
    d = Design.from_matrix(X)
    res = grid_search_l2(d, y, [1e6, 1e-6], seed=0)
    assert res.l2_weight == 1e-6
    train, test = stratified_split(y, 0.1, 0)
    small = gradient_ascent_logistic(X[train], y[train], 1e-6, [0, 1, 1])
    # at 1e6 the slopes are pinned near 0 and the intercept is the training log-odds
    m = y[train].mean()
    big = np.array([np.log(m / (1 - m)), 0.0, 0.0])
    oracle = {1e-6: log_likelihood(y[test], X[test] @ small), 1e6: log_likelihood(y[test], X[test] @ big)}
    for lam, ll, _ in res.grid:
        assert ll == pytest.approx(oracle[lam], abs=0.05)


def test_grid_search_deterministic():
    d, y = _grouped()
    a = grid_search_l2(d, y, DEFAULT_GRID, seed=11).to_json()
    b = grid_search_l2(d, y, DEFAULT_GRID, seed=11).to_json()
    assert a == b


def test_stratified_split():
    y = np.array([0] * 30 + [1] * 70)
    train, test = stratified_split(y, 0.1, 4)
    assert len(test) == 10 and y[test].sum() == 7
    assert set(train) | set(test) == set(range(100)) and not set(train) & set(test)
    again = stratified_split(y, 0.1, 4)
    assert np.array_equal(test, again[1])


def test_lr_statistic_invariant_to_affine_rescale():
    X, y = _synthetic(800, seed=6)
    d1 = Design.from_matrix(X)
    X2 = X.copy()
    X2[:, 1] = 3.5 * X2[:, 1] - 7.0
    d2 = Design.from_matrix(X2)
    r1 = summarize(d1, y, fit_ridge_logistic(d1, y, 0.0))
    r2 = summarize(d2, y, fit_ridge_logistic(d2, y, 0.0))
    assert r1.lr_statistic == pytest.approx(r2.lr_statistic, rel=1e-9)
    assert r1.lr_statistic >= 0


def test_null_loglik():
    y = np.array([1, 1, 0, 0], dtype=float)
    assert null_loglik(y) == pytest.approx(4 * np.log(0.5))
    assert null_loglik(np.ones(3)) == 0.0


def test_summary_fields():
    d, y = _grouped()
    res = summarize(d, y, fit_ridge_logistic(d, y, 1.0))
    assert res.family_size == 3
    for c in res.coefficients + res.group_coefficients:
        assert 0.0 <= c.pvalue <= c.pvalue_adjusted <= 1.0
    assert 0.0 <= res.lr_pvalue <= 1.0
    assert 1.0 <= res.lr_df <= d.n_params - 1
    data = json.loads(res.to_json())
    assert data["n"] == d.n
    tsv = res.to_tsv({"x": "X"}).splitlines()
    assert tsv[0] == "variable\tbeta\tse\tsignificant"
    assert tsv[2].startswith("X\t") and tsv[-3].startswith("sample_size\t400")
