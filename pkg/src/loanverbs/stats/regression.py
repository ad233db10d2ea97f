"""Ridge-penalized logistic regression with an absorbed one-hot fixed-effect block.

The objective maximized is the Bernoulli log-likelihood minus
``lam * sum(beta_j ** 2)`` over penalized coefficients. Dense columns carry
their own penalty mask (the intercept is normally exempt); one-hot group
columns (e.g. one per author) are always penalized and never materialized:
their block of the Hessian is diagonal, so Newton steps go through the Schur
complement of that block and cost O(n q^2 + q^3) for q dense columns.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import linalg, sparse
from scipy.special import expit, ndtr
from scipy.stats import chi2

DEFAULT_GRID = tuple(float(x) for x in np.logspace(-3, 3, 7))
SIGNIFICANCE = 0.01


class Nonconvergence(RuntimeError):
    pass


@dataclass
class Design:
    X: np.ndarray
    names: List[str]
    penalized: np.ndarray
    intercept: Optional[int] = None
    fixed_effect: Optional[np.ndarray] = None
    groups: Optional[np.ndarray] = None
    group_names: List[str] = field(default_factory=list)
    dropped: int = 0

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise ValueError("design matrix must be 2-d")
        self.penalized = np.asarray(self.penalized, dtype=bool)
        if self.fixed_effect is None:
            self.fixed_effect = np.zeros(self.X.shape[1], dtype=bool)
        if self.groups is not None:
            self.groups = np.asarray(self.groups, dtype=np.int64)

    @classmethod
    def from_matrix(cls, X, names=None, intercept: Optional[int] = 0) -> "Design":
        """Plain dense design; every column except ``intercept`` is penalized."""
        X = np.asarray(X, dtype=float)
        q = X.shape[1]
        pen = np.ones(q, dtype=bool)
        if intercept is not None:
            pen[intercept] = False
        return cls(X, list(names or [f"x{j}" for j in range(q)]), pen, intercept)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def n_groups(self) -> int:
        return len(self.group_names) if self.groups is not None else 0

    @property
    def n_params(self) -> int:
        return self.X.shape[1] + self.n_groups

    def subset(self, rows) -> "Design":
        return Design(self.X[rows], self.names, self.penalized, self.intercept, self.fixed_effect,
                      None if self.groups is None else self.groups[rows], self.group_names)

    def indicator(self):
        return sparse.csr_matrix(
            (np.ones(self.n), (np.arange(self.n), self.groups)), shape=(self.n, self.n_groups)
        )


@dataclass
class Fit:
    beta: np.ndarray
    gamma: np.ndarray
    se: np.ndarray
    se_gamma: np.ndarray
    loglik: float
    objective: float
    grad_norm: float
    iterations: int
    l2: float
    edf: float


def linear_predictor(design: Design, beta, gamma=None) -> np.ndarray:
    eta = design.X @ beta
    if design.groups is not None and gamma is not None and len(gamma):
        eta = eta + gamma[design.groups]
    return eta


def log_likelihood(y, eta) -> float:
    y = np.asarray(y, dtype=float)
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def objective(design: Design, y, lam: float, beta, gamma=None) -> float:
    """Penalized log-likelihood (to be maximized)."""
    pen = lam * float(np.sum(beta[design.penalized] ** 2))
    if gamma is not None and len(gamma):
        pen += lam * float(np.sum(gamma ** 2))
    return log_likelihood(y, linear_predictor(design, beta, gamma)) - pen


def gradient(design: Design, y, lam: float, beta, gamma=None):
    """Analytic gradient of :func:`objective` w.r.t. (beta, gamma)."""
    resid = np.asarray(y, dtype=float) - expit(linear_predictor(design, beta, gamma))
    g_beta = design.X.T @ resid - 2.0 * lam * np.where(design.penalized, beta, 0.0)
    if design.groups is None:
        return g_beta, np.zeros(0)
    g_gamma = np.bincount(design.groups, weights=resid, minlength=design.n_groups) - 2.0 * lam * gamma
    return g_beta, g_gamma


class _Hessian:
    """Negated penalized Hessian, factored through the group block."""

    def __init__(self, design: Design, w: np.ndarray, lam: float, Z=None):
        X = design.X
        self.C = X.T @ (w[:, None] * X) + np.diag(2.0 * lam * design.penalized)
        if design.groups is None:
            self.A_inv = np.zeros(0)
            self.B = np.zeros((0, X.shape[1]))
            S = self.C
        else:
            A = np.bincount(design.groups, weights=w, minlength=design.n_groups) + 2.0 * lam
            self.A_inv = 1.0 / A
            Z = design.indicator() if Z is None else Z
            self.B = np.asarray(Z.T @ (w[:, None] * X))
            S = self.C - self.B.T @ (self.A_inv[:, None] * self.B)
        self.S = (S + S.T) / 2.0
        try:
            self._chol = linalg.cho_factor(self.S, check_finite=False)
        except linalg.LinAlgError:
            self._chol = None

    def _solve_S(self, rhs):
        if self._chol is not None:
            return linalg.cho_solve(self._chol, rhs, check_finite=False)
        return np.linalg.lstsq(self.S, rhs, rcond=None)[0]

    def solve(self, g_beta, g_gamma):
        rhs = g_beta - self.B.T @ (self.A_inv * g_gamma) if len(g_gamma) else g_beta
        d_beta = self._solve_S(rhs)
        d_gamma = self.A_inv * (g_gamma - self.B @ d_beta) if len(g_gamma) else g_gamma
        return d_beta, d_gamma

    def covariance_diag(self):
        """Diagonals of the inverse negated Hessian for (beta, gamma)."""
        q = self.S.shape[0]
        S_inv = self._solve_S(np.eye(q))
        var_beta = np.diag(S_inv).copy()
        if not len(self.A_inv):
            return var_beta, np.zeros(0)
        AB = self.A_inv[:, None] * self.B
        var_gamma = self.A_inv + np.einsum("ij,jk,ik->i", AB, S_inv, AB)
        return var_beta, var_gamma


def fit_ridge_logistic(design: Design, y, lam: float, tol: float = 1e-8, max_iter: int = 100,
                       beta0=None) -> Fit:
    """Damped Newton ascent until the gradient norm drops below ``tol``.

    Standard errors come from the inverse penalized observed information.
    Raises :class:`Nonconvergence` if ``max_iter`` is exhausted.
    """
    if lam < 0:
        raise ValueError("l2 weight must be non-negative")
    y = np.asarray(y, dtype=float)
    if y.shape[0] != design.n:
        raise ValueError("outcome length does not match design rows")
    if np.unique(y).size < 2 and design.intercept is not None and not design.penalized[design.intercept]:
        raise ValueError("outcome is constant; the unpenalized intercept has no finite optimum")
    q, G = design.X.shape[1], design.n_groups
    beta = np.zeros(q) if beta0 is None else np.array(beta0, dtype=float)
    gamma = np.zeros(G)
    Z = design.indicator() if G else None
    f = objective(design, y, lam, beta, gamma)
    for it in range(1, max_iter + 1):
        g_beta, g_gamma = gradient(design, y, lam, beta, gamma)
        gnorm = math.sqrt(float(g_beta @ g_beta + g_gamma @ g_gamma))
        if gnorm < tol:
            break
        p = expit(linear_predictor(design, beta, gamma))
        H = _Hessian(design, p * (1.0 - p), lam, Z)
        d_beta, d_gamma = H.solve(g_beta, g_gamma)
        slope = float(g_beta @ d_beta + g_gamma @ d_gamma)
        step = 1.0
        # below the objective's rounding level the quadratic model is exact enough
        precise = slope < 1e-10 * (1.0 + abs(f))
        while True:
            nb, ng = beta + step * d_beta, gamma + step * d_gamma
            nf = objective(design, y, lam, nb, ng)
            if precise or nf >= f + 1e-4 * step * slope or step < 1e-12:
                break
            step *= 0.5
        if nf < f and step < 1e-12:
            break
        beta, gamma, f = nb, ng, max(nf, f) if precise else nf
    else:
        g_beta, g_gamma = gradient(design, y, lam, beta, gamma)
        gnorm = math.sqrt(float(g_beta @ g_beta + g_gamma @ g_gamma))
        if gnorm >= tol:
            raise Nonconvergence(f"gradient norm {gnorm:.3g} after {max_iter} Newton steps")
        it = max_iter
    if gnorm >= tol:
        raise Nonconvergence(f"stalled with gradient norm {gnorm:.3g} after {it} Newton steps")
    p = expit(linear_predictor(design, beta, gamma))
    var_b, var_g = _Hessian(design, p * (1.0 - p), lam, Z).covariance_diag()
    # effective degrees of freedom: trace of H_unpenalized @ H_penalized^-1
    edf = design.n_params - 2.0 * lam * (float(np.sum(var_b[design.penalized])) + float(np.sum(var_g)))
    return Fit(
        beta=beta, gamma=gamma,
        se=np.sqrt(np.maximum(var_b, 0.0)), se_gamma=np.sqrt(np.maximum(var_g, 0.0)),
        loglik=log_likelihood(y, linear_predictor(design, beta, gamma)),
        objective=f, grad_norm=gnorm, iterations=it, l2=lam, edf=edf,
    )


def null_loglik(y, has_intercept: bool = True) -> float:
    """Log-likelihood of the intercept-only model (or of p = 1/2 without one)."""
    y = np.asarray(y, dtype=float)
    n = y.size
    if not has_intercept:
        return n * math.log(0.5)
    m = y.mean()
    if m in (0.0, 1.0):
        return 0.0
    return n * (m * math.log(m) + (1 - m) * math.log(1 - m))


def stratified_split(y, test_fraction: float, seed: int):
    """Seeded holdout of ``test_fraction`` of each outcome class; returns (train, test) indices."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    y = np.asarray(y)
    test = []
    for value in np.unique(y):
        idx = np.flatnonzero(y == value)
        idx = idx[rng.permutation(idx.size)]
        k = int(round(test_fraction * idx.size))
        if idx.size >= 2:
            k = min(max(k, 1), idx.size - 1)
        test.append(idx[:k])
    test_idx = np.sort(np.concatenate(test)) if test else np.zeros(0, dtype=int)
    mask = np.ones(y.size, dtype=bool)
    mask[test_idx] = False
    return np.flatnonzero(mask), test_idx


@dataclass
class Coefficient:
    name: str
    beta: float
    se: float
    pvalue: float
    pvalue_adjusted: float
    fixed_effect: bool = False


@dataclass
class RegressionResult:
    coefficients: List[Coefficient]
    group_coefficients: List[Coefficient]
    l2_weight: float
    train_loglik: float
    test_loglik: float
    loglik: float
    null_loglik: float
    lr_statistic: float
    lr_pvalue: float
    n: int
    lr_df: float = 0.0
    grid: List[List[float]] = field(default_factory=list)
    family_size: int = 1

    def coefficient(self, name: str) -> Coefficient:
        for c in self.coefficients:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)

    def to_tsv(self, labels=None) -> str:
        labels = labels or {}
        rows = ["variable\tbeta\tse\tsignificant"]
        for c in self.coefficients:
            if c.fixed_effect:
                continue
            star = "*" if c.pvalue_adjusted < SIGNIFICANCE else ""
            rows.append(f"{labels.get(c.name, c.name)}\t{c.beta:.3f}\t{c.se:.3f}\t{star}")
        star = "*" if self.lr_pvalue < SIGNIFICANCE else ""
        rows.append(f"sample_size\t{self.n}\t\t")
        rows.append(f"likelihood_ratio\t{self.lr_statistic:.1f}\t\t{star}")
        rows.append(f"l2_weight\t{self.l2_weight:g}\t\t")
        return "\n".join(rows) + "\n"


def wald_pvalues(beta, se) -> np.ndarray:
    beta, se = np.asarray(beta, dtype=float), np.asarray(se, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, np.abs(beta) / se, np.inf)
    return np.clip(2.0 * ndtr(-z), 0.0, 1.0)


def summarize(design: Design, y, fit: Fit, train_ll: float = float("nan"), test_ll: float = float("nan"),
              grid: Sequence[Sequence[float]] = ()) -> RegressionResult:
    y = np.asarray(y, dtype=float)
    pvals = wald_pvalues(fit.beta, fit.se)
    family = int(np.sum(~design.fixed_effect)) or 1
    coefs = [
        Coefficient(name, float(b), float(s), float(p),
                    float(min(1.0, p * family)) if not fe else float(p), bool(fe))
        for name, b, s, p, fe in zip(design.names, fit.beta, fit.se, pvals, design.fixed_effect)
    ]
    gp = wald_pvalues(fit.gamma, fit.se_gamma)
    groups = [Coefficient(name, float(b), float(s), float(p), float(p), True)
              for name, b, s, p in zip(design.group_names, fit.gamma, fit.se_gamma, gp)]
    ll0 = null_loglik(y, design.intercept is not None)
    lr = max(0.0, 2.0 * (fit.loglik - ll0))
    # ridge shrinkage leaves fewer free parameters than columns
    df = max(fit.edf - (1 if design.intercept is not None else 0), 1.0)
    return RegressionResult(
        coefficients=coefs, group_coefficients=groups, l2_weight=fit.l2,
        train_loglik=float(train_ll), test_loglik=float(test_ll), loglik=fit.loglik,
        null_loglik=ll0, lr_statistic=lr, lr_pvalue=float(chi2.sf(lr, df)),
        n=int(y.size), lr_df=float(df), grid=[list(map(float, g)) for g in grid], family_size=family,
    )


def heldout_loglik(design: Design, y, fit: Fit) -> float:
    return log_likelihood(y, linear_predictor(design, fit.beta, fit.gamma))


def grid_search_l2(design: Design, y, grid: Sequence[float] = DEFAULT_GRID, test_fraction: float = 0.1,
                   seed: int = 0) -> RegressionResult:
    """Pick the l2 weight maximizing held-out likelihood, then refit on all rows.

    Ties in held-out likelihood go to the smaller weight.
    """
    if not len(grid):
        raise ValueError("l2 grid is empty")
    y = np.asarray(y, dtype=float)
    train, test = stratified_split(y, test_fraction, seed)
    d_train, d_test = design.subset(train), design.subset(test)
    scores = []
    best = None
    for lam in sorted(float(g) for g in grid):
        f = fit_ridge_logistic(d_train, y[train], lam)
        ll = heldout_loglik(d_test, y[test], f)
        scores.append((lam, ll, f.loglik))
        if best is None or ll > best[1]:
            best = (lam, ll, f.loglik)
    lam, test_ll, train_ll = best
    final = fit_ridge_logistic(design, y, lam)
    return summarize(design, y, final, train_ll, test_ll, scores)
