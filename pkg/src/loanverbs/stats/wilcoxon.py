"""Wilcoxon signed-rank test with an exact null distribution for small n."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

EXACT_MAX_N = 25


class AllZeroDifferences(ValueError):
    pass


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # min(W+, W-)
    pvalue: float
    n: int
    w_plus: float
    method: str


def signed_ranks(differences) -> np.ndarray:
    """Average ranks of |d| carrying the sign of d; zero differences dropped."""
    d = np.asarray(differences, dtype=float)
    d = d[d != 0]
    if d.size == 0:
        raise AllZeroDifferences("every paired difference is zero")
    return np.sign(d) * rankdata(np.abs(d))


def exact_null_counts(ranks) -> np.ndarray:
    """Number of sign assignments giving each doubled W+ value 0..2*sum(ranks).

    Average ranks are multiples of 1/2, so doubling makes the subset-sum
    table integral.
    """
    doubled = np.rint(2 * np.asarray(ranks, dtype=float)).astype(np.int64)
    counts = np.zeros(int(doubled.sum()) + 1, dtype=np.int64)
    counts[0] = 1
    top = 0
    for r in doubled:
        counts[r:top + r + 1] += counts[:top + 1].copy()
        top += r
    return counts


def wilcoxon_signed_rank(x, y=None, method: str = "auto") -> WilcoxonResult:
    """Two-sided paired test of ``x - y`` (or of ``x`` alone as differences).

    ``method`` is ``"exact"``, ``"normal"`` or ``"auto"`` (exact for n <= 25).
    The normal approximation uses the tie-corrected variance and a 0.5
    continuity correction.
    """
    d = np.asarray(x, dtype=float) if y is None else np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    sr = signed_ranks(d)
    n = sr.size
    ranks = np.abs(sr)
    w_plus = float(sr[sr > 0].sum())
    total = float(ranks.sum())
    stat = min(w_plus, total - w_plus)
    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "normal"
    if method == "exact":
        counts = exact_null_counts(ranks)
        k = int(round(2 * w_plus))
        n_total = float(counts.sum())
        lower = counts[: k + 1].sum() / n_total
        upper = counts[k:].sum() / n_total
        p = min(1.0, 2.0 * min(lower, upper))
    elif method == "normal":
        mean = n * (n + 1) / 4.0
        _, tie_sizes = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - ((tie_sizes ** 3 - tie_sizes).sum()) / 48.0
        dev = w_plus - mean
        if var <= 0:
            p = 1.0
        else:
            z = (abs(dev) - 0.5) / np.sqrt(var) if abs(dev) >= 0.5 else 0.0
            p = float(min(1.0, 2.0 * ndtr(-z)))
    else:
        raise ValueError(f"unknown method {method!r}")
    return WilcoxonResult(stat, float(p), n, w_plus, method)


def bonferroni(p: float, m: int) -> float:
    if m < 1:
        raise ValueError("family size must be >= 1")
    return min(1.0, p * m)
