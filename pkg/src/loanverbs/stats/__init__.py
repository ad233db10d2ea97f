"""Integration rates, paired domain tests and fixed-effects ridge logistic regression."""
from .design import EncodedDesign, MissingProfile, RegressionSpec, encode_design, regression_sample
from .rates import (
    ComparisonReport, DisjointVocabulary, RateRow, RateTable, UndefinedRate,
    compare_domains, integration_rate, pooled_rate, top_k_rate_table,
)
from .regression import (
    DEFAULT_GRID, Design, Nonconvergence, RegressionResult,
    fit_ridge_logistic, grid_search_l2, summarize,
)
from .wilcoxon import AllZeroDifferences, WilcoxonResult, bonferroni, wilcoxon_signed_rank

__all__ = [
    "EncodedDesign", "MissingProfile", "RegressionSpec", "encode_design", "regression_sample",
    "ComparisonReport", "DisjointVocabulary", "RateRow", "RateTable", "UndefinedRate",
    "compare_domains", "integration_rate", "pooled_rate", "top_k_rate_table",
    "DEFAULT_GRID", "Design", "Nonconvergence", "RegressionResult", "fit_ridge_logistic", "grid_search_l2",
    "summarize", "AllZeroDifferences", "WilcoxonResult", "bonferroni", "wilcoxon_signed_rank",
]
