import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from loanverbs.stats.rates import (
    DisjointVocabulary, RateRow, UndefinedRate, compare_domains, integration_rate, pooled_rate, top_k_rate_table,
)
from loanverbs.stats.wilcoxon import AllZeroDifferences, bonferroni, signed_ranks, wilcoxon_signed_rank
from oracles import wilcoxon_enumeration


@pytest.mark.parametrize("i,l,rate", [(3, 1, 0.75), (7, 0, 1.0), (1, 0, 1.0), (0, 4, 0.0)])
def test_integration_rate(i, l, rate):
    assert integration_rate(i, l) == rate


def test_undefined_rate():
    with pytest.raises(UndefinedRate):
        integration_rate(0, 0)


def test_negative_counts():
    with pytest.raises(ValueError):
        integration_rate(-1, 2)


@given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)).filter(sum), min_size=1, max_size=10))
def test_pooled_rate_between_groups(counts):
    rows = [RateRow(str(k), "loanword", i, l) for k, (i, l) in enumerate(counts)]
    rates = [r.rate for r in rows]
    assert 0.0 <= pooled_rate(rows) <= 1.0
    assert min(rates) - 1e-12 <= pooled_rate(rows) <= max(rates) + 1e-12


def test_top_k_fewer_entries():
    summary = {("a", "loanword"): (1, 1), ("b", "loanword"): (2, 0), ("c", "native"): (5, 5), ("d", "loanword"): (0, 1)}
    table = top_k_rate_table(summary, k=50)
    assert table.bases() == ["a", "b", "d"]


def test_top_k_tie_alphabetical():
    summary = {("box", "loanword"): (2, 1), ("ban", "loanword"): (1, 2), ("zap", "loanword"): (9, 0)}
    assert top_k_rate_table(summary, k=2).bases() == ["zap", "ban"]


def test_zero_total_flagged_not_zero():
    table = top_k_rate_table({("x", "loanword"): (0, 0)})
    assert table.rows[0].rate is None
    assert table.to_tsv().splitlines()[1].endswith("\tNA")


def test_top_k_fixture_order(fixtures_dir, manifest, matcher):
    from loanverbs.ingest import PostReader
    from loanverbs.matcher import scan_corpus
    summary = matcher.empty_summary()
    list(scan_corpus(PostReader(fixtures_dir / "corpus.jsonl"), matcher, summary))
    table = top_k_rate_table(summary.counts, k=len(manifest["top_k_order"]))
    assert table.bases() == manifest["top_k_order"]


@pytest.mark.parametrize("p,m,out", [(0.01, 4, 0.04), (0.5, 4, 1.0), (0.3, 1, 0.3)])
def test_bonferroni(p, m, out):
    assert bonferroni(p, m) == pytest.approx(out)


def test_bonferroni_family_size():
    with pytest.raises(ValueError):
        bonferroni(0.1, 0)


@pytest.mark.parametrize("d,p", [([1, 2, 3, 4, 5], 2 / 32), ([-1, -2, -3, -4, -5], 2 / 32), ([0.3], 1.0)])
def test_wilcoxon_examples(d, p):
    assert wilcoxon_signed_rank(d).pvalue == pytest.approx(p, abs=1e-15)


def test_wilcoxon_all_zero():
    with pytest.raises(AllZeroDifferences):
        wilcoxon_signed_rank([1, 2], [1, 2])


def test_zero_differences_dropped_and_ties_averaged():
    sr = signed_ranks([0, 1, -1, 2])
    assert list(sr) == [1.5, -1.5, 3.0]


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=10).filter(any))
def test_exact_matches_enumeration(d):
    assert wilcoxon_signed_rank(d, method="exact").pvalue == pytest.approx(wilcoxon_enumeration(d), abs=1e-12)


def test_normal_close_to_exact_n25():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        d = rng.normal(0.3, 1.0, 25)
        worst = max(worst, abs(wilcoxon_signed_rank(d, method="exact").pvalue
                               - wilcoxon_signed_rank(d, method="normal").pvalue))
    assert worst < 0.02


def test_unknown_method():
    with pytest.raises(ValueError):
        wilcoxon_signed_rank([1.0], method="magic")


def _domain_summaries(fixtures_dir):
    m = json.loads((fixtures_dir / "domains.json").read_text(encoding="utf-8"))
    return [{(w, "loanword"): tuple(c) for w, c in m["counts"][k].items()} for k in ("A", "B")]


def test_compare_planted_domains(fixtures_dir):
    a, b = _domain_summaries(fixtures_dir)
    report = compare_domains(a, b, family_size=2)
    assert len(report.words) == 30
    exact_a = sum(Fraction(*a[(w, "loanword")][:1], sum(a[(w, "loanword")])) for w in report.words) / 30
    assert exact_a == Fraction(91, 100)
    assert report.mean_a == pytest.approx(0.91, abs=1e-3)
    assert report.mean_b == pytest.approx(0.82, abs=1e-3)
    assert report.pvalue < 0.01 and report.adjusted_pvalue == min(1.0, 2 * report.pvalue)


def test_compare_identical_has_no_test(fixtures_dir):
    a, _ = _domain_summaries(fixtures_dir)
    report = compare_domains(a, a)
    assert report.test is None
    assert all(x == y for x, y in zip(report.rates_a, report.rates_b))
    assert "no test" in report.to_tsv()


def test_compare_disjoint():
    with pytest.raises(DisjointVocabulary):
        compare_domains({("a", "loanword"): (1, 0)}, {("b", "loanword"): (1, 0)})
