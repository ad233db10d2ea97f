"""Integration rates and cross-domain comparisons."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Tuple

from .wilcoxon import AllZeroDifferences, WilcoxonResult, bonferroni, wilcoxon_signed_rank

Summary = Mapping[Tuple[str, str], Tuple[int, int]]


class UndefinedRate(ZeroDivisionError):
    pass


class DisjointVocabulary(ValueError):
    pass


def integration_rate(integrated_count: int, light_count: int) -> float:
    """Share of integrated uses among all uses of one word base."""
    if integrated_count < 0 or light_count < 0:
        raise ValueError("counts must be non-negative")
    total = integrated_count + light_count
    if total == 0:
        raise UndefinedRate("no integrated or light uses")
    return integrated_count / total


@dataclass(frozen=True)
class RateRow:
    base: str
    word_class: str
    integrated_count: int
    light_count: int

    @property
    def total(self) -> int:
        return self.integrated_count + self.light_count

    @property
    def rate(self) -> Optional[float]:
        return None if self.total == 0 else integration_rate(self.integrated_count, self.light_count)


@dataclass
class RateTable:
    rows: List[RateRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def bases(self) -> List[str]:
        return [r.base for r in self.rows]

    def to_tsv(self) -> str:
        out = ["base\tclass\tintegrated_count\tlight_count\tI_w"]
        for r in self.rows:
            rate = "NA" if r.rate is None else f"{r.rate:.6f}"
            out.append(f"{r.base}\t{r.word_class}\t{r.integrated_count}\t{r.light_count}\t{rate}")
        return "\n".join(out) + "\n"


def top_k_rate_table(summary: Summary, k: int = 50, word_class: str = "loanword") -> RateTable:
    """Rows for the ``k`` most frequent pairs of ``word_class``; ties go alphabetically."""
    rows = [RateRow(base, cls, int(i), int(l)) for (base, cls), (i, l) in summary.items() if cls == word_class]
    rows.sort(key=lambda r: (-r.total, r.base))
    return RateTable(rows[:k])


@dataclass
class ComparisonReport:
    words: List[str]
    rates_a: List[float]
    rates_b: List[float]
    mean_a: float
    mean_b: float
    test: Optional[WilcoxonResult]
    family_size: int = 1
    names: Tuple[str, str] = ("A", "B")

    @property
    def pvalue(self) -> Optional[float]:
        return None if self.test is None else self.test.pvalue

    @property
    def adjusted_pvalue(self) -> Optional[float]:
        return None if self.test is None else bonferroni(self.test.pvalue, self.family_size)

    def to_tsv(self) -> str:
        a, b = self.names
        out = [f"word\tI_w_{a}\tI_w_{b}\tdelta_I_w"]
        rows = sorted(zip(self.words, self.rates_a, self.rates_b), key=lambda t: (t[1] - t[2], t[0]))
        for w, ra, rb in rows:
            out.append(f"{w}\t{ra:.3f}\t{rb:.3f}\t{ra - rb:.3f}")
        out.append(f"# mean\t{self.mean_a:.6f}\t{self.mean_b:.6f}\t{self.mean_a - self.mean_b:.6f}")
        if self.test is None:
            out.append("# wilcoxon\tno test (all differences zero)")
        else:
            out.append(f"# wilcoxon\tW={self.test.statistic:g}\tp={self.test.pvalue:.6g}\t"
                       f"p_bonferroni={self.adjusted_pvalue:.6g}\tm={self.family_size}\tn={self.test.n}")
        return "\n".join(out) + "\n"


def compare_domains(summary_a: Summary, summary_b: Summary, k: int = 50, word_class: str = "loanword",
                    family_size: int = 1, names: Tuple[str, str] = ("A", "B")) -> ComparisonReport:
    """Paired per-word rates for the top-``k`` words of domain A, looked up in B."""
    top = top_k_rate_table(summary_a, k, word_class)
    words, ra, rb = [], [], []
    for row in top.rows:
        i_b, l_b = summary_b.get((row.base, word_class), (0, 0))
        if row.total == 0 or i_b + l_b == 0:
            continue
        words.append(row.base)
        ra.append(row.rate)
        rb.append(integration_rate(i_b, l_b))
    if not words:
        raise DisjointVocabulary("no word has uses in both domains")
    try:
        test = wilcoxon_signed_rank(ra, rb)
    except AllZeroDifferences:
        test = None
    return ComparisonReport(words, ra, rb, sum(ra) / len(ra), sum(rb) / len(rb), test, family_size, names)


def pooled_rate(rows: List[RateRow]) -> float:
    return integration_rate(sum(r.integrated_count for r in rows), sum(r.light_count for r in rows))
