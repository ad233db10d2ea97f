"""Tokenization and integrated / light-verb occurrence detection."""
from __future__ import annotations

import json
import re
import unicodedata
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .ingest import Post, parse_line
from .lexicon import CLITICS

WORD, HASHTAG, MENTION, URL, OTHER = "word", "hashtag", "mention", "url", "other"
INTEGRATED, LIGHT = "integrated", "light"

_TOKEN_RE = re.compile(
    r"(?P<url>https?://\S+|www\.\S+)"
    r"|(?P<mention>@\w+)"
    r"|(?P<hashtag>\#\w+)"
    r"|(?P<word>[^\W_]+(?:[-'’][^\W_]+)*)"
    r"|(?P<other>[^\w\s]+|_+)",
    re.UNICODE,
)


class RetweetRejected(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    surface: str
    char_span: Tuple[int, int]
    kind: str


@dataclass(frozen=True)
class MatchRecord:
    post_id: str
    author_id: str
    base: str
    word_class: str
    variant: str
    char_span: Tuple[int, int]
    matched_surface: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["char_span"] = list(self.char_span)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MatchRecord":
        return cls(d["post_id"], d["author_id"], d["base"], d["word_class"], d["variant"],
                   tuple(d["char_span"]), d["matched_surface"])


def fold(text: str) -> str:
    """Strip combining diacritics (``tuiteó`` -> ``tuiteo``)."""
    decomposed = unicodedata.normalize("NFD", text)
    return unicodedata.normalize("NFC", "".join(c for c in decomposed if not unicodedata.combining(c)))


def tokenize(text: str) -> List[Token]:
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        tokens.append(Token(m.group().lower(), m.span(), kind))
    return tokens


@dataclass
class CorpusSummary:
    counts: Dict[Tuple[str, str], List[int]] = field(default_factory=dict)
    posts: int = 0
    retweets: int = 0
    malformed: int = 0

    def add(self, rec: MatchRecord) -> None:
        slot = self.counts.setdefault((rec.base, rec.word_class), [0, 0])
        slot[0 if rec.variant == INTEGRATED else 1] += 1

    def totals(self) -> Dict[str, int]:
        return {
            INTEGRATED: sum(c[0] for c in self.counts.values()),
            LIGHT: sum(c[1] for c in self.counts.values()),
        }

    def to_tsv(self) -> str:
        lines = ["base\tclass\tintegrated_count\tlight_count"]
        for (base, cls), (i, l) in sorted(self.counts.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            lines.append(f"{base}\t{cls}\t{i}\t{l}")
        return "\n".join(lines) + "\n"


def read_summary_tsv(handle) -> Dict[Tuple[str, str], Tuple[int, int]]:
    out = {}
    for n, line in enumerate(handle):
        line = line.rstrip("\n")
        if not line or (n == 0 and line.startswith("base\t")):
            continue
        base, cls, i, l = line.split("\t")
        out[(base, cls)] = (int(i), int(l))
    return out


class Matcher:
    """Expanded lexicon compiled into hash indexes over token surfaces.

    ``window`` allows up to that many free word tokens between the light
    verb and the rest of its template; 0 means strict adjacency.
    """

    def __init__(self, expanded, window: int = 0, fold_diacritics: bool = False):
        self.window = window
        self.fold_diacritics = fold_diacritics
        self.entries = list(expanded)
        self.integrated: Dict[str, List[int]] = {}
        self.heads: Dict[str, List[Tuple[int, Tuple[Tuple[str, ...], ...], bool]]] = {}
        key = fold if fold_diacritics else (lambda s: s)
        for idx, (entry, forms) in enumerate(expanded.items()):
            for surface in sorted(forms.integrated):
                self.integrated.setdefault(key(surface), []).append(idx)
            for pat in forms.patterns:
                tails = tuple(tuple(key(t) for t in tail) for tail in pat.tails)
                for head in sorted(pat.heads):
                    self.heads.setdefault(key(head), []).append((idx, tails, pat.reflexive))
        self._key = key

    def candidates(self, tokens: Sequence[Token]) -> List[Tuple[int, int, int, str]]:
        """Every (start, end, entry index, variant) occurrence before overlap resolution."""
        words = [self._key(t.surface) if t.kind == WORD else None for t in tokens]
        out = []
        n = len(tokens)
        for i, w in enumerate(words):
            if w is None:
                continue
            clitic_before = i > 0 and words[i - 1] in CLITICS
            for idx in self.integrated.get(w, ()):
                start = i - 1 if clitic_before and self.entries[idx].reflexive else i
                out.append((start, i + 1, idx, INTEGRATED))
            for idx, tails, reflexive in self.heads.get(w, ()):
                start = i - 1 if clitic_before and reflexive else i
                for skip in range(self.window + 1):
                    j = i + 1 + skip
                    if skip and (j - 1 >= n or words[j - 1] is None):
                        break
                    for tail in tails:
                        end = j + len(tail)
                        if end <= n and tuple(words[j:end]) == tail:
                            out.append((start, end, idx, LIGHT))
        return out

    def match_tokens(self, tokens: Sequence[Token]) -> List[Tuple[int, int, int, str]]:
        return resolve_overlaps(self.candidates(tokens))

    def match_post(self, post: Post) -> List[MatchRecord]:
        if post.is_retweet:
            raise RetweetRejected(post.id)
        tokens = tokenize(post.text)
        records = []
        for start, end, idx, variant in self.match_tokens(tokens):
            s, e = tokens[start].char_span[0], tokens[end - 1].char_span[1]
            entry = self.entries[idx]
            records.append(MatchRecord(post.id, post.author_id, entry.base, entry.word_class,
                                       variant, (s, e), post.text[s:e]))
        return records

    def empty_summary(self) -> CorpusSummary:
        return CorpusSummary({(e.base, e.word_class): [0, 0] for e in self.entries})


def resolve_overlaps(cands: Iterable[Tuple[int, int, int, str]]) -> List[Tuple[int, int, int, str]]:
    """Keep longest matches first, then leftmost, then lexicon order."""
    order = sorted(set(cands), key=lambda c: (-(c[1] - c[0]), c[0], c[2], c[3]))
    taken: List[Tuple[int, int]] = []
    kept = []
    for c in order:
        if any(c[0] < e and s < c[1] for s, e in taken):
            continue
        taken.append((c[0], c[1]))
        kept.append(c)
    kept.sort(key=lambda c: (c[0], c[1], c[2]))
    return kept


def match_post(post: Post, matcher: Matcher) -> List[MatchRecord]:
    return matcher.match_post(post)


def scan_corpus(posts: Iterable[Post], matcher: Matcher, summary: Optional[CorpusSummary] = None) -> Iterator[MatchRecord]:
    """Yield records for every non-retweet post, updating ``summary`` in place."""
    summary = summary if summary is not None else matcher.empty_summary()
    for post in posts:
        summary.posts += 1
        if post.is_retweet:
            summary.retweets += 1
            continue
        for rec in matcher.match_post(post):
            summary.add(rec)
            yield rec


# process-pool plumbing: each worker holds its own compiled matcher
_WORKER_MATCHER: Optional[Matcher] = None


def _init_worker(expanded, window, fold_diacritics):
    global _WORKER_MATCHER
    _WORKER_MATCHER = Matcher(expanded, window, fold_diacritics)


def _match_batch(lines: List[str]):
    recs = []
    n_rt = n_bad = 0
    for line in lines:
        try:
            post = parse_line(line)
        except (ValueError, KeyError, TypeError):
            n_bad += 1
            continue
        if post.is_retweet:
            n_rt += 1
            continue
        recs.extend(_WORKER_MATCHER.match_post(post))
    return recs, len(lines) - n_bad, n_rt, n_bad


def scan_lines(lines: Iterable[str], expanded, summary: CorpusSummary, workers: int = 1,
               window: int = 0, fold_diacritics: bool = False, batch_size: int = 2000) -> Iterator[MatchRecord]:
    """Match raw JSONL lines, in order, optionally across worker processes.

    At most ``2 * workers`` batches are in flight, so memory stays bounded
    regardless of corpus size.
    """
    if workers <= 1:
        _init_worker(expanded, window, fold_diacritics)
        for batch in _batches(lines, batch_size):
            yield from _consume(_match_batch(batch), summary)
        return
    with ProcessPoolExecutor(workers, initializer=_init_worker,
                             initargs=(expanded, window, fold_diacritics)) as pool:
        pending: deque = deque()
        for batch in _batches(lines, batch_size):
            pending.append(pool.submit(_match_batch, batch))
            if len(pending) >= 2 * workers:
                yield from _consume(pending.popleft().result(), summary)
        while pending:
            yield from _consume(pending.popleft().result(), summary)


def _consume(result, summary: CorpusSummary) -> Iterator[MatchRecord]:
    recs, n_posts, n_rt, n_bad = result
    summary.posts += n_posts
    summary.retweets += n_rt
    summary.malformed += n_bad
    for rec in recs:
        summary.add(rec)
        yield rec


def _batches(lines: Iterable[str], size: int) -> Iterator[List[str]]:
    batch: List[str] = []
    for line in lines:
        batch.append(line)
        if len(batch) >= size:
            yield batch
            batch = []
    if batch:
        yield batch


def write_records(records: Iterable[MatchRecord], handle) -> int:
    n = 0
    for rec in records:
        handle.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")
        n += 1
    return n


def read_records(handle) -> Iterator[MatchRecord]:
    for line in handle:
        if line.strip():
            yield MatchRecord.from_dict(json.loads(line))
