import io
import json

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from loanverbs.ingest import Post, PostReader
from loanverbs.matcher import (
    HASHTAG, INTEGRATED, LIGHT, MENTION, OTHER, URL, WORD, Matcher, RetweetRejected,
    fold, read_records, read_summary_tsv, resolve_overlaps, scan_corpus, scan_lines, tokenize, write_records,
)
from loanverbs.pipeline import run_match
from oracles import brute_force_matches


def _post(text, pid="p", rt=False):
    return Post(pid, "a", 1.0, text, rt)


@pytest.mark.parametrize("text,kinds", [
    ("RT @ana mira esto #wow", [WORD, MENTION, WORD, WORD, HASHTAG]),
    ("", []),
    ("tuiteé!!", [WORD, OTHER]),
    ("ver https://t.co/x ya", [WORD, URL, WORD]),
    ("¿qué?", [OTHER, WORD, OTHER]),
])
def test_tokenize_kinds(text, kinds):
    assert [t.kind for t in tokenize(text)] == kinds


def test_tokenize_spans_preserve_original():
    text = "Tuiteé  #WOW"
    toks = tokenize(text)
    assert toks[0].surface == "tuiteé"
    assert text[slice(*toks[0].char_span)] == "Tuiteé"
    spans = [t.char_span for t in toks]
    assert all(a[1] <= b[0] for a, b in zip(spans, spans[1:]))


@given(st.text(max_size=60))
def test_tokenize_spans_ascending(text):
    toks = tokenize(text)
    for t in toks:
        assert 0 <= t.char_span[0] < t.char_span[1] <= len(text)
    assert all(a.char_span[1] <= b.char_span[0] for a, b in zip(toks, toks[1:]))


def test_light_like(matcher):
    text = "le di un like al post"
    (rec,) = matcher.match_post(_post(text))
    assert (rec.base, rec.variant, rec.matched_surface) == ("like", LIGHT, "di un like")
    assert text[slice(*rec.char_span)] == "di un like"


def test_integrated_tweet(matcher):
    (rec,) = matcher.match_post(_post("tuiteé eso ayer"))
    assert (rec.base, rec.word_class, rec.variant) == ("tweet", "loanword", INTEGRATED)


def test_excluded_surface_never_matches(matcher):
    assert matcher.match_post(_post("el acceso al sistema falló")) == []


def test_retweet_rejected(matcher):
    with pytest.raises(RetweetRejected):
        matcher.match_post(_post("tuiteé", rt=True))


def test_no_match_across_special_tokens(matcher):
    for text in ("di #un like", "di @un like", "di https://t.co/x like", "di un #like"):
        assert all(r.variant != LIGHT for r in matcher.match_post(_post(text)))


def test_integrated_inside_hashtag_ignored(matcher):
    assert matcher.match_post(_post("#tuiteé @likeo")) == []


def test_multiple_records_per_post(matcher):
    recs = matcher.match_post(_post("tuiteé y después di un like"))
    assert [(r.base, r.variant) for r in recs] == [("tweet", INTEGRATED), ("like", LIGHT)]


def test_overlap_rule_prefers_longest_then_leftmost():
    assert resolve_overlaps([(0, 1, 0, INTEGRATED), (0, 3, 1, LIGHT), (2, 4, 2, LIGHT)]) == [(0, 3, 1, LIGHT)]
    assert resolve_overlaps([(1, 3, 0, LIGHT), (0, 2, 1, LIGHT)]) == [(0, 2, 1, LIGHT)]
    assert resolve_overlaps([(0, 1, 5, INTEGRATED), (0, 1, 2, INTEGRATED)]) == [(0, 1, 2, INTEGRATED)]


def test_window_relaxes_adjacency(expanded):
    strict = Matcher(expanded)
    loose = Matcher(expanded, window=1)
    text = "di ya un like"
    assert strict.match_post(_post(text)) == []
    (rec,) = loose.match_post(_post(text))
    assert rec.matched_surface == text and rec.variant == LIGHT


def test_fold_diacritics(expanded):
    assert Matcher(expanded).match_post(_post("tuitee")) == []
    (rec,) = Matcher(expanded, fold_diacritics=True).match_post(_post("tuitee"))
    assert rec.base == "tweet"
    assert fold("tuiteó") == "tuiteo"


def test_fixture_summary_matches_manifest(fixtures_dir, manifest, matcher):
    summary = matcher.empty_summary()
    records = list(scan_corpus(PostReader(fixtures_dir / "corpus.jsonl"), matcher, summary))
    assert summary.posts == manifest["posts"]
    assert summary.retweets == manifest["retweets"]
    by_class = {}
    for r in records:
        slot = by_class.setdefault(r.word_class, {INTEGRATED: 0, LIGHT: 0})
        slot[r.variant] += 1
    assert by_class == manifest["totals"]
    nonzero = sorted([b, c, i, l] for (b, c), (i, l) in summary.counts.items() if i or l)
    assert nonzero == sorted(manifest["per_base"])


def test_summary_equals_record_sums(fixtures_dir, matcher):
    summary = matcher.empty_summary()
    records = list(scan_corpus(PostReader(fixtures_dir / "corpus.jsonl"), matcher, summary))
    counts = {}
    for r in records:
        slot = counts.setdefault((r.base, r.word_class), [0, 0])
        slot[r.variant == LIGHT] += 1
    assert {k: v for k, v in summary.counts.items() if any(v)} == counts


def test_retweet_only_corpus(matcher):
    posts = [_post("tuiteé", str(i), rt=True) for i in range(3)]
    summary = matcher.empty_summary()
    assert list(scan_corpus(posts, matcher, summary)) == []
    assert summary.retweets == 3


def test_duplicate_lines_not_deduplicated(matcher):
    posts = [_post("tuiteé"), _post("tuiteé")]
    assert len(list(scan_corpus(posts, matcher))) == 2


def test_records_roundtrip(matcher):
    recs = matcher.match_post(_post("tuiteé y di un like"))
    buf = io.StringIO()
    assert write_records(recs, buf) == 2
    assert list(read_records(io.StringIO(buf.getvalue()))) == recs


def _lines(n):
    return [json.dumps({"id": str(i), "author_id": "a", "timestamp": 1 + i, "is_retweet": i % 5 == 0,
                        "text": ["tuiteé hoy", "di un like", "nada", "el acceso"][i % 4]}) for i in range(n)]


def test_parallel_equals_sequential(expanded):
    lines = _lines(300) + ["{broken"]
    s1, s4 = Matcher(expanded).empty_summary(), Matcher(expanded).empty_summary()
    seq = list(scan_lines(lines, expanded, s1, workers=1, batch_size=17))
    par = list(scan_lines(lines, expanded, s4, workers=2, batch_size=17))
    assert seq == par
    assert s1 == s4 and s1.malformed == 1


def test_run_match_deterministic(tmp_path, fixtures_dir, expanded):
    outs = []
    for k in range(2):
        rec, summ = tmp_path / f"r{k}.jsonl", tmp_path / f"s{k}.tsv"
        run_match([fixtures_dir / "corpus.jsonl"], expanded, rec, summ)
        outs.append((rec.read_bytes(), summ.read_bytes()))
    assert outs[0] == outs[1]
    with open(tmp_path / "s0.tsv", encoding="utf-8") as fh:
        assert read_summary_tsv(fh)[("tweet", "loanword")] == (3, 0)


def _token_pool(expanded):
    pool = {"di", "un", "una", "like", "me", "se", "hoy", "ya", "#like", "@ana", ",", "LIKE", "acceso"}
    for entry, forms in expanded.items():
        if entry.base in ("like", "tweet", "chat", "shower", "google", "post", "hang out", "admire"):
            pool |= set(sorted(forms.integrated)[:4])
            pool |= {w for p in sorted(forms.light)[:6] for w in p.split()}
    return sorted(pool)


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(data=st.data())
def test_oracle_equivalence(data, expanded, matcher):
    words = data.draw(st.lists(st.sampled_from(_token_pool(expanded)), max_size=12))
    text = " ".join(words)
    got = {(r.base, r.word_class, r.variant, r.char_span) for r in matcher.match_post(_post(text))}
    assert got == brute_force_matches(text, expanded)
