"""File-to-file pipeline stages shared by the command line and the tests."""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .features import (
    AuthorProfile, Gazetteer, extract_author_profile, extract_post_features, load_gazetteer,
    read_profiles, write_jsonl,
)
from .ingest import AuthorTimeline, PostReader, group_timelines
from .langid import LanguageModel, default_model, load_model
from .lexicon import Lexicon, default_exclusions, discover_candidates, default_lexicon, load_exclusions, load_lexicon
from .matcher import CorpusSummary, Matcher, MatchRecord, read_records, scan_lines, tokenize, write_records, WORD
from .morphology import expand_lexicon
from .stats.design import LABELS, RegressionSpec, encode_design, regression_sample
from .stats.regression import RegressionResult, grid_search_l2

RECORDS = "records.jsonl"
SUMMARY = "summary.tsv"
POST_FEATURES = "post_features.jsonl"
PROFILES = "profiles.jsonl"


def load_lexicons(paths: Sequence = (), exclusions_path=None) -> Lexicon:
    """Bundled loanword + native lexicon unless explicit TSV paths are given."""
    if paths:
        lex = Lexicon()
        for p in paths:
            lex = lex + load_lexicon(p)
    else:
        lex = default_lexicon("loanword", exclusions=False) + default_lexicon("native", exclusions=False)
    excl = load_exclusions(exclusions_path) if exclusions_path else default_exclusions()
    return lex.with_exclusions(excl)


def restrict(lexicon: Lexicon, word_class: Optional[str]) -> Lexicon:
    if word_class is None:
        return lexicon
    return Lexicon(tuple(e for e in lexicon if e.word_class == word_class))


def run_discover(inputs: Sequence, english: Iterable[str], spanish: Iterable[str]):
    reader = PostReader(inputs)
    tokens = (t.surface for post in reader if not post.is_retweet for t in tokenize(post.text) if t.kind == WORD)
    return discover_candidates(tokens, english, spanish)


def candidates_tsv(reports) -> str:
    out = ["surface\tenglish_stem\tfrequency\tstatus"]
    for r in reports:
        out.append(f"{r.surface}\t{r.english_stem}\t{r.frequency}\t{r.rejected_reason or 'accepted'}")
    return "\n".join(out) + "\n"


def expansion_tsv(expanded) -> str:
    out = ["base\tclass\tvariant\tsurface"]
    for entry, forms in expanded.items():
        out.extend(f"{entry.base}\t{entry.word_class}\tintegrated\t{s}" for s in sorted(forms.integrated))
        out.extend(f"{entry.base}\t{entry.word_class}\tlight\t{s}" for s in sorted(forms.light))
    return "\n".join(out) + "\n"


def run_match(inputs: Sequence, expanded, records_path, summary_path=None, workers: int = 1,
              window: int = 0, fold_diacritics: bool = False) -> CorpusSummary:
    """Stream posts through the matcher, writing records as they are produced."""
    reader = PostReader(inputs)
    summary = Matcher(expanded, window, fold_diacritics).empty_summary()
    with open(records_path, "w", encoding="utf-8") as fh:
        write_records(scan_lines(reader.raw_lines(), expanded, summary, workers, window, fold_diacritics), fh)
    if summary_path is not None:
        Path(summary_path).write_text(summary.to_tsv(), encoding="utf-8")
    return summary


_PROFILE_CTX = None


def _init_profiles(identifier, native_expanded, gazetteer, window, fold):
    global _PROFILE_CTX
    native = Matcher(native_expanded, window, fold) if native_expanded else None
    _PROFILE_CTX = (identifier, native, gazetteer)


def _profiles_batch(timelines: List[AuthorTimeline]) -> List[AuthorProfile]:
    identifier, native, gazetteer = _PROFILE_CTX
    return [extract_author_profile(tl, identifier, native, gazetteer) for tl in timelines]


def author_profiles(timelines: Dict[str, AuthorTimeline], identifier, native_expanded, gazetteer: Gazetteer,
                    workers: int = 1, window: int = 0, fold: bool = False) -> Dict[str, AuthorProfile]:
    """Profiles for every timeline, in sorted author order; parallel across authors."""
    ordered = [timelines[a] for a in sorted(timelines)]
    args = (identifier, native_expanded, gazetteer, window, fold)
    if workers <= 1 or len(ordered) < 2:
        _init_profiles(*args)
        profiles = _profiles_batch(ordered)
    else:
        size = max(1, len(ordered) // (4 * workers))
        chunks = [ordered[i:i + size] for i in range(0, len(ordered), size)]
        with ProcessPoolExecutor(workers, initializer=_init_profiles, initargs=args) as pool:
            profiles = [p for part in pool.map(_profiles_batch, chunks) for p in part]
    return {p.author_id: p for p in profiles}


def post_feature_rows(records: Sequence[MatchRecord], posts_by_id) -> List[dict]:
    rows = []
    for rec in records:
        f = extract_post_features(posts_by_id[rec.post_id], rec)
        rows.append({"post_id": rec.post_id, "char_span": list(rec.char_span), "base": rec.base,
                     "has_hashtag": f.has_hashtag, "has_mention": f.has_mention, "post_length": f.post_length})
    return rows


def run_features(inputs: Sequence, records: Sequence[MatchRecord], lexicon: Lexicon, identifier,
                 gazetteer: Gazetteer, workers: int = 1, window: int = 0, fold: bool = False):
    """Post features aligned with ``records`` plus profiles of the authors they mention."""
    wanted = {r.author_id for r in records}
    timelines = group_timelines(p for p in PostReader(inputs) if p.author_id in wanted)
    posts_by_id = {p.id: p for tl in timelines.values() for p in tl.posts}
    missing = [r.post_id for r in records if r.post_id not in posts_by_id]
    if missing:
        raise KeyError(f"{len(missing)} records refer to posts absent from the input, e.g. {missing[0]}")
    rows = post_feature_rows(records, posts_by_id)
    native = expand_lexicon(restrict(lexicon, "native"))
    profiles = author_profiles(timelines, identifier, native, gazetteer, workers, window, fold)
    return rows, profiles


def write_features(rows, profiles, features_path, profiles_path) -> None:
    with open(features_path, "w", encoding="utf-8") as fh:
        write_jsonl(rows, fh)
    with open(profiles_path, "w", encoding="utf-8") as fh:
        write_jsonl((profiles[a].to_dict() for a in sorted(profiles)), fh)


def load_records(path) -> List[MatchRecord]:
    with open(path, encoding="utf-8") as fh:
        return list(read_records(fh))


def load_feature_rows(path) -> List[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def load_profiles(path) -> Dict[str, AuthorProfile]:
    with open(path, encoding="utf-8") as fh:
        return read_profiles(fh)


def run_regression(records: Sequence[MatchRecord], rows: Sequence[dict], profiles: Dict[str, AuthorProfile],
                   spec: RegressionSpec) -> Tuple[RegressionResult, int]:
    """Filter to the regression sample, encode, and grid-search the l2 weight."""
    if len(records) != len(rows):
        raise ValueError("records and post features differ in length")
    for rec, row in zip(records, rows):
        if rec.post_id != row["post_id"] or list(rec.char_span) != list(row["char_span"]):
            raise ValueError(f"post features out of step with records at {rec.post_id}")
    recs, feats, dropped = regression_sample(records, rows, profiles, spec)
    enc = encode_design(recs, feats, profiles, spec)
    result = grid_search_l2(enc.design, enc.outcome, spec.l2_grid, spec.test_fraction, spec.seed)
    return result, dropped


def regression_tsv(result: RegressionResult) -> str:
    return result.to_tsv(LABELS)


def load_identifier(path=None) -> LanguageModel:
    return load_model(path) if path else default_model()


def load_region_gazetteer(path=None) -> Gazetteer:
    return load_gazetteer(path)


def read_wordlist(path) -> frozenset:
    """One lowercase word per line; ``#`` comments and blanks ignored."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip() and not w.startswith("#"))
