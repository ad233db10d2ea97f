"""Post-level formality variables and author-level background variables."""
from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .langid import spanish_rate as _spanish_rate
from .matcher import HASHTAG, INTEGRATED, MENTION, URL, Matcher, fold, tokenize

REGIONS = ("UNK", "LatinAmerica", "Europe", "US", "Other")
LANGUAGE_BINS = ("low", "medium", "high")
LOG_EPSILON = 1.0


class SpanMismatch(ValueError):
    pass


class AmbiguousGazetteer(ValueError):
    pass


@dataclass(frozen=True)
class PostFeatures:
    has_hashtag: bool
    has_mention: bool
    post_length: int


@dataclass
class AuthorProfile:
    author_id: str
    activity: float
    rt_share: float
    url_share: float
    region: str = "UNK"
    spanish_rate: Optional[float] = None
    language_bin: Optional[str] = None
    native_integration_rate: Optional[float] = None
    n_posts: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AuthorProfile":
        return cls(**d)


@dataclass(frozen=True)
class ScaledVariable:
    name: str
    raw: np.ndarray
    log_value: np.ndarray
    z_value: np.ndarray


def extract_post_features(post, match) -> PostFeatures:
    """Hashtag/mention flags and length with the matched phrase removed."""
    start, end = match.char_span
    if match.post_id != post.id or not 0 <= start <= end <= len(post.text):
        raise SpanMismatch(f"record for {match.post_id} does not fit post {post.id}")
    kinds = {t.kind for t in tokenize(post.text)}
    return PostFeatures(HASHTAG in kinds, MENTION in kinds, len(post.text) - (end - start))


def bin_language(rate: float) -> str:
    """``high`` only for exclusively Spanish authors; 0.5 itself is ``low``."""
    if rate is None or not 0.0 <= rate <= 1.0:
        raise ValueError(f"spanish rate must lie in [0, 1], got {rate!r}")
    r = round(rate, 6)
    if r == 1.0:
        return "high"
    if r > 0.5:
        return "medium"
    return "low"


class Gazetteer:
    """Keyword -> region lookup; the longest keyword present in a location wins."""

    def __init__(self, mapping):
        items = mapping.items() if isinstance(mapping, dict) else mapping
        folded: Dict[str, str] = {}
        for kw, region in items:
            if region not in REGIONS:
                raise ValueError(f"unknown region {region!r} for {kw!r}")
            key = fold(kw.strip().lower())
            if folded.get(key, region) != region:
                raise AmbiguousGazetteer(f"{kw!r} maps to {folded[key]} and {region}")
            folded[key] = region
        self.mapping = folded
        ordered = sorted(folded, key=lambda k: (-len(k), k))
        self._pattern = re.compile(
            r"(?<!\w)(" + "|".join(re.escape(k) for k in ordered) + r")(?!\w)"
        ) if ordered else None

    def __len__(self) -> int:
        return len(self.mapping)

    def lookup(self, location: Optional[str]) -> str:
        if not location or self._pattern is None:
            return "UNK"
        text = fold(location.lower())
        hits = [(m.start(), m.group(1)) for m in self._find_all(text)]
        if not hits:
            return "UNK"
        _, kw = min(hits, key=lambda h: (-len(h[1]), h[0]))
        return self.mapping[kw]

    def _find_all(self, text):
        # overlapping scan so a longer keyword is never hidden behind a shorter one
        pos = 0
        while True:
            m = self._pattern.search(text, pos)
            if m is None:
                return
            yield m
            pos = m.start() + 1


def read_gazetteer(handle) -> Gazetteer:
    pairs = []
    for line in handle:
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        kw, region = line.split("\t")
        pairs.append((kw, region))
    return Gazetteer(pairs)


def load_gazetteer(path=None) -> Gazetteer:
    if path is None:
        with resources.files("loanverbs.data").joinpath("gazetteer.tsv").open(encoding="utf-8") as fh:
            return read_gazetteer(fh)
    with open(path, encoding="utf-8") as fh:
        return read_gazetteer(fh)


def infer_region(profile_location: Optional[str], gazetteer: Gazetteer) -> str:
    return gazetteer.lookup(profile_location)


def extract_author_profile(timeline, identifier, native_matcher: Optional[Matcher],
                           gazetteer: Optional[Gazetteer] = None) -> AuthorProfile:
    posts = timeline.posts
    n = len(posts)
    rts = urls = 0
    native_int = native_all = 0
    location = None
    for post in posts:
        if post.profile_location:
            location = post.profile_location
        if post.is_retweet:
            rts += 1
        if any(t.kind == URL for t in tokenize(post.text)):
            urls += 1
        if native_matcher is not None and not post.is_retweet:
            for rec in native_matcher.match_post(post):
                native_all += 1
                native_int += rec.variant == INTEGRATED
    rate = _spanish_rate(identifier, timeline) if identifier is not None else None
    return AuthorProfile(
        author_id=timeline.author_id,
        activity=n / max(timeline.span_days, 1.0),
        rt_share=rts / n if n else 0.0,
        url_share=urls / n if n else 0.0,
        region=infer_region(location, gazetteer) if gazetteer is not None else "UNK",
        spanish_rate=rate,
        language_bin=bin_language(rate) if rate is not None else None,
        native_integration_rate=native_int / native_all if native_all else None,
        n_posts=n,
    )


def log_transform(raw, epsilon: float = LOG_EPSILON) -> np.ndarray:
    return np.log(np.asarray(raw, dtype=float) + epsilon)


def zscore(values) -> np.ndarray:
    """Population z-score; a constant column maps to zeros."""
    v = np.asarray(values, dtype=float)
    sd = v.std()
    if sd == 0 or not math.isfinite(sd):
        return np.zeros_like(v)
    return (v - v.mean()) / sd


def scale_variable(name: str, raw: Sequence[float], epsilon: float = LOG_EPSILON) -> ScaledVariable:
    raw_arr = np.asarray(raw, dtype=float)
    logged = log_transform(raw_arr, epsilon)
    return ScaledVariable(name, raw_arr, logged, zscore(logged))


def write_jsonl(rows: Iterable[dict], handle) -> None:
    for row in rows:
        handle.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def read_profiles(handle) -> Dict[str, AuthorProfile]:
    out = {}
    for line in handle:
        if line.strip():
            p = AuthorProfile.from_dict(json.loads(line))
            out[p.author_id] = p
    return out


def read_post_features(handle) -> List[dict]:
    return [json.loads(line) for line in handle if line.strip()]
