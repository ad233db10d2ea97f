"""Encode match records, post features and author profiles as a regression design."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from ..features import LANGUAGE_BINS, REGIONS, AuthorProfile, PostFeatures, log_transform, zscore
from ..matcher import INTEGRATED
from .regression import DEFAULT_GRID, Design

RARE = "RARE"
REGION_REFERENCE = "UNK"
LANGUAGE_REFERENCE = "low"

# name -> (source, attribute); scalars are log/z transformed
SCALARS = (
    ("post_length", "post", "post_length"),
    ("activity", "author", "activity"),
    ("url_share", "author", "url_share"),
    ("rt_share", "author", "rt_share"),
    ("native_integration_rate", "author", "native_integration_rate"),
)
BINARIES = (("has_hashtag", "has_hashtag"), ("has_mention", "has_mention"))

LABELS = {
    "intercept": "Intercept",
    "has_hashtag": "Has hashtag",
    "has_mention": "Has mention",
    "post_length": "Post length",
    "activity": "Post activity",
    "url_share": "URL sharing",
    "rt_share": "RT sharing",
    "region=LatinAmerica": "Latin America",
    "region=Europe": "Europe",
    "region=US": "US",
    "region=Other": "Other region",
    "language=medium": "Medium Spanish",
    "language=high": "High Spanish",
    "native_integration_rate": "Integrated verb use",
}


class MissingProfile(KeyError):
    pass


@dataclass
class RegressionSpec:
    seed: int
    word_class: str = "loanword"
    rare_threshold: int = 5
    l2_grid: Tuple[float, ...] = DEFAULT_GRID
    test_fraction: float = 0.10
    author_effects: bool = True
    word_effects: bool = True

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")
        if not len(self.l2_grid):
            raise ValueError("l2 grid is empty")
        if self.rare_threshold < 1:
            raise ValueError("rare_threshold must be at least 1")
        if self.seed is None:
            raise ValueError("a seed is required")
        if REGION_REFERENCE not in REGIONS or LANGUAGE_REFERENCE not in LANGUAGE_BINS:
            raise ValueError("reference level missing")

    @property
    def scalars(self) -> List[str]:
        names = [s[0] for s in SCALARS]
        if self.word_class != "loanword":
            names.remove("native_integration_rate")
        return names


@dataclass
class EncodedDesign:
    design: Design
    outcome: np.ndarray
    word_levels: List[str] = field(default_factory=list)
    dropped: int = 0


def _get(obj, attr):
    return obj[attr] if isinstance(obj, Mapping) else getattr(obj, attr)


def regression_sample(records, post_features, profiles: Mapping[str, AuthorProfile], spec: RegressionSpec):
    """Drop records whose author lacks a profile, a language bin, or a required rate.

    Returns ``(records, features, n_dropped)`` restricted to ``spec.word_class``.
    """
    keep_r, keep_f = [], []
    dropped = 0
    for rec, feat in zip(records, post_features):
        if rec.word_class != spec.word_class:
            continue
        prof = profiles.get(rec.author_id)
        if prof is None or prof.language_bin is None or (
            "native_integration_rate" in spec.scalars and prof.native_integration_rate is None
        ):
            dropped += 1
            continue
        keep_r.append(rec)
        keep_f.append(feat)
    return keep_r, keep_f, dropped


def level_codes(values: Sequence[str], threshold: int) -> Tuple[np.ndarray, List[str]]:
    """Integer codes per value; levels seen fewer than ``threshold`` times share ``RARE``."""
    counts = Counter(values)
    levels = sorted(v for v, c in counts.items() if c >= threshold)
    if any(c < threshold for c in counts.values()):
        levels.append(RARE)
    index = {v: i for i, v in enumerate(levels)}
    rare = index.get(RARE)
    codes = np.array([index.get(v, rare) if counts[v] >= threshold else rare for v in values], dtype=np.int64)
    return codes, levels


def encode_design(records, post_features: Sequence, profiles: Mapping[str, AuthorProfile],
                  spec: RegressionSpec) -> EncodedDesign:
    """Build the design for one word class.

    Columns: intercept, binary post flags, log/z scalars, region and language
    dummies against ``UNK`` and ``low``, then one word fixed-effect column per
    frequent base (plus ``RARE``). Author fixed effects are carried as an
    absorbed group block with the same rare bucketing.
    """
    if len(records) != len(post_features):
        raise ValueError("records and post features differ in length")
    n = len(records)
    profs = []
    for rec in records:
        prof = profiles.get(rec.author_id)
        if prof is None:
            raise MissingProfile(rec.author_id)
        profs.append(prof)
    if n == 0:
        raise ValueError("empty regression sample")

    cols: List[np.ndarray] = [np.ones(n)]
    names = ["intercept"]
    for name, attr in BINARIES:
        cols.append(np.array([float(bool(_get(f, attr))) for f in post_features]))
        names.append(name)
    for name, source, attr in SCALARS:
        if name not in spec.scalars:
            continue
        rows = post_features if source == "post" else profs
        raw = [_get(r, attr) for r in rows]
        if any(v is None for v in raw):
            raise ValueError(f"{name} is absent for some records; filter with regression_sample first")
        cols.append(zscore(log_transform(raw)))
        names.append(name)
    for region in REGIONS:
        if region == REGION_REFERENCE:
            continue
        cols.append(np.array([float(p.region == region) for p in profs]))
        names.append(f"region={region}")
    for level in ("medium", "high"):
        cols.append(np.array([float(p.language_bin == level) for p in profs]))
        names.append(f"language={level}")
    n_main = len(cols)

    word_levels: List[str] = []
    if spec.word_effects:
        codes, word_levels = level_codes([r.base for r in records], spec.rare_threshold)
        for k, level in enumerate(word_levels):
            cols.append((codes == k).astype(float))
            names.append(f"word={level}")

    X = np.column_stack(cols)
    penalized = np.ones(X.shape[1], dtype=bool)
    penalized[0] = False
    fixed = np.zeros(X.shape[1], dtype=bool)
    fixed[n_main:] = True
    groups, group_names = None, []
    if spec.author_effects:
        groups, levels = level_codes([r.author_id for r in records], spec.rare_threshold)
        group_names = [f"author={a}" for a in levels]
    design = Design(X, names, penalized, 0, fixed, groups, group_names)
    y = np.array([float(r.variant == INTEGRATED) for r in records])
    return EncodedDesign(design, y, word_levels)


def features_for(records, post_features_by_key: Dict[Tuple[str, int, int], PostFeatures]):
    """Align post-feature rows to records by (post id, span)."""
    out = []
    for rec in records:
        key = (rec.post_id, rec.char_span[0], rec.char_span[1])
        if key not in post_features_by_key:
            raise KeyError(f"no post features for {key}")
        out.append(post_features_by_key[key])
    return out
