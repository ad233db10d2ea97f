"""Seeded synthetic corpora whose ground truth is known by construction.

Planted phrases are set off by commas so neighbouring filler can never
extend or shorten a match; filler sentences are screened so that none of
their words is an integrated surface or light-verb head of any entry.
"""
from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from .features import load_gazetteer
from .langid import default_training_data
from .lexicon import default_lexicon
from .matcher import INTEGRATED, LIGHT, WORD, tokenize
from .morphology import expand_lexicon

EPOCH = 1_577_836_800  # 2020-01-01T00:00:00Z
DAY = 86_400

# planted effects on the log-odds of integrated use, mirroring the published sign pattern
DEFAULT_EFFECTS = {
    "intercept": 0.8,
    "has_mention": -0.6,
    "has_hashtag": 0.5,
    "region=LatinAmerica": 0.6,
    "region=Europe": -0.7,
    "region=US": -0.3,
    "region=Other": -0.3,
    "language=medium": 0.5,
    "language=high": 0.9,
}
REGION_WEIGHTS = {"UNK": 0.3, "LatinAmerica": 0.35, "Europe": 0.15, "US": 0.1, "Other": 0.1}
BIN_WEIGHTS = {"high": 0.5, "medium": 0.3, "low": 0.2}
SPANISH_SHARE = {"high": 1.0, "medium": 0.75, "low": 0.4}
UNKNOWN_PLACES = (None, "", "en la luna", "donde sea")


@dataclass(frozen=True)
class Plantable:
    base: str
    word_class: str
    integrated: Tuple[str, ...]
    light: Tuple[str, ...]


def plantable_entries(expanded) -> Dict[Tuple[str, str], Plantable]:
    """Surfaces and phrases that belong to exactly one entry, keyed by (base, class)."""
    owners = Counter()
    for forms in expanded.values():
        owners.update(forms.integrated)
        owners.update(forms.light)
    out = {}
    for entry, forms in expanded.items():
        integ = tuple(sorted(s for s in forms.integrated if owners[s] == 1))
        light = tuple(sorted(p for p in forms.light if owners[p] == 1))
        out[(entry.base, entry.word_class)] = Plantable(entry.base, entry.word_class, integ, light)
    return out


def blocked_words(expanded) -> frozenset:
    words = set()
    for forms in expanded.values():
        words.update(forms.integrated)
        for pat in forms.patterns:
            words.update(pat.heads)
    return frozenset(words)


def safe_fillers(expanded, lang: str) -> List[str]:
    """Training sentences of ``lang`` containing no word that could start a match."""
    blocked = blocked_words(expanded)
    out = []
    for text, code in default_training_data():
        if code != lang:
            continue
        if any(t.kind == WORD and t.surface in blocked for t in tokenize(text)):
            continue
        out.append(text.rstrip(".!?"))
    return out


def default_expanded():
    return expand_lexicon(default_lexicon("loanword") + default_lexicon("native"))


class _Writer:
    """Assigns ids and evenly spaced timestamps to each author's posts."""

    def __init__(self):
        self.posts: List[dict] = []

    def author(self, author_id: str, texts: Sequence[Tuple[str, bool]], span_days: float,
               location: Optional[str] = None) -> None:
        n = len(texts)
        for k, (text, rt) in enumerate(texts):
            ts = EPOCH + (int(round(span_days * DAY * k / (n - 1))) if n > 1 else 0)
            post = {"id": f"{author_id}-{k:04d}", "author_id": author_id, "timestamp": ts,
                    "text": text, "is_retweet": rt}
            if location is not None:
                post["profile_location"] = location
            self.posts.append(post)


def _phrase(plant: Plantable, variant: str, rng) -> str:
    pool = plant.integrated if variant == INTEGRATED else plant.light
    if not pool:
        raise ValueError(f"{plant.base} has no plantable {variant} surface")
    return pool[int(rng.integers(len(pool)))]


def _frame(rng, fillers: Sequence[str], phrase: str) -> str:
    a = fillers[int(rng.integers(len(fillers)))]
    b = fillers[int(rng.integers(len(fillers)))].lower()
    return f"{a}, {phrase}, {b}"


# 1,000-post fixture: (base, class, variant, count) planted in original posts
FIXTURE_PLAN = (
    ("like", "loanword", INTEGRATED, 2),
    ("like", "loanword", LIGHT, 2),
    ("tweet", "loanword", INTEGRATED, 3),
    ("chat", "loanword", INTEGRATED, 2),
    ("post", "loanword", LIGHT, 1),
)
FIXTURE_DISTRACTORS = ("el acceso al sistema falló", "la prueba fue difícil", "vamos a hypear el concierto")


def fixture_corpus(seed: int = 7, n_posts: int = 1000, n_authors: int = 20):
    """Return ``(posts, manifest)`` for the small reference corpus."""
    rng = np.random.default_rng(seed)
    expanded = default_expanded()
    plants = plantable_entries(expanded)
    es, en = safe_fillers(expanded, "es"), safe_fillers(expanded, "en")
    native = next(p for k, p in sorted(plants.items()) if k[1] == "native" and p.integrated and p.light)

    special: List[Tuple[str, bool]] = []
    for base, cls, variant, count in FIXTURE_PLAN:
        for _ in range(count):
            special.append((_frame(rng, es, _phrase(plants[(base, cls)], variant, rng)), False))
    for text in FIXTURE_DISTRACTORS:
        special.append((text, False))
    special.append(("vamos a hypear todo, hypear es la vida", False))
    # retweets carrying planted phrases must never be counted
    for base, cls, variant, _ in FIXTURE_PLAN:
        special.append(("RT @fuente: " + _phrase(plants[(base, cls)], variant, rng), True))
    native_texts = [(_frame(rng, es, _phrase(native, INTEGRATED, rng)), False) for _ in range(4)]
    native_texts.append((_frame(rng, es, _phrase(native, LIGHT, rng)), False))
    native_texts.append(("RT @fuente: " + _phrase(native, INTEGRATED, rng), True))

    authors = [f"u{k:02d}" for k in range(n_authors)]
    counts = rng.multinomial(n_posts - 10 * n_authors, np.full(n_authors, 1 / n_authors)) + 10
    native_author = authors[3]
    places = ["Buenos Aires, Argentina", "Madrid", "Texas", "Tokyo", None, "Lima, Perú", "Barcelona"]
    slots = [a for a in authors if a != native_author]
    assigned: Dict[str, List[Tuple[str, bool]]] = defaultdict(list)
    assigned[native_author] = list(native_texts)
    for text in special:
        assigned[slots[int(rng.integers(len(slots)))]].append(text)
    manifest_authors = {}
    writer = _Writer()
    rts = 0
    for k, a in enumerate(authors):
        texts = list(assigned[a])
        while len(texts) < counts[k]:
            pool = en if rng.random() < 0.1 else es
            text = pool[int(rng.integers(len(pool)))]
            roll = rng.random()
            if roll < 0.1:
                text = f"@amigo{int(rng.integers(50))} {text}"
            elif roll < 0.2:
                text = f"{text} #finde"
            elif roll < 0.25:
                text = f"{text} https://example.org/{int(rng.integers(1000))}"
            is_rt = bool(rng.random() < 0.05)
            texts.append((("RT @otro: " + text) if is_rt else text, is_rt))
        if len(texts) > counts[k]:
            raise ValueError("planted posts exceed the author's quota")
        order = rng.permutation(len(texts))
        texts = [texts[i] for i in order]
        rts += sum(rt for _, rt in texts)
        manifest_authors[a] = len(texts)
        writer.author(a, texts, float(1 + k), places[k % len(places)])

    per_base: Dict[Tuple[str, str], List[int]] = defaultdict(lambda: [0, 0])
    for base, cls, variant, count in FIXTURE_PLAN:
        per_base[(base, cls)][0 if variant == INTEGRATED else 1] += count
    per_base[(native.base, "native")] = [4, 1]
    loan = [(b, c, i, l) for (b, c), (i, l) in per_base.items() if c == "loanword"]
    manifest = {
        "seed": seed,
        "posts": len(writer.posts),
        "retweets": rts,
        "authors": manifest_authors,
        "totals": {
            "loanword": {INTEGRATED: sum(r[2] for r in loan), LIGHT: sum(r[3] for r in loan)},
            "native": {INTEGRATED: 4, LIGHT: 1},
        },
        "per_base": sorted([b, c, i, l] for (b, c), (i, l) in per_base.items()),
        "top_k_order": [b for b, _, i, l in sorted(loan, key=lambda r: (-(r[2] + r[3]), r[0]))],
        "native_author": native_author,
        "native_base": native.base,
        "discover": ["hypear"],
    }
    return writer.posts, manifest


def _pairs(values: Sequence[float]) -> List[float]:
    return [v for x in values for v in (x, -x)]


def two_domain_corpora(seed: int = 11, n_words: int = 30):
    """Two corpora over the same words with mean per-word rates 0.91 and 0.82.

    Per-word counts are integers out of a total of 100 or 200, so every
    planted rate is an exact two-decimal fraction.
    """
    rng = np.random.default_rng(seed)
    expanded = default_expanded()
    plants = [p for p in plantable_entries(expanded).values()
              if p.word_class == "loanword" and p.integrated and p.light]
    if len(plants) < n_words or n_words % 2:
        raise ValueError("need an even number of plantable words")
    plants = sorted(plants, key=lambda p: p.base)[:n_words]
    half = n_words // 2
    off_a = _pairs([0.01 * (1 + (k % 8)) for k in range(half)])
    off_b = _pairs([0.01 * (k % 7) for k in range(half)])
    rates_a = [round(0.91 + o, 2) for o in off_a]
    rates_b = [round(0.82 + o, 2) for o in off_b]
    es = safe_fillers(expanded, "es")
    out = []
    truth = {}
    for name, rates, big in (("A", rates_a, 10), ("B", rates_b, 0)):
        writer = _Writer()
        counts = {}
        for k, (plant, rate) in enumerate(zip(plants, rates)):
            total = 200 if k < big else 100
            n_int = int(round(rate * total))
            variants = [INTEGRATED] * n_int + [LIGHT] * (total - n_int)
            texts = [(_frame(rng, es, _phrase(plant, v, rng)), False) for v in variants]
            texts.append(("RT @fuente: " + _phrase(plant, LIGHT, rng), True))
            writer.author(f"{name.lower()}{k:02d}", texts, 30.0)
            counts[plant.base] = [n_int, total - n_int]
        out.append(writer.posts)
        truth[name] = counts
    manifest = {
        "seed": seed,
        "mean_rate": {"A": float(np.mean(rates_a)), "B": float(np.mean(rates_b))},
        "counts": truth,
    }
    return out[0], out[1], manifest


def _region_places(gazetteer) -> Dict[str, List[str]]:
    places = defaultdict(list)
    for kw, region in sorted(gazetteer.mapping.items()):
        places[region].append(kw.title())
    places["UNK"] = list(UNKNOWN_PLACES)
    return places


def planted_model_corpus(n_records: int = 50_000, seed: int = 2024, effects: Optional[Dict[str, float]] = None,
                         records_per_author: int = 10, author_sd: float = 0.3):
    """Posts whose integrated/light choice follows a known logistic model.

    Each author has a planted region (via profile location) and language bin
    (via the share of Spanish versus English filler posts). Each loanword
    post carries one planted use whose probability of being integrated is
    ``expit(effects . x + author noise)``. Every author also writes two
    native-verb posts so the native integration rate is always defined.
    Returns ``(posts, truth)``.
    """
    effects = dict(DEFAULT_EFFECTS if effects is None else effects)
    rng = np.random.default_rng(seed)
    expanded = default_expanded()
    plants = plantable_entries(expanded)
    loan = sorted((p for p in plants.values() if p.word_class == "loanword" and p.integrated and p.light),
                  key=lambda p: p.base)
    native = sorted((p for p in plants.values() if p.word_class == "native" and p.integrated and p.light),
                    key=lambda p: p.base)
    zipf = 1.0 / np.arange(1, len(loan) + 1)
    zipf /= zipf.sum()
    es, en = safe_fillers(expanded, "es"), safe_fillers(expanded, "en")
    places = _region_places(load_gazetteer())
    regions, rw = zip(*REGION_WEIGHTS.items())
    bins, bw = zip(*BIN_WEIGHTS.items())

    n_authors = max(1, n_records // records_per_author)
    per_author = np.full(n_authors, n_records // n_authors)
    per_author[: n_records - per_author.sum()] += 1
    writer = _Writer()
    authors = {}
    n_int = 0
    for a in range(n_authors):
        aid = f"p{a:05d}"
        region = regions[int(rng.choice(len(regions), p=rw))]
        lang = bins[int(rng.choice(len(bins), p=bw))]
        loc = places[region][int(rng.integers(len(places[region])))]
        u = rng.normal(0.0, author_sd)
        texts: List[Tuple[str, bool]] = []
        for _ in range(int(per_author[a])):
            m, h = bool(rng.random() < 0.3), bool(rng.random() < 0.3)
            eta = (effects["intercept"] + effects["has_mention"] * m + effects["has_hashtag"] * h
                   + effects.get(f"region={region}", 0.0) + effects.get(f"language={lang}", 0.0) + u)
            integrated = bool(rng.random() < expit(eta))
            n_int += integrated
            plant = loan[int(rng.choice(len(loan), p=zipf))]
            text = _frame(rng, es, _phrase(plant, INTEGRATED if integrated else LIGHT, rng))
            if m:
                text = f"@amigo{int(rng.integers(100))} {text}"
            if h:
                text = f"{text} #tema{int(rng.integers(20))}"
            texts.append((text, False))
        for v in (INTEGRATED, INTEGRATED if rng.random() < 0.7 else LIGHT):
            plant = native[int(rng.integers(len(native)))]
            texts.append((_frame(rng, es, _phrase(plant, v, rng)), False))
        spanish = len(texts)
        share = SPANISH_SHARE[lang]
        if share >= 1.0:
            texts += [(es[int(rng.integers(len(es)))], False) for _ in range(3)]
        else:
            n_en = max(1, int(np.ceil(spanish * (1 - share) / share)))
            texts += [(en[int(rng.integers(len(en)))], False) for _ in range(n_en)]
        for _ in range(int(rng.integers(0, 3))):
            texts.append(("RT @medio: " + es[int(rng.integers(len(es)))], True))
        if rng.random() < 0.5:
            k = int(rng.integers(len(texts)))
            texts[k] = (texts[k][0] + " https://example.org/n", texts[k][1])
        order = rng.permutation(len(texts))
        writer.author(aid, [texts[i] for i in order], float(rng.integers(1, 365)), loc)
        authors[aid] = {"region": region, "language_bin": lang}
    truth = {"effects": effects, "authors": authors, "records": n_records,
             "integrated": n_int, "seed": seed}
    return writer.posts, truth


def stream_lines(n_posts: int, seed: int = 0, planted_share: float = 0.2, pool_size: int = 2000) -> Iterator[str]:
    """``n_posts`` JSONL lines drawn from a fixed pool of texts; constant memory."""
    rng = np.random.default_rng(seed)
    expanded = default_expanded()
    plants = [p for p in plantable_entries(expanded).values() if p.integrated and p.light]
    es, en = safe_fillers(expanded, "es"), safe_fillers(expanded, "en")
    pool = []
    for _ in range(pool_size):
        if rng.random() < planted_share:
            plant = plants[int(rng.integers(len(plants)))]
            pool.append(_frame(rng, es, _phrase(plant, INTEGRATED if rng.random() < 0.8 else LIGHT, rng)))
        else:
            src = en if rng.random() < 0.2 else es
            pool.append(src[int(rng.integers(len(src)))])
    picks = rng.integers(len(pool), size=n_posts)
    rts = rng.random(n_posts) < 0.1
    for i in range(n_posts):
        yield json.dumps({"id": str(i), "author_id": f"s{i % 5000}", "timestamp": EPOCH + i,
                          "text": pool[picks[i]], "is_retweet": bool(rts[i])}, ensure_ascii=False)


def write_jsonl(posts: Iterable, path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for post in posts:
            fh.write((post if isinstance(post, str) else json.dumps(post, ensure_ascii=False)) + "\n")
            n += 1
    return n


def write_fixtures(directory, seed: int = 7) -> None:
    """Regenerate the shipped fixture corpora and manifests under ``directory``."""
    from pathlib import Path

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    posts, manifest = fixture_corpus(seed)
    write_jsonl(posts, d / "corpus.jsonl")
    (d / "manifest.json").write_text(json.dumps(manifest, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    a, b, m2 = two_domain_corpora()
    write_jsonl(a, d / "domain_a.jsonl")
    write_jsonl(b, d / "domain_b.jsonl")
    (d / "domains.json").write_text(json.dumps(m2, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def oracle_posts(n_posts: int, seed: int = 0, expanded=None) -> List[dict]:
    """Token soup dense in near misses: planted surfaces and phrases, bare light
    verbs, determiners, clitics, light-phrase nouns, accents and noise tokens.
    Meant for exhaustive cross-checks of the matcher, not for realism.
    """
    rng = np.random.default_rng(seed)
    expanded = default_expanded() if expanded is None else expanded
    integ, phrases, heads, tails = set(), set(), set(), set()
    for forms in expanded.values():
        integ |= forms.integrated
        phrases |= forms.light
        for pat in forms.patterns:
            heads |= pat.heads
            for tail in pat.tails:
                tails.update(tail)
    pools = [sorted(integ), sorted(phrases), sorted(heads), sorted(tails),
             ["me", "te", "se", "nos", "os", "un", "una", "el", "la"],
             ["hoy", "ayer", "mucho", "que", "jaja", "bueno", "Acceso", "prueba", "LIKE"],
             [",", "!!", "...", "#like", "@tuit", "https://t.co/x", "…", "?"]]
    weights = np.array([0.18, 0.18, 0.14, 0.14, 0.12, 0.14, 0.10])
    posts = []
    for i in range(n_posts):
        parts = []
        for _ in range(int(rng.integers(1, 14))):
            pool = pools[int(rng.choice(len(pools), p=weights))]
            tok = pool[int(rng.integers(len(pool)))]
            roll = rng.random()
            if roll < 0.1:
                tok = tok.capitalize()
            elif roll < 0.15:
                tok = tok.upper()
            parts.append(tok)
        posts.append({"id": f"o{i}", "author_id": f"a{i % 37}", "timestamp": EPOCH + i,
                      "text": " ".join(parts), "is_retweet": False})
    return posts
