"""Byte n-gram multinomial naive Bayes language identifier.

Any object with a ``classify(text) -> (code, confidence)`` method can stand in
for :class:`LanguageModel` wherever an identifier is expected.
"""
from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from importlib import resources
from typing import Dict, Iterable, List, Optional, Protocol, Tuple

import numpy as np

FORMAT_TAG = "loanverbs-langid"
FORMAT_VERSION = 1
CONFIDENCE_THRESHOLD = 0.9
MIN_POSTS = 5

_NOISE = re.compile(r"https?://\S+|www\.\S+|[@#]\w+", re.UNICODE)
_SPACE = re.compile(r"\s+")


class InsufficientClasses(ValueError):
    pass


class InvalidAlpha(ValueError):
    pass


class EmptyText(ValueError):
    pass


class LanguageIdentifier(Protocol):
    def classify(self, text: str) -> Tuple[str, float]: ...


def clean(text: str) -> str:
    return _SPACE.sub(" ", _NOISE.sub(" ", text)).strip().lower()


def ngrams(text: str, order: int) -> Counter:
    """Counts of byte n-grams of every length 1..order over ``" text "``."""
    data = f" {text} ".encode("utf-8")
    out: Counter = Counter()
    for n in range(1, order + 1):
        out.update(data[i:i + n] for i in range(len(data) - n + 1))
    return out


@dataclass
class LanguageModel:
    classes: List[str]
    ngram_order: int
    log_priors: np.ndarray
    log_likelihoods: Dict[bytes, np.ndarray]
    smoothing_alpha: float

    def __post_init__(self):
        grams = list(self.log_likelihoods)
        self._index = {g: i for i, g in enumerate(grams)}
        self._matrix = (np.vstack([self.log_likelihoods[g] for g in grams]) if grams
                        else np.zeros((0, len(self.classes))))

    def scores(self, text: str) -> np.ndarray:
        """Unnormalized log posterior per class."""
        cleaned = clean(text)
        if not cleaned:
            raise EmptyText(text)
        index = self._index
        rows, counts = [], []
        for gram, n in ngrams(cleaned, self.ngram_order).items():
            i = index.get(gram)
            if i is not None:
                rows.append(i)
                counts.append(n)
        if not rows:
            return self.log_priors.copy()
        return self.log_priors + np.asarray(counts, dtype=float) @ self._matrix[rows]

    def posterior(self, text: str) -> np.ndarray:
        return normalize_scores(self.scores(text))

    def classify(self, text: str) -> Tuple[str, float]:
        post = self.posterior(text)
        k = int(np.argmax(post))
        return self.classes[k], float(post[k])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps(self))


def normalize_scores(scores: np.ndarray) -> np.ndarray:
    z = np.asarray(scores, dtype=float) - np.max(scores)
    p = np.exp(z)
    return p / p.sum()


def train(labeled_texts: Iterable[Tuple[str, str]], ngram_order: int = 3, alpha: float = 0.5) -> LanguageModel:
    """Fit add-alpha smoothed multinomial naive Bayes over byte n-grams.

    The vocabulary is the set of n-grams seen in training; n-grams outside it
    are ignored when classifying, so each class distribution sums to one over
    the vocabulary.
    """
    if not alpha > 0:
        raise InvalidAlpha(alpha)
    if not 1 <= ngram_order <= 4:
        raise ValueError("ngram_order must be in 1..4")
    docs: Dict[str, int] = Counter()
    counts: Dict[str, Counter] = defaultdict(Counter)
    for text, lang in labeled_texts:
        cleaned = clean(text)
        docs[lang] += 1
        if cleaned:
            counts[lang].update(ngrams(cleaned, ngram_order))
    classes = sorted(docs)
    if len(classes) < 2:
        raise InsufficientClasses(f"need at least 2 classes, got {classes}")
    vocab = sorted(set().union(*(counts[c] for c in classes)))
    index = {g: i for i, g in enumerate(vocab)}
    mat = np.zeros((len(vocab), len(classes)))
    for j, c in enumerate(classes):
        for g, n in counts[c].items():
            mat[index[g], j] = n
    denom = mat.sum(axis=0) + alpha * len(vocab)
    loglik = np.log(mat + alpha) - np.log(denom)
    n_docs = sum(docs.values())
    priors = np.log(np.array([docs[c] / n_docs for c in classes]))
    table = {g: loglik[i] for i, g in enumerate(vocab)}
    return LanguageModel(classes, ngram_order, priors, table, float(alpha))


def classify(model: LanguageIdentifier, text: str) -> Tuple[str, float]:
    return model.classify(text)


def spanish_rate(model: LanguageIdentifier, timeline, threshold: float = CONFIDENCE_THRESHOLD,
                 min_posts: int = MIN_POSTS, spanish: str = "es") -> Optional[float]:
    """Share of confidently classified posts that are Spanish.

    Both numerator and denominator only count posts whose top-class
    confidence exceeds ``threshold``. ``None`` when the author has fewer than
    ``min_posts`` posts or none was classified confidently.
    """
    posts = timeline.posts if hasattr(timeline, "posts") else list(timeline)
    if len(posts) < min_posts:
        return None
    confident = es = 0
    for post in posts:
        text = post.text if hasattr(post, "text") else post
        try:
            lang, conf = model.classify(text)
        except EmptyText:
            continue
        if conf > threshold:
            confident += 1
            es += lang == spanish
    if confident == 0:
        return None
    return es / confident


def dumps(model: LanguageModel) -> str:
    lines = [
        f"#{FORMAT_TAG}\tv{FORMAT_VERSION}\torder={model.ngram_order}\talpha={model.smoothing_alpha!r}",
        "classes\t" + "\t".join(model.classes),
        "prior\t" + "\t".join(repr(float(x)) for x in model.log_priors),
    ]
    for gram in sorted(model.log_likelihoods):
        ll = model.log_likelihoods[gram]
        lines.append(gram.hex() + "\t" + "\t".join(repr(float(x)) for x in ll))
    return "\n".join(lines) + "\n"


def loads(text: str) -> LanguageModel:
    rows = text.splitlines()
    head = rows[0].split("\t")
    if head[0] != "#" + FORMAT_TAG:
        raise ValueError("not a langid model file")
    if head[1] != f"v{FORMAT_VERSION}":
        raise ValueError(f"unsupported model version {head[1]}")
    meta = dict(kv.split("=", 1) for kv in head[2:])
    classes = rows[1].split("\t")[1:]
    priors = np.array([float(x) for x in rows[2].split("\t")[1:]])
    table = {}
    for row in rows[3:]:
        if not row:
            continue
        cols = row.split("\t")
        table[bytes.fromhex(cols[0])] = np.array([float(x) for x in cols[1:]])
    return LanguageModel(classes, int(meta["order"]), priors, table, float(meta["alpha"]))


def load_model(path) -> LanguageModel:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def read_training_tsv(handle) -> List[Tuple[str, str]]:
    out = []
    for line in handle:
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        lang, text = line.split("\t", 1)
        out.append((text, lang))
    return out


def default_training_data() -> List[Tuple[str, str]]:
    with resources.files("loanverbs.data").joinpath("langid_train.tsv").open(encoding="utf-8") as fh:
        return read_training_tsv(fh)


_DEFAULT: Optional[LanguageModel] = None


def default_model() -> LanguageModel:
    """The shipped es/en/pt model."""
    global _DEFAULT
    if _DEFAULT is None:
        with resources.files("loanverbs.data").joinpath("langid_model.tsv").open(encoding="utf-8") as fh:
            _DEFAULT = loads(fh.read())
    return _DEFAULT

