"""Integrated/light verb pair inventory.

Lexicon files are 4-column TSV::

    base <TAB> word_class <TAB> integrated_lemma <TAB> light_spec

``light_spec`` lists "/"-separated light verbs, optional literal connectives,
an optional determiner (parenthesized when optional) and a trailing noun,
e.g. ``poner/enviar/hacer (un) tweet`` or ``actuar como un stalker``.
"""
from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, replace
from importlib import resources
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

from . import morphology
from .morphology import LIGHT_VERBS, NotAVerb, normalize

WORD_CLASSES = ("loanword", "native")
DETERMINERS = frozenset({"un", "una", "el", "la", "los", "las"})
_GENDER_PAIRS = {"un": "una", "una": "un", "el": "la", "la": "el", "los": "las", "las": "los"}
CLITICS = frozenset({"me", "te", "se", "nos", "os"})

# sizes of the source word lists
EXPECTED_COUNTS = {"loanword": 120, "native": 49}

MIN_STEM_LENGTH = 4


class LexiconError(ValueError):
    pass


class DuplicateLemma(LexiconError):
    pass


class MalformedRow(LexiconError):
    pass


@dataclass(frozen=True)
class LightVerbTemplate:
    light_lemma: str
    noun: str
    determiner_optional: bool = False
    determiner_forms: FrozenSet[str] = frozenset()
    middle: Tuple[str, ...] = ()
    reflexive: bool = False

    def tails(self) -> List[Tuple[str, ...]]:
        """Token sequences that may follow the conjugated light verb."""
        noun = tuple(self.noun.split())
        if not self.determiner_forms:
            return [self.middle + noun]
        out = [self.middle + (det,) + noun for det in sorted(self.determiner_forms)]
        if self.determiner_optional:
            out.insert(0, self.middle + noun)
        return out


@dataclass(frozen=True)
class LexiconEntry:
    base: str
    word_class: str
    integrated_lemma: str
    light_templates: Tuple[LightVerbTemplate, ...]
    light_spec: str = ""
    reflexive: bool = False
    excluded_surfaces: FrozenSet[str] = frozenset()
    # alternative spellings of the integrated verb, e.g. tuitear for tweetear
    lemma_variants: Tuple[str, ...] = ()

    @property
    def key(self) -> Tuple[str, str]:
        return (self.word_class, self.base)

    @property
    def lemmas(self) -> Tuple[str, ...]:
        return (self.integrated_lemma,) + self.lemma_variants

    @property
    def written_lemma(self) -> str:
        se = "se" if self.reflexive else ""
        return "/".join(lemma + se for lemma in self.lemmas)

    def paradigm_surfaces(self) -> FrozenSet[str]:
        """Every surface the integrated paradigm(s) generate, before exclusions."""
        out = set()
        for lemma in self.lemmas:
            out.update(morphology.paradigm(lemma, morphology.overrides_for(lemma)).values())
        return frozenset(out)


@dataclass(frozen=True)
class Lexicon:
    entries: Tuple[LexiconEntry, ...] = ()

    def __iter__(self) -> Iterator[LexiconEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __add__(self, other: "Lexicon") -> "Lexicon":
        return Lexicon(self.entries + other.entries)

    def counts(self) -> Counter:
        return Counter(e.word_class for e in self.entries)

    def get(self, word_class: str, base: str) -> LexiconEntry:
        for e in self.entries:
            if e.key == (word_class, base):
                return e
        raise KeyError((word_class, base))

    def with_exclusions(self, surfaces: Iterable[str]) -> "Lexicon":
        """Attach each excluded surface to every entry whose paradigm produces it."""
        excluded = {normalize(s) for s in surfaces}
        out = []
        for e in self.entries:
            out.append(replace(e, excluded_surfaces=e.excluded_surfaces | (e.paradigm_surfaces() & excluded)))
        return Lexicon(tuple(out))


@dataclass(frozen=True)
class CandidateReport:
    surface: str
    english_stem: str
    frequency: int
    rejected_reason: Optional[str] = None

    @property
    def accepted(self) -> bool:
        return self.rejected_reason is None


def _split_reflexive(lemma: str) -> Tuple[str, bool]:
    if lemma.endswith("se") and lemma[:-2].endswith(("ar", "er", "ir")):
        return lemma[:-2], True
    return lemma, False


def _noun_variants(token: str) -> List[str]:
    out = []
    for alt in token.split("/"):
        if "(" in alt and alt.endswith(")"):
            head, opt = alt[:-1].split("(", 1)
            out.extend([head, head + opt])
        else:
            out.append(alt)
    return out


def parse_light_spec(spec: str) -> List[LightVerbTemplate]:
    """Expand one light-verb spec into templates (one per verb x noun variant)."""
    tokens = normalize(spec).split()
    if len(tokens) < 2:
        raise MalformedRow(f"light spec needs a verb and a noun: {spec!r}")
    verbs = tokens[0].split("/")
    rest = tokens[1:]

    extension = None
    if rest[-1].startswith("(") and rest[-1].endswith(")") and rest[-1][1:-1] not in DETERMINERS:
        extension = rest.pop()[1:-1]
    if not rest:
        raise MalformedRow(f"light spec has no noun: {spec!r}")
    noun_token = rest.pop()

    middle: List[str] = []
    det_forms: FrozenSet[str] = frozenset()
    optional = False
    for tok in rest:
        bare = tok.strip("()")
        if bare in DETERMINERS:
            if det_forms:
                raise MalformedRow(f"two determiners in {spec!r}")
            det_forms = frozenset({bare, _GENDER_PAIRS[bare]})
            optional = tok.startswith("(")
        elif det_forms:
            raise MalformedRow(f"literal after determiner in {spec!r}")
        else:
            middle.append(tok)

    nouns = _noun_variants(noun_token)
    if extension:
        nouns = [n for base in nouns for n in (base, f"{base} {extension}")]

    templates = []
    for verb in verbs:
        lemma, reflexive = _split_reflexive(verb)
        if lemma not in LIGHT_VERBS:
            raise MalformedRow(f"{verb!r} is not in the light-verb class")
        for noun in nouns:
            if not noun:
                raise MalformedRow(f"empty noun in {spec!r}")
            templates.append(LightVerbTemplate(lemma, noun, optional, det_forms, tuple(middle), reflexive))
    return templates


def parse_row(row: List[str], lineno: int = 0) -> LexiconEntry:
    if len(row) != 4:
        raise MalformedRow(f"line {lineno}: expected 4 columns, got {len(row)}")
    base, word_class, lemma, spec = (c.strip() for c in row)
    if word_class not in WORD_CLASSES:
        raise MalformedRow(f"line {lineno}: unknown word class {word_class!r}")
    if not base:
        raise MalformedRow(f"line {lineno}: empty base")
    lemmas = []
    flags = set()
    for variant in normalize(lemma).split("/"):
        bare, reflexive = _split_reflexive(variant)
        try:
            morphology.split_lemma(bare)
        except NotAVerb:
            raise MalformedRow(f"line {lineno}: {variant!r} is not an infinitive") from None
        lemmas.append(bare)
        flags.add(reflexive)
    if len(flags) > 1:
        raise MalformedRow(f"line {lineno}: spelling variants disagree on reflexivity")
    return LexiconEntry(
        base=base,
        word_class=word_class,
        integrated_lemma=lemmas[0],
        light_templates=tuple(parse_light_spec(spec)),
        light_spec=spec,
        reflexive=flags.pop(),
        lemma_variants=tuple(lemmas[1:]),
    )


def read_lexicon(handle, word_class: Optional[str] = None) -> Lexicon:
    entries: List[LexiconEntry] = []
    lemmas = set()
    keys = set()
    for lineno, line in enumerate(handle, 1):
        line = line.rstrip("\n\r")
        if not line.strip() or line.startswith("#"):
            continue
        entry = parse_row(line.split("\t"), lineno)
        if word_class is not None and entry.word_class != word_class:
            raise MalformedRow(f"line {lineno}: expected class {word_class!r}, got {entry.word_class!r}")
        clash = [m for m in entry.lemmas if (entry.word_class, m) in lemmas]
        if clash:
            raise DuplicateLemma(f"line {lineno}: {clash[0]!r} listed twice")
        if entry.key in keys:
            raise DuplicateLemma(f"line {lineno}: base {entry.base!r} listed twice for {entry.word_class}")
        lemmas.update((entry.word_class, m) for m in entry.lemmas)
        keys.add(entry.key)
        entries.append(entry)
    return Lexicon(tuple(entries))


def load_lexicon(path, word_class: Optional[str] = None) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return read_lexicon(fh, word_class)


def serialize_lexicon(lexicon: Lexicon) -> str:
    buf = io.StringIO()
    for e in lexicon:
        buf.write(f"{e.base}\t{e.word_class}\t{e.written_lemma}\t{e.light_spec}\n")
    return buf.getvalue()


def load_exclusions(path) -> FrozenSet[str]:
    with open(path, encoding="utf-8") as fh:
        return _read_exclusions(fh)


def _read_exclusions(handle) -> FrozenSet[str]:
    return frozenset(
        normalize(line.strip()) for line in handle if line.strip() and not line.startswith("#")
    )


_DATA_FILES = {"loanword": "loanwords.tsv", "native": "native.tsv"}


def data_path(name: str):
    return resources.files("loanverbs.data").joinpath(name)


def default_lexicon(word_class: str, exclusions: bool = True) -> Lexicon:
    """The bundled lexicon for ``word_class``, with default exclusions."""
    with data_path(_DATA_FILES[word_class]).open(encoding="utf-8") as fh:
        lex = read_lexicon(fh, word_class)
    if exclusions:
        lex = lex.with_exclusions(default_exclusions())
    return lex


def default_exclusions() -> FrozenSet[str]:
    with data_path("exclusions.txt").open(encoding="utf-8") as fh:
        return _read_exclusions(fh)


def unused_exclusions(lexicon: Lexicon, exclusions: Iterable[str]) -> FrozenSet[str]:
    """Exclusions no entry of ``lexicon`` would generate (likely typos)."""
    attached = set()
    for e in lexicon.with_exclusions(exclusions):
        attached |= e.excluded_surfaces
    return frozenset(normalize(s) for s in exclusions) - attached


def validate_lexicon(lexicon: Lexicon, expected: Optional[Dict[str, int]] = None) -> List[str]:
    """Return a list of problems; empty means valid."""
    problems = []
    counts = lexicon.counts()
    for cls, n in (expected or {}).items():
        if counts.get(cls, 0) != n:
            problems.append(f"{cls}: expected {n} entries, found {counts.get(cls, 0)}")
    seen = Counter(e.key for e in lexicon)
    problems.extend(f"duplicate entry {k}" for k, n in seen.items() if n > 1)
    for e in lexicon:
        if not e.light_templates:
            problems.append(f"{e.base}: no light-verb templates")
        generated = e.paradigm_surfaces()
        stray = e.excluded_surfaces - generated
        if stray:
            problems.append(f"{e.base}: exclusions not in paradigm: {sorted(stray)}")
        if not generated - e.excluded_surfaces:
            problems.append(f"{e.base}: every integrated form is excluded")
    return problems


def validate_shipped() -> List[str]:
    lex = default_lexicon("loanword") + default_lexicon("native")
    problems = validate_lexicon(lex, EXPECTED_COUNTS)
    stray = unused_exclusions(lex, default_exclusions())
    if stray:
        problems.append(f"exclusions matching no entry: {sorted(stray)}")
    return problems


def discover_candidates(
    token_stream: Iterable[str],
    english_wordlist: Iterable[str],
    spanish_wordlist: Iterable[str],
    min_stem_length: int = MIN_STEM_LENGTH,
) -> List[CandidateReport]:
    """Find ``ENGLISH_WORD + -(e)ar`` tokens.

    Accepted candidates and tokens rejected for being Spanish words or for a
    too-short stem are all reported; tokens with no English stem are dropped.
    Sorted by frequency (descending), then surface.
    """
    english = english_wordlist if isinstance(english_wordlist, (set, frozenset)) else set(english_wordlist)
    spanish = spanish_wordlist if isinstance(spanish_wordlist, (set, frozenset)) else set(spanish_wordlist)
    freq = Counter(t for t in token_stream if t.endswith("ar"))
    reports = []
    for token, n in freq.items():
        report = classify_candidate(token, english, spanish, min_stem_length)
        if report is not None:
            reports.append(replace(report, frequency=n))
    reports.sort(key=lambda r: (-r.frequency, r.surface))
    return reports


def classify_candidate(token, english, spanish, min_stem_length=MIN_STEM_LENGTH) -> Optional[CandidateReport]:
    short = None
    for suffix in ("ar", "ear"):
        if not token.endswith(suffix):
            continue
        stem = token[: -len(suffix)]
        if stem not in english:
            continue
        if len(stem) < min_stem_length:
            short = short or stem
            continue
        reason = "in_spanish_dict" if token in spanish else None
        return CandidateReport(token, stem, 0, reason)
    if short is not None:
        return CandidateReport(token, short, 0, "stem_too_short")
    return None

