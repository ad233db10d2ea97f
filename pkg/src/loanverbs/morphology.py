"""Spanish verb paradigms for the three indicative tenses the matcher searches.

Only present, preterite and imperfect indicative are generated. Irregular
cells come from the bundled ``verbs.tsv`` table and replace the regular
cells they cover.
"""
from __future__ import annotations

import csv
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

TENSES = ("present", "preterite", "imperfect")
CELLS = ((1, "sg"), (2, "sg"), (3, "sg"), (1, "pl"), (2, "pl"), (3, "pl"))

Cell = Tuple[str, int, str]

# closed class of light verbs; membership is what conjugate_light_verb accepts
LIGHT_VERBS = frozenset({
    "hacer", "dar", "tomar", "poner", "tener", "echar", "mandar", "enviar",
    "pedir", "subir", "estar", "ser", "actuar", "buscar", "tirar",
})

_SUFFIXES = {
    "ar": {
        "present": ("o", "as", "a", "amos", "áis", "an"),
        "preterite": ("é", "aste", "ó", "amos", "asteis", "aron"),
        "imperfect": ("aba", "abas", "aba", "ábamos", "abais", "aban"),
    },
    "er": {
        "present": ("o", "es", "e", "emos", "éis", "en"),
        "preterite": ("í", "iste", "ió", "imos", "isteis", "ieron"),
        "imperfect": ("ía", "ías", "ía", "íamos", "íais", "ían"),
    },
    "ir": {
        "present": ("o", "es", "e", "imos", "ís", "en"),
        "preterite": ("í", "iste", "ió", "imos", "isteis", "ieron"),
        "imperfect": ("ía", "ías", "ía", "íamos", "íais", "ían"),
    },
}

# stem-final consonant respelled before a front "é"
_ORTHO = {"c": "qu", "g": "gu", "z": "c"}


class NotAVerb(ValueError):
    pass


class UnknownLightVerb(KeyError):
    pass


@dataclass(frozen=True)
class InflectedForm:
    lemma: str
    tense: str
    person: int
    number: str
    surface: str


@dataclass(frozen=True)
class VerbParadigm:
    conjugation_class: str
    stem: str
    overrides: Tuple[Tuple[Cell, str], ...] = ()
    orthographic_rules_applied: bool = False


def normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text).lower()


def split_lemma(lemma: str) -> Tuple[str, str]:
    """Return ``(stem, conjugation_class)`` or raise :class:`NotAVerb`."""
    lemma = normalize(lemma.strip())
    for cls in ("ar", "er", "ir"):
        if lemma.endswith(cls) and len(lemma) > 2:
            return lemma[: -2], cls
    raise NotAVerb(lemma)


def _attach(stem: str, suffix: str) -> Tuple[str, bool]:
    if suffix.startswith("é") and stem and stem[-1] in _ORTHO:
        return stem[:-1] + _ORTHO[stem[-1]] + suffix, True
    return stem + suffix, False


def paradigm(lemma: str, overrides: Optional[Mapping[Cell, str]] = None) -> Dict[Cell, str]:
    """All 18 cells of ``lemma`` keyed by ``(tense, person, number)``.

    Unlike :func:`inflect` this keeps syncretic cells (e.g. ``compramos`` in
    both present and preterite).
    """
    stem, cls = split_lemma(lemma)
    cells: Dict[Cell, str] = {}
    for tense in TENSES:
        for (person, number), suffix in zip(CELLS, _SUFFIXES[cls][tense]):
            cells[(tense, person, number)] = _attach(stem, suffix)[0]
    for key, surface in (overrides or {}).items():
        if key not in cells:
            raise KeyError(f"override cell {key!r} outside the generated tenses")
        cells[key] = normalize(surface)
    return cells


def build_paradigm(lemma: str, overrides: Optional[Mapping[Cell, str]] = None) -> VerbParadigm:
    stem, cls = split_lemma(lemma)
    applied = any(_attach(stem, s)[1] for s in _SUFFIXES[cls]["preterite"])
    return VerbParadigm(cls, stem, tuple(sorted((overrides or {}).items())), applied)


def inflect(lemma: str, overrides: Optional[Mapping[Cell, str]] = None) -> List[InflectedForm]:
    """Inflected forms of ``lemma``, deduplicated by surface (first cell wins)."""
    lemma_n = normalize(lemma.strip())
    seen = set()
    out = []
    for (tense, person, number), surface in paradigm(lemma_n, overrides).items():
        if surface in seen:
            continue
        seen.add(surface)
        out.append(InflectedForm(lemma_n, tense, person, number, surface))
    return out


def load_verb_table(path=None) -> Dict[str, Dict[Cell, str]]:
    """Read an irregular-verb TSV (lemma, tense, person, number, surface)."""
    if path is None:
        handle = resources.files("loanverbs.data").joinpath("verbs.tsv").open(encoding="utf-8")
    else:
        handle = open(path, encoding="utf-8")
    table: Dict[str, Dict[Cell, str]] = {}
    with handle:
        for row in csv.reader(handle, delimiter="\t"):
            if not row or row[0].startswith("#"):
                continue
            lemma, tense, person, number, surface = row
            if tense not in TENSES or number not in ("sg", "pl"):
                raise ValueError(f"bad verb table row: {row!r}")
            table.setdefault(normalize(lemma), {})[(tense, int(person), number)] = normalize(surface)
    return table


@lru_cache(maxsize=1)
def default_verb_table() -> Dict[str, Dict[Cell, str]]:
    return load_verb_table()


def overrides_for(lemma: str, table: Optional[Mapping[str, Mapping[Cell, str]]] = None) -> Mapping[Cell, str]:
    table = default_verb_table() if table is None else table
    return table.get(normalize(lemma), {})


def conjugate_light_verb(light_lemma: str, table=None) -> List[InflectedForm]:
    lemma = normalize(light_lemma)
    if lemma not in LIGHT_VERBS:
        raise UnknownLightVerb(light_lemma)
    return inflect(lemma, overrides_for(lemma, table))


def surfaces(forms: Iterable[InflectedForm]) -> List[str]:
    return [f.surface for f in forms]


class EmptySurfaceSet(ValueError):
    pass


@dataclass(frozen=True)
class LightPattern:
    """Conjugated heads of one template plus the token tails that may follow."""

    heads: frozenset
    tails: Tuple[Tuple[str, ...], ...]
    reflexive: bool = False


@dataclass(frozen=True)
class SurfaceFormSet:
    integrated: frozenset
    light: frozenset
    patterns: Tuple[LightPattern, ...]
    reflexive: bool = False


def expand_entry(entry, table=None) -> SurfaceFormSet:
    generated = set()
    for lemma in entry.lemmas:
        generated.update(surfaces(inflect(lemma, overrides_for(lemma, table))))
    integrated = frozenset(generated) - entry.excluded_surfaces
    if not integrated:
        raise EmptySurfaceSet(entry.base)
    patterns = []
    phrases = set()
    for tpl in entry.light_templates:
        heads = frozenset(surfaces(conjugate_light_verb(tpl.light_lemma, table)))
        tails = tuple(tpl.tails())
        patterns.append(LightPattern(heads, tails, tpl.reflexive))
        phrases.update(" ".join((h,) + t) for h in heads for t in tails)
    light = frozenset(phrases)
    if integrated & light:
        raise ValueError(f"{entry.base}: surface in both integrated and light sets")
    return SurfaceFormSet(integrated, light, tuple(patterns), entry.reflexive)


def expand_lexicon(lexicon, table=None) -> Dict[object, SurfaceFormSet]:
    """Map every lexicon entry to its searchable surface forms (insertion ordered)."""
    return {entry: expand_entry(entry, table) for entry in lexicon}
