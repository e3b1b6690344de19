"""Pluggable text analyzers with lexicon-based defaults.

The pipeline only depends on the small interfaces defined here; the
bundled data files are deliberately tiny so the package stays
self-contained. Production deployments can point the loaders at richer
lexicons or vector tables without touching the feature code.

File formats:
  stopwords / easy words: one word per line
  POS lexicon:            ``term<TAB>TAG``
  affect lexicon:         ``term<TAB>emotion-or--<TAB>polarity-or--``
  vector table:           ``word v1 ... v300`` (space separated)
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

EMBEDDING_DIM = 300

POS_CATEGORIES = ("adj", "adv", "intj", "noun", "pron", "punct", "verb")
EMOTIONS = ("anger", "fear", "happiness", "sadness", "surprise")

_VOWELS = set("aeiouy")
_PUNCT_CHARS = set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~«»¡¿…–—")


def _data_path(name: str) -> Path:
    return Path(resources.files("wikiguard.data") / name)


def _read_lines(path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    return [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]


def load_wordlist(path) -> frozenset[str]:
    return frozenset(word.lower() for word in _read_lines(path))


@lru_cache(maxsize=None)
def default_stopwords() -> frozenset[str]:
    return load_wordlist(_data_path("stopwords.txt"))


@lru_cache(maxsize=None)
def default_easy_words() -> frozenset[str]:
    return load_wordlist(_data_path("easy_words.txt"))


def count_syllables(word: str) -> int:
    """Vowel-group heuristic: contiguous vowel runs, silent final 'e' dropped."""
    word = word.lower()
    groups = 0
    prev_vowel = False
    for ch in word:
        is_vowel = ch in _VOWELS
        if is_vowel and not prev_vowel:
            groups += 1
        prev_vowel = is_vowel
    if word.endswith("e") and not word.endswith(("le", "ee")) and groups > 1:
        groups -= 1
    return max(groups, 1) if any(ch in _VOWELS for ch in word) else 0


def is_punctuation(token: str) -> bool:
    return bool(token) and all(ch in _PUNCT_CHARS for ch in token)


def strip_edge_punctuation(token: str) -> str:
    return token.strip("".join(_PUNCT_CHARS))


class LexiconPosTagger:
    """Dictionary tagger over lowercase tokens.

    Pure punctuation tags PUNCT, digit-bearing tokens NUM, ``-ly`` words
    ADV; anything unknown falls back to NOUN, the conventional default.
    """

    def __init__(self, lexicon: dict[str, str]):
        self.lexicon = lexicon

    def tag(self, token: str) -> str:
        if is_punctuation(token):
            return "PUNCT"
        core = strip_edge_punctuation(token).lower()
        if not core:
            return "PUNCT"
        if any(ch.isdigit() for ch in core):
            return "NUM"
        known = self.lexicon.get(core)
        if known:
            return known
        if core.endswith("ly") and len(core) > 4:
            return "ADV"
        return "NOUN"


def load_pos_lexicon(path) -> LexiconPosTagger:
    lexicon = {}
    for line in _read_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ConfigurationError(f"bad POS lexicon line: {line!r}")
        lexicon[parts[0].lower()] = parts[1].upper()
    return LexiconPosTagger(lexicon)


@lru_cache(maxsize=None)
def default_pos_tagger() -> LexiconPosTagger:
    return load_pos_lexicon(_data_path("pos_lexicon.tsv"))


_IRREGULAR_LEMMAS = {
    "is": "be", "are": "be", "was": "be", "were": "be", "been": "be", "being": "be", "am": "be",
    "has": "have", "had": "have", "having": "have",
    "does": "do", "did": "do", "done": "do",
    "goes": "go", "went": "go", "gone": "go",
    "ran": "run", "made": "make", "said": "say", "saw": "see", "seen": "see",
    "took": "take", "taken": "take", "gave": "give", "given": "give",
    "wrote": "write", "written": "write", "got": "get", "gotten": "get",
    "children": "child", "men": "man", "women": "woman", "feet": "foot",
    "mice": "mouse", "people": "person", "cities": "city", "better": "good", "worse": "bad",
}

_NO_UNDOUBLE = set("sl")


class RuleLemmatizer:
    """Suffix-stripping lemmatizer iterated to a fixed point.

    The fixed-point loop makes the mapping idempotent by construction,
    which the preprocessing contract relies on; the price is the odd
    over-stripped stem, acceptable for a lexicon-based default.
    """

    def __init__(self, irregular: dict[str, str] | None = None):
        self.irregular = dict(_IRREGULAR_LEMMAS if irregular is None else irregular)

    def lemma(self, token: str) -> str:
        word = token.lower()
        for _ in range(4):
            reduced = self._step(word)
            if reduced == word:
                return word
            word = reduced
        return word

    def _step(self, word: str) -> str:
        if word in self.irregular:
            return self.irregular[word]
        if len(word) > 4 and word.endswith("ies"):
            return word[:-3] + "y"
        if len(word) > 4 and word.endswith("es") and word[-3] in "sxzo":
            return word[:-2]
        if len(word) > 3 and word.endswith("s") and not word.endswith(("ss", "us", "is")):
            return word[:-1]
        if len(word) >= 6 and word.endswith("ing"):
            return self._undouble(word[:-3], word)
        if len(word) >= 5 and word.endswith("ed"):
            return self._undouble(word[:-2], word)
        return word

    def _undouble(self, stem: str, original: str) -> str:
        if len(stem) < 3:
            return original
        if (
            len(stem) >= 4
            and stem[-1] == stem[-2]
            and stem[-1] not in _VOWELS
            and stem[-1] not in _NO_UNDOUBLE
        ):
            return stem[:-1]
        return stem


@lru_cache(maxsize=None)
def default_lemmatizer() -> RuleLemmatizer:
    return RuleLemmatizer()


class AffectLexicon:
    """Term-level emotion tags and polarity scores."""

    def __init__(self, emotions: dict[str, str], polarity: dict[str, float]):
        self.emotions = emotions
        self.polarity = polarity

    def emotion_of(self, token: str) -> str | None:
        return self.emotions.get(token)

    def polarity_of(self, token: str) -> float | None:
        return self.polarity.get(token)


def load_affect_lexicon(path) -> AffectLexicon:
    emotions: dict[str, str] = {}
    polarity: dict[str, float] = {}
    for line in _read_lines(path):
        parts = line.split("\t")
        if len(parts) != 3:
            raise ConfigurationError(f"bad affect lexicon line: {line!r}")
        term, emotion, score = parts[0].lower(), parts[1].lower(), parts[2]
        if emotion != "-":
            if emotion not in EMOTIONS:
                raise ConfigurationError(f"unknown emotion {emotion!r} for term {term!r}")
            emotions[term] = emotion
        if score != "-":
            try:
                polarity[term] = float(score)
            except ValueError as exc:
                raise ConfigurationError(f"bad polarity for term {term!r}: {score!r}") from exc
    return AffectLexicon(emotions, polarity)


@lru_cache(maxsize=None)
def default_affect_lexicon() -> AffectLexicon:
    return load_affect_lexicon(_data_path("affect_lexicon.tsv"))


class VectorTable:
    """Word to 300-dimensional embedding lookup."""

    def __init__(self, table: dict[str, np.ndarray]):
        self.table = table

    def __contains__(self, word: str) -> bool:
        return word in self.table

    def get(self, word: str):
        return self.table.get(word)


def load_vector_table(path) -> VectorTable:
    table: dict[str, np.ndarray] = {}
    for line in _read_lines(path):
        parts = line.split()
        word, values = parts[0], parts[1:]
        if len(values) != EMBEDDING_DIM:
            raise ConfigurationError(
                f"vector for {word!r} has {len(values)} dims, expected {EMBEDDING_DIM}"
            )
        table[word.lower()] = np.array([float(v) for v in values], dtype=np.float64)
    return VectorTable(table)


@lru_cache(maxsize=None)
def default_vector_table() -> VectorTable:
    return load_vector_table(_data_path("vectors.txt"))


def flesch_reading_ease(n_words: int, n_sentences: int, n_syllables: int) -> float:
    if n_words == 0 or n_sentences == 0:
        return 0.0
    return 206.835 - 1.015 * (n_words / n_sentences) - 84.6 * (n_syllables / n_words)


def mcalpine_eflaw(n_words: int, n_miniwords: int, n_sentences: int) -> float:
    if n_words == 0 or n_sentences == 0:
        return 0.0
    return (n_words + n_miniwords) / n_sentences


READING_SECONDS_PER_CHAR = 14.69 / 1000.0


def reading_time_seconds(n_chars: int) -> float:
    return n_chars * READING_SECONDS_PER_CHAR
