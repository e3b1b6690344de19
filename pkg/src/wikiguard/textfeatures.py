"""Side and content features computed from revision text.

Staged preprocessing: URLs are counted and removed first, side features
are computed on the resulting text, then tokens are lemmatized and
numbers / punctuation / stop-words are dropped to obtain the content
view used by affect, embedding and n-gram extraction.
"""

from __future__ import annotations

import math
import re
import statistics
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import analyzers
from .analyzers import EMOTIONS, POS_CATEGORIES
from .errors import CalibrationError

URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
SENTENCE_SPLIT_RE = re.compile(r"[.!?]+")
_WS_RE = re.compile(r"\s+")


@dataclass
class CleanTextStages:
    """Intermediate text views produced by :func:`preprocess`."""

    raw: str
    side_ready: str
    n_urls: int
    side_tokens: list[str]
    sentences: list[str]
    lemmatized: list[str]
    content_sentences: list[list[str]]
    content_ready: list[str]


@dataclass
class SideFeatures:
    n_chars: int
    n_words: int
    n_difficult_words: int
    n_urls: int
    pos_ratios: dict[str, float]
    reading_time: float
    flesch: float
    mcalpine_eflaw: float


@dataclass
class ContentFeatures:
    emotion: dict[str, float]
    polarity: float
    embedding: np.ndarray
    ngram_counts: dict[str, int]


@dataclass
class NGramExtractorState:
    """Online n-gram extractor: growing vocabulary plus per-sentence cap."""

    n: int = 1
    per_sentence_cap: int | None = None
    vocabulary: dict[str, int] = field(default_factory=dict)


def split_sentences(text: str) -> list[str]:
    return [part.strip() for part in SENTENCE_SPLIT_RE.split(text) if part.strip()]


def _clean_token(token: str, stopwords, lemmatizer) -> str | None:
    core = token.lower()
    if any(ch.isdigit() for ch in core):
        return None
    alpha = "".join(ch for ch in core if ch.isalpha())
    if not alpha or alpha in stopwords:
        return None
    lemma = lemmatizer.lemma(alpha)
    if not lemma or lemma in stopwords:
        return None
    return lemma


def preprocess(raw: str, stopwords=None, lemmatizer=None) -> CleanTextStages:
    """Run the staged cleanup; empty text yields empty stages."""
    stopwords = analyzers.default_stopwords() if stopwords is None else stopwords
    lemmatizer = analyzers.default_lemmatizer() if lemmatizer is None else lemmatizer

    n_urls = len(URL_RE.findall(raw))
    side_ready = _WS_RE.sub(" ", URL_RE.sub(" ", raw)).strip()
    side_tokens = side_ready.split()
    sentences = split_sentences(side_ready)

    content_sentences = []
    lemmatized: list[str] = []
    for sentence in sentences:
        cleaned = []
        for token in sentence.split():
            core = analyzers.strip_edge_punctuation(token).lower()
            if core and not analyzers.is_punctuation(core):
                lemmatized.append(lemmatizer.lemma(core))
            lemma = _clean_token(token, stopwords, lemmatizer)
            if lemma is not None:
                cleaned.append(lemma)
        content_sentences.append(cleaned)
    content_ready = [token for sentence in content_sentences for token in sentence]

    return CleanTextStages(
        raw=raw,
        side_ready=side_ready,
        n_urls=n_urls,
        side_tokens=side_tokens,
        sentences=sentences,
        lemmatized=lemmatized,
        content_sentences=content_sentences,
        content_ready=content_ready,
    )


def side_counts(stages: CleanTextStages, easy_words=None) -> tuple[int, int, int, int]:
    """(n_chars, n_words, n_difficult_words, n_urls) over the side text."""
    easy_words = analyzers.default_easy_words() if easy_words is None else easy_words
    n_chars = len(stages.side_ready)
    n_words = len(stages.side_tokens)
    n_difficult = 0
    for token in stages.side_tokens:
        core = analyzers.strip_edge_punctuation(token).lower()
        if core and core.isalpha() and core not in easy_words:
            if analyzers.count_syllables(core) >= 3:
                n_difficult += 1
    return n_chars, n_words, n_difficult, stages.n_urls


def pos_ratios(stages: CleanTextStages, tagger=None) -> dict[str, float]:
    """Share of tokens per reported POS category; all zero on empty text."""
    tagger = analyzers.default_pos_tagger() if tagger is None else tagger
    total = len(stages.side_tokens)
    counts = Counter()
    for token in stages.side_tokens:
        tag = tagger.tag(token).lower()
        if tag in POS_CATEGORIES:
            counts[tag] += 1
    if total == 0:
        return {category: 0.0 for category in POS_CATEGORIES}
    return {category: counts[category] / total for category in POS_CATEGORIES}


def readability(stages: CleanTextStages) -> tuple[float, float, float]:
    """(reading_time_s, flesch, mcalpine_eflaw); zeros on empty text."""
    n_chars = len(stages.side_ready)
    words = [analyzers.strip_edge_punctuation(t).lower() for t in stages.side_tokens]
    words = [w for w in words if w]
    n_words = len(words)
    n_sentences = len(stages.sentences)
    n_syllables = sum(analyzers.count_syllables(w) for w in words)
    n_mini = sum(1 for w in words if len(w) <= 3)
    return (
        analyzers.reading_time_seconds(n_chars),
        analyzers.flesch_reading_ease(n_words, n_sentences, n_syllables),
        analyzers.mcalpine_eflaw(n_words, n_mini, n_sentences),
    )


def affect(stages: CleanTextStages, lexicon=None) -> tuple[dict[str, float], float]:
    """Emotion loads normalized jointly over matched terms; mean polarity."""
    lexicon = analyzers.default_affect_lexicon() if lexicon is None else lexicon
    emotion_counts = Counter()
    polarities = []
    for token in stages.content_ready:
        emotion = lexicon.emotion_of(token)
        if emotion is not None:
            emotion_counts[emotion] += 1
        score = lexicon.polarity_of(token)
        if score is not None:
            polarities.append(score)
    matched = sum(emotion_counts.values())
    loads = {
        emotion: (emotion_counts[emotion] / matched if matched else 0.0)
        for emotion in EMOTIONS
    }
    polarity = float(np.clip(np.mean(polarities), -1.0, 1.0)) if polarities else 0.0
    return loads, polarity


def embed_average(stages: CleanTextStages, table=None) -> np.ndarray:
    """Mean embedding of in-vocabulary content tokens; zero vector if none."""
    table = analyzers.default_vector_table() if table is None else table
    vectors = [table.get(token) for token in stages.content_ready]
    vectors = [v for v in vectors if v is not None]
    if not vectors:
        return np.zeros(analyzers.EMBEDDING_DIM, dtype=np.float64)
    return np.mean(vectors, axis=0)


def _sentence_grams(tokens: list[str], n: int) -> list[str]:
    if n <= 1:
        return list(tokens)
    return ["_".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def calibrate_ngram_cap(cold_stages: list[CleanTextStages], n: int = 1) -> int:
    """Median distinct-gram count per sentence over the cold start.

    Rounded half-up, floored at 1. Raises when the window holds no
    sentences at all.
    """
    distinct_counts = []
    for stages in cold_stages:
        for tokens in stages.content_sentences:
            distinct_counts.append(len(set(_sentence_grams(tokens, n))))
    if not distinct_counts:
        raise CalibrationError("no sentences in cold-start window")
    median = statistics.median(distinct_counts)
    return max(1, math.floor(median + 0.5))


def extract_ngrams(stages: CleanTextStages, state: NGramExtractorState) -> dict[str, int]:
    """Keep the cap highest-frequency grams per sentence; grow the vocabulary.

    Ties at the cap break by higher frequency first, then lexicographic
    order. Returns the per-event counts; cumulative counts accumulate in
    ``state.vocabulary``.
    """
    if state.per_sentence_cap is None:
        raise CalibrationError("n-gram cap not calibrated")
    event_counts: dict[str, int] = {}
    for tokens in stages.content_sentences:
        counts = Counter(_sentence_grams(tokens, state.n))
        kept = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[: state.per_sentence_cap]
        for term, count in kept:
            event_counts[term] = event_counts.get(term, 0) + count
            state.vocabulary[term] = state.vocabulary.get(term, 0) + count
    return event_counts
