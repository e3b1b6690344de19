"""End-to-end stream pipeline: featurize -> select -> predict -> learn.

One pipeline instance owns the feature engine (text stages, n-gram
state, entity histories), the variance selector, one online model, the
per-feature quantile history for explanations, and the prediction log
that feeds the feedback loop. Both the offline evaluation runner and
the HTTP service drive this same object, which is what makes service
replays byte-identical to offline runs.
"""

from __future__ import annotations

import logging
import pickle
import time
from array import array
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import textfeatures
from .errors import (
    CalibrationError,
    DuplicateFeedbackError,
    UnknownEventError,
)
from .events import WikiEvent
from .history import HistoryStore, historical_feature_names
from .models import BEST_PARAMS, grid_search_cold_start, make_model
from .selection import (
    DEFAULT_COLD_START_FRACTION,
    DEFAULT_PERCENTILE,
    SelectorState,
    VarianceTracker,
    calibrate_threshold,
)
from .textfeatures import NGramExtractorState, preprocess

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1

EMOTION_KEYS = tuple(f"emotion_{e}" for e in ("anger", "fear", "happiness", "sadness", "surprise"))
POS_KEYS = tuple(f"pos_{c}" for c in ("adj", "adv", "intj", "noun", "pron", "punct", "verb"))

N_SIDE_GROUPS = 5
N_CONTENT_GROUPS = 4
N_HISTORICAL = 80


@dataclass
class FeatureParts:
    """Engineered vector plus the scalar projections fed to history."""

    vector: dict[str, float]
    base_scalars: list[float]
    census: dict[str, int]


@dataclass
class ProcessResult:
    event_id: str
    vector: dict[str, float]
    selected: dict[str, float]
    proba: dict[int, float]
    predicted: int
    confidence: float
    featurize_s: float
    select_s: float
    predict_s: float


@dataclass
class StoredPrediction:
    event_id: str
    index: int
    epoch: float
    user_id: str
    page_id: str
    content: str
    truth: Optional[int]
    predicted: int
    proba_1: float
    confidence: float
    selected: dict[str, float]
    revert_flag: bool
    feedback: Optional["FeedbackRecord"] = None


@dataclass
class FeedbackRecord:
    event_id: str
    expert_label: int
    prior_prediction: int
    timestamp: str
    applied: bool = False


@dataclass
class PipelineConfig:
    model_id: str = "arfc"
    model_params: Optional[dict] = None
    seed: int = 0
    cold_start_fraction: float = DEFAULT_COLD_START_FRACTION
    percentile: float = DEFAULT_PERCENTILE
    probe: str = "quality"  # "quality" probes the event probability maps, "all" everything
    ngram_n: int = 1
    # shipped default cap for live mode, where no calibration window exists;
    # the reference calibration on wiki data also lands on 4
    default_ngram_cap: int = 4
    live_cold_start_n: int = 50
    track_quantiles: bool = True
    keep_records: bool = True


class QuantileStore:
    """Full per-feature value history with interpolated quartiles."""

    def __init__(self):
        self.values: dict[str, array] = {}

    def add_vector(self, vector: dict[str, float]) -> None:
        values = self.values
        for feature, value in vector.items():
            column = values.get(feature)
            if column is None:
                column = array("d")
                values[feature] = column
            column.append(value)

    def count(self, feature: str) -> int:
        column = self.values.get(feature)
        return len(column) if column else 0

    def quartiles(self, feature: str):
        column = self.values.get(feature)
        if not column:
            return None
        q1, q2, q3 = np.percentile(np.frombuffer(column, dtype=np.float64), [25.0, 50.0, 75.0])
        return float(q1), float(q2), float(q3)


class FeatureEngine:
    """Stateless text analysis plus the stateful n-gram and history parts."""

    def __init__(
        self,
        ngram_n: int = 1,
        ngram_cap: int | None = None,
        stopwords=None,
        lemmatizer=None,
        tagger=None,
        affect_lexicon=None,
        vector_table=None,
        easy_words=None,
        history: HistoryStore | None = None,
    ):
        self.stopwords = stopwords
        self.lemmatizer = lemmatizer
        self.tagger = tagger
        self.affect_lexicon = affect_lexicon
        self.vector_table = vector_table
        self.easy_words = easy_words
        self.ngram_state = NGramExtractorState(n=ngram_n, per_sentence_cap=ngram_cap)
        self.history = history if history is not None else HistoryStore()

    def preprocess(self, text: str) -> textfeatures.CleanTextStages:
        return preprocess(text, stopwords=self.stopwords, lemmatizer=self.lemmatizer)

    def calibrate_ngram_cap(self, cold_texts: list[str]) -> int:
        stages = [self.preprocess(text) for text in cold_texts]
        cap = textfeatures.calibrate_ngram_cap(stages, n=self.ngram_state.n)
        self.ngram_state.per_sentence_cap = cap
        return cap

    def featurize(self, event: WikiEvent) -> FeatureParts:
        """Compute the full engineered vector; updates history and n-grams.

        Entity histories are snapshotted before this event is folded in,
        so the 80 historical features never see the current sample.

        History scalar projections for the 19 base feature groups:
        char count, mean POS ratio, reading time, flesch, eflaw, mean
        emotion load, polarity, mean embedding component, retained-gram
        total, the four flags, size diff, and the ``ok`` / damaging-true
        / grade-a probabilities (repeated for the second dataset's
        quality slots so the 80-value layout stays fixed).
        """
        stages = self.preprocess(event.content)
        n_chars, n_words, n_difficult, n_urls = textfeatures.side_counts(stages, self.easy_words)
        ratios = textfeatures.pos_ratios(stages, self.tagger)
        reading_time, flesch, eflaw = textfeatures.readability(stages)
        emotion, polarity = textfeatures.affect(stages, self.affect_lexicon)
        embedding = textfeatures.embed_average(stages, self.vector_table)
        ngram_counts = textfeatures.extract_ngrams(stages, self.ngram_state)

        vector: dict[str, float] = {
            "n_chars": float(n_chars),
            "n_words": float(n_words),
            "n_difficult_words": float(n_difficult),
            "n_urls": float(n_urls),
        }
        for key, category in zip(POS_KEYS, ("adj", "adv", "intj", "noun", "pron", "punct", "verb")):
            vector[key] = ratios[category]
        vector["reading_time"] = reading_time
        vector["flesch"] = flesch
        vector["mcalpine_eflaw"] = eflaw

        vector["bot"] = float(event.bot_flag)
        vector["deleted"] = float(event.deleted_flag)
        vector["new"] = float(event.new_flag)
        vector["revert"] = float(event.revert_flag)
        vector["size_diff"] = float(event.size_diff)
        if event.article_quality is not None:
            for key, value in event.article_quality.items():
                vector[f"aq_{key}"] = value
        if event.edit_quality is not None:
            for key, value in event.edit_quality.items():
                vector[f"eq_{key}"] = value
        if event.review_quality is not None:
            for key, value in event.review_quality.items():
                vector[f"rq_{key}"] = value

        aq_ok = event.article_quality["ok"] if event.article_quality else 0.0
        eq_damaging = event.edit_quality["damaging_true"] if event.edit_quality else 0.0
        rq_a = event.review_quality["a"] if event.review_quality else 0.0
        base_scalars = [
            float(n_chars),
            sum(ratios.values()) / len(ratios),
            reading_time,
            flesch,
            eflaw,
            sum(emotion.values()) / len(emotion),
            polarity,
            float(np.mean(embedding)),
            float(sum(ngram_counts.values())),
            float(event.bot_flag),
            float(event.deleted_flag),
            float(event.new_flag),
            float(event.revert_flag),
            float(event.size_diff),
            aq_ok,
            eq_damaging,
            rq_a,
            aq_ok,
            eq_damaging,
        ]

        historical = self.history.snapshot_then_update(
            event.user_id, event.page_id, base_scalars, event.epoch, spam=event.revert_flag
        )
        vector.update(historical)

        for key, load in zip(EMOTION_KEYS, emotion.values()):
            vector[key] = load
        vector["polarity"] = polarity
        for term, count in ngram_counts.items():
            vector[f"ng_{term}"] = float(count)
        for i, value in enumerate(embedding):
            vector[f"emb_{i:03d}"] = float(value)

        census = {
            "side_groups": N_SIDE_GROUPS,
            "content_groups": N_CONTENT_GROUPS,
            "historical": len(historical),
            "ngram_dims": len(ngram_counts),
        }
        return FeatureParts(vector=vector, base_scalars=base_scalars, census=census)


def probe_feature_ids(feature_ids, mode: str) -> set[str]:
    """Probe set for threshold calibration: event quality probabilities."""
    if mode == "all":
        return set(feature_ids)
    return {f for f in feature_ids if f.startswith(("aq_", "eq_", "rq_"))}


class StreamPipeline:
    """Single-writer pipeline; callers serialize access in stream order."""

    def __init__(self, config: PipelineConfig | None = None):
        self.config = config or PipelineConfig()
        self.engine = FeatureEngine(
            ngram_n=self.config.ngram_n,
            ngram_cap=None,
        )
        params = self.config.model_params
        if params is None:
            params = BEST_PARAMS[self.config.model_id]
        self.model_params = dict(params)
        self.model = make_model(self.config.model_id, seed=self.config.seed, **self.model_params)
        self.selector: SelectorState | None = None
        self.quantiles = QuantileStore() if self.config.track_quantiles else None
        self.prediction_log: dict[str, StoredPrediction] = {}
        self.user_events: dict[str, list[str]] = {}
        self.feedback_log: list[FeedbackRecord] = []
        self.applied_feedback_count = 0
        self.samples_seen = 0
        self._last_epoch: float | None = None
        self._cold_buffer: list[dict[str, float]] = []

    # -- calibration -----------------------------------------------------------

    @property
    def calibrated(self) -> bool:
        return self.selector is not None

    def calibrate(self, cold_events: list[WikiEvent], grid_search: bool = False) -> dict:
        """Consume the cold-start window: n-gram cap, variance threshold,
        and optionally the hyperparameter sweep.

        Cold events feed the calibrators (and the entity histories, which
        are feature engineering, not training); the model itself starts
        fresh afterwards.
        """
        if not cold_events:
            raise CalibrationError("empty cold-start window")
        cap = self.engine.calibrate_ngram_cap([e.content for e in cold_events])

        vectors = []
        labels = []
        for event in cold_events:
            event = self.admit_event(event)
            parts = self.engine.featurize(event)
            vectors.append(parts.vector)
            labels.append(event.label)
            if self.quantiles is not None:
                self.quantiles.add_vector(parts.vector)
            self._last_epoch = event.epoch

        observed = set()
        for vector in vectors:
            observed.update(vector)
        probes = probe_feature_ids(observed, self.config.probe)
        tracker = VarianceTracker()
        threshold = calibrate_threshold(vectors, probes, self.config.percentile, tracker=tracker)
        self.selector = SelectorState(
            threshold=threshold, tracker=tracker, cold_start_fraction=self.config.cold_start_fraction
        )

        report = {
            "cold_samples": len(cold_events),
            "ngram_cap": cap,
            "threshold": threshold,
            "probe_features": sorted(probes),
        }
        if grid_search:
            if any(label is None for label in labels):
                raise CalibrationError("grid search requires a labeled cold start")
            scratch = SelectorState(threshold=threshold)
            selected_seq = [scratch.update_and_select(v) for v in vectors]
            best, accuracy = grid_search_cold_start(
                self.config.model_id,
                list(zip(selected_seq, labels)),
                seed=self.config.seed,
            )
            self.model_params = dict(best)
            self.model = make_model(self.config.model_id, seed=self.config.seed, **best)
            report["grid_best"] = best
            report["grid_accuracy"] = accuracy
        return report

    # -- the per-sample path -----------------------------------------------------

    def process(self, event: WikiEvent) -> ProcessResult:
        """Featurize, select and predict one event (no training).

        Events are admitted in arrival order; a regressive timestamp (as
        at a scenario-1 class-block boundary) is clamped to the stream's
        high-water mark so the entity accumulators stay consistent.
        """
        event = self.admit_event(event)
        t0 = time.perf_counter()
        parts = self.engine.featurize(event)
        if self.quantiles is not None:
            self.quantiles.add_vector(parts.vector)
        t1 = time.perf_counter()
        selected = self.selector.update_and_select(parts.vector) if self.selector else {}
        t2 = time.perf_counter()
        proba = self.model.predict_proba_one(selected)
        predicted = 1 if proba[1] > proba[0] else 0
        confidence = proba[predicted]
        t3 = time.perf_counter()

        self.samples_seen += 1
        self._last_epoch = event.epoch
        result = ProcessResult(
            event_id=event.event_id,
            vector=parts.vector,
            selected=selected,
            proba=proba,
            predicted=predicted,
            confidence=confidence,
            featurize_s=t1 - t0,
            select_s=t2 - t1,
            predict_s=t3 - t2,
        )
        if self.config.keep_records:
            stored = StoredPrediction(
                event_id=event.event_id,
                index=self.samples_seen,
                epoch=event.epoch,
                user_id=event.user_id,
                page_id=event.page_id,
                content=event.content,
                truth=event.label,
                predicted=predicted,
                proba_1=proba[1],
                confidence=confidence,
                selected=selected,
                revert_flag=event.revert_flag,
            )
            self.prediction_log[event.event_id] = stored
            self.user_events.setdefault(event.user_id, []).append(event.event_id)
        return result

    def learn(self, selected: dict[str, float], label: int) -> None:
        self.model.learn_one(selected, label)

    # -- live (service) mode ------------------------------------------------------

    def admit_event(self, event: WikiEvent) -> WikiEvent:
        """Clamp regressive timestamps so stream order is preserved."""
        if self._last_epoch is not None and event.epoch < self._last_epoch:
            logger.warning(
                "event %s timestamp regresses (%.3f < %.3f); clamping",
                event.event_id,
                event.epoch,
                self._last_epoch,
            )
            stamped = datetime.fromtimestamp(self._last_epoch, tz=timezone.utc)
            return event.model_copy(update={"timestamp": stamped})
        return event

    def handle_live(self, event: WikiEvent) -> ProcessResult:
        """Service-mode handling: admit, cold-start calibrate, predict, train.

        The first ``live_cold_start_n`` events calibrate the variance
        threshold (the n-gram cap uses the shipped default); labeled
        events after that train immediately, prequentially.
        """
        event = self.admit_event(event)
        if self.engine.ngram_state.per_sentence_cap is None:
            self.engine.ngram_state.per_sentence_cap = self.config.default_ngram_cap

        if not self.calibrated:
            result = self.process(event)
            self._cold_buffer.append(result.vector)
            if len(self._cold_buffer) >= self.config.live_cold_start_n:
                self._calibrate_from_buffer()
            return result

        result = self.process(event)
        if event.label is not None:
            self.learn(result.selected, event.label)
        return result

    def _calibrate_from_buffer(self) -> None:
        observed = set()
        for vector in self._cold_buffer:
            observed.update(vector)
        probes = probe_feature_ids(observed, self.config.probe)
        tracker = VarianceTracker()
        threshold = calibrate_threshold(
            self._cold_buffer, probes, self.config.percentile, tracker=tracker
        )
        self.selector = SelectorState(
            threshold=threshold,
            tracker=tracker,
            cold_start_fraction=self.config.cold_start_fraction,
        )
        self._cold_buffer = []

    # -- feedback -------------------------------------------------------------------

    def record_feedback(self, event_id: str, expert_label: int) -> FeedbackRecord:
        """Apply an expert verdict exactly once: retrain and adjust history."""
        stored = self.prediction_log.get(event_id)
        if stored is None:
            raise UnknownEventError(f"no prediction recorded for event {event_id!r}")
        if stored.feedback is not None:
            raise DuplicateFeedbackError(f"feedback already recorded for event {event_id!r}")
        record = FeedbackRecord(
            event_id=event_id,
            expert_label=expert_label,
            prior_prediction=stored.predicted,
            timestamp=datetime.now(timezone.utc).isoformat(),
        )
        self.model.learn_one(stored.selected, expert_label)
        record.applied = True
        self.applied_feedback_count += 1
        if expert_label == 1 and not stored.revert_flag:
            self.engine.history.mark_spam(stored.user_id)
        stored.feedback = record
        self.feedback_log.append(record)
        return record

    # -- persistence ------------------------------------------------------------------

    def save(self, path) -> None:
        payload = {"version": CHECKPOINT_VERSION, "pipeline": self}
        with open(path, "wb") as handle:
            pickle.dump(payload, handle, protocol=pickle.HIGHEST_PROTOCOL)

    @classmethod
    def load(cls, path) -> "StreamPipeline":
        with open(path, "rb") as handle:
            payload = pickle.load(handle)
        if payload.get("version") != CHECKPOINT_VERSION:
            raise CalibrationError(f"unsupported checkpoint version {payload.get('version')}")
        return payload["pipeline"]


def quality_feature_names() -> list[str]:
    """All event-supplied probability feature ids."""
    names = [f"aq_{k}" for k in ("ok", "wp10b", "wp10c", "wp10fa", "wp10ga", "wp10start", "wp10stub")]
    names += [f"eq_{k}" for k in ("damaging_false", "damaging_true", "goodfaith_false", "goodfaith_true")]
    names += [f"rq_{k}" for k in ("a", "b", "c", "d", "e")]
    return names


def full_feature_layout() -> dict[str, list[str]]:
    """Documented fixed vector layout (n-grams and embeddings excluded)."""
    side = ["n_chars", "n_words", "n_difficult_words", "n_urls", *POS_KEYS,
            "reading_time", "flesch", "mcalpine_eflaw"]
    event_side = ["bot", "deleted", "new", "revert", "size_diff", *quality_feature_names()]
    return {
        "side": side,
        "event_side": event_side,
        "historical": historical_feature_names(),
        "content": [*EMOTION_KEYS, "polarity"],
    }
