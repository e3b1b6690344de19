"""HTTP service wrapping the stream pipeline.

All state mutation (event ingestion, training, feedback) funnels through
one lock around the single pipeline instance, preserving stream order
under concurrent requests. Reads serve consistent snapshots.

Endpoints:
  POST /events                ingest one revision, returns the prediction
  GET  /explanations/{id}     decision paths + top features + summary text
  GET  /users                 known user ids
  GET  /users/{id}            accumulated history and contributions
  POST /feedback              expert verdict for one event
  GET  /metrics               live prequential counters
"""

from __future__ import annotations

import json
import pickle
import threading
from pathlib import Path
from typing import Optional

import pydantic
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import explain
from .errors import DuplicateFeedbackError, EventValidationError, UnknownEventError
from .evaluation import MetricsAccumulator
from .events import WikiEvent
from .explain import LlmClient
from .history import behavioral_features
from .pipeline import PipelineConfig, StreamPipeline


class ServiceConfig(BaseModel):
    port: int = 8000
    model_id: str = "arfc"
    state_dir: Optional[str] = None
    live_cold_start_n: int = 50
    checkpoint_every: int = 500
    eager_explanations: bool = False
    llm_endpoint: Optional[str] = None
    llm_api_key: Optional[str] = None
    llm_model: Optional[str] = None
    seed: int = 0
    model_params: Optional[dict] = None


class PredictionResponse(BaseModel):
    event_id: str
    predicted: int
    predicted_name: str
    confidence: float
    explanation_id: str
    trained: bool


class FeedbackRequest(BaseModel):
    event_id: str
    label: int

    @pydantic.field_validator("label")
    @classmethod
    def _binary(cls, value):
        if value not in (0, 1):
            raise ValueError("label must be 0 or 1")
        return value


class FeedbackResponse(BaseModel):
    event_id: str
    expert_label: int
    prior_prediction: int
    timestamp: str
    applied: bool


class ContributionView(BaseModel):
    event_id: str
    predicted: int
    predicted_name: str
    confidence: float
    truth: Optional[int]
    evaluated: bool
    feedback_label: Optional[int]
    text_preview: str


class UserResponse(BaseModel):
    user_id: str
    post_count: int
    spam_tendency: float
    antiquity_weeks: float
    week_frequency: float
    contributions: list[ContributionView]


class MetricsResponse(BaseModel):
    sample_index: int
    labeled_samples: int
    accuracy: float
    precision_macro: float
    precision_0: float
    precision_1: float
    recall_macro: float
    recall_0: float
    recall_1: float
    f1_macro: float
    f1_0: float
    f1_1: float
    precision_micro: float
    recall_micro: float
    f1_micro: float
    feedback_applied: int


class ServiceState:
    """Pipeline plus the service-only bookkeeping (log, cache, lock)."""

    def __init__(self, config: ServiceConfig, pipeline: StreamPipeline | None = None):
        self.config = config
        if pipeline is None:
            pipeline = StreamPipeline(
                PipelineConfig(
                    model_id=config.model_id,
                    model_params=config.model_params,
                    seed=config.seed,
                    live_cold_start_n=config.live_cold_start_n,
                )
            )
        self.pipeline = pipeline
        self.lock = threading.Lock()
        self.metrics = MetricsAccumulator()
        self.explanations: dict[str, explain.Explanation] = {}
        self.llm = LlmClient(
            endpoint=config.llm_endpoint,
            api_key=config.llm_api_key,
            model=config.llm_model,
        )
        self._dump_cache: tuple[int, dict] | None = None
        self._log_lines = 0
        self._log_path: Path | None = None
        if config.state_dir:
            state_dir = Path(config.state_dir)
            state_dir.mkdir(parents=True, exist_ok=True)
            self._log_path = state_dir / "stream.log.jsonl"

    # -- persistence ------------------------------------------------------

    def _append_log(self, kind: str, payload: dict) -> None:
        self._log_lines += 1
        if self._log_path is None:
            return
        with open(self._log_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps({"kind": kind, **payload}) + "\n")

    def checkpoint(self) -> Optional[Path]:
        if not self.config.state_dir:
            return None
        path = Path(self.config.state_dir) / "checkpoint.pkl"
        with open(path, "wb") as handle:
            pickle.dump(
                {"pipeline": self.pipeline, "log_lines": self._log_lines, "metrics": self.metrics},
                handle,
            )
        return path

    @classmethod
    def recover(cls, config: ServiceConfig) -> "ServiceState":
        """Load the newest checkpoint and replay the log tail."""
        state_dir = Path(config.state_dir)
        checkpoint_path = state_dir / "checkpoint.pkl"
        state = cls(config)
        replay_from = 0
        if checkpoint_path.exists():
            with open(checkpoint_path, "rb") as handle:
                payload = pickle.load(handle)
            state.pipeline = payload["pipeline"]
            state.metrics = payload["metrics"]
            replay_from = payload["log_lines"]
            state._log_lines = replay_from
        log_path = state_dir / "stream.log.jsonl"
        if log_path.exists():
            with open(log_path, "r", encoding="utf-8") as handle:
                for line_no, line in enumerate(handle):
                    if line_no < replay_from or not line.strip():
                        continue
                    record = json.loads(line)
                    kind = record.pop("kind")
                    state._log_lines += 1
                    if kind == "event":
                        event = WikiEvent.model_validate(record["event"])
                        state._ingest(event)
                    elif kind == "feedback":
                        state.pipeline.record_feedback(record["event_id"], record["label"])
        return state

    # -- operations --------------------------------------------------------

    def _ingest(self, event: WikiEvent):
        was_calibrated = self.pipeline.calibrated
        result = self.pipeline.handle_live(event)
        if event.label is not None and was_calibrated:
            self.metrics.add(event.label, result.predicted)
        return result

    def ingest(self, event: WikiEvent):
        if event.event_id in self.pipeline.prediction_log:
            raise KeyError(event.event_id)
        result = self._ingest(event)
        self._append_log("event", {"event": event.to_record()})
        if (
            self.config.state_dir
            and self.config.checkpoint_every
            and self.pipeline.samples_seen % self.config.checkpoint_every == 0
        ):
            self.checkpoint()
        return result

    def model_dump_cached(self) -> Optional[dict]:
        if not hasattr(self.pipeline.model, "dump"):
            return None
        key = self.pipeline.samples_seen + self.pipeline.applied_feedback_count
        if self._dump_cache is None or self._dump_cache[0] != key:
            self._dump_cache = (key, self.pipeline.model.dump())
        return self._dump_cache[1]

    def explanation_for(self, event_id: str) -> explain.Explanation:
        cached = self.explanations.get(event_id)
        if cached is not None:
            return cached
        stored = self.pipeline.prediction_log.get(event_id)
        if stored is None:
            raise UnknownEventError(event_id)
        selector = self.pipeline.selector
        explanation = explain.build_explanation(
            event_id=event_id,
            content=stored.content,
            predicted=stored.predicted,
            confidence=stored.confidence,
            selected=stored.selected,
            tracker=selector.tracker if selector else _ZeroTracker(),
            quantiles=self.pipeline.quantiles,
            model_dump=self.model_dump_cached(),
            llm=self.llm,
        )
        self.explanations[event_id] = explanation
        return explanation


class _ZeroTracker:
    @staticmethod
    def variance(_feature):
        return 0.0


def create_app(
    config: ServiceConfig | None = None,
    state: ServiceState | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    if state is None:
        if config.state_dir and (Path(config.state_dir) / "checkpoint.pkl").exists():
            state = ServiceState.recover(config)
        else:
            state = ServiceState(config)

    app = FastAPI(title="wikiguard", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = state

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "model": state.config.model_id,
            "samples": state.pipeline.samples_seen,
            "calibrated": state.pipeline.calibrated,
        }

    @app.post("/events", response_model=PredictionResponse)
    def post_event(body: dict):
        try:
            event = WikiEvent.model_validate(body)
        except (pydantic.ValidationError, EventValidationError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        with state.lock:
            try:
                result = state.ingest(event)
            except KeyError:
                raise HTTPException(status_code=409, detail=f"duplicate event id {event.event_id!r}")
        return PredictionResponse(
            event_id=event.event_id,
            predicted=result.predicted,
            predicted_name=explain.CLASS_NAMES[result.predicted],
            confidence=result.confidence,
            explanation_id=event.event_id,
            trained=event.label is not None and state.pipeline.calibrated,
        )

    @app.get("/explanations/{event_id}")
    def get_explanation(event_id: str):
        with state.lock:
            try:
                explanation = state.explanation_for(event_id)
            except UnknownEventError:
                raise HTTPException(status_code=404, detail=f"unknown event {event_id!r}")
        return explanation.to_dict()

    @app.get("/users")
    def list_users():
        with state.lock:
            known = sorted(
                set(state.pipeline.user_events) | set(state.pipeline.engine.history.users)
            )
        return {"users": known}

    @app.get("/users/{user_id}", response_model=UserResponse)
    def get_user(user_id: str):
        with state.lock:
            pipeline = state.pipeline
            history = pipeline.engine.history.users.get(user_id)
            event_ids = pipeline.user_events.get(user_id, [])
            if history is None and not event_ids:
                raise HTTPException(status_code=404, detail=f"unknown user {user_id!r}")
            now = history.last_post_ts if history and history.last_post_ts else 0.0
            behavioral = behavioral_features(history, now) if history else {
                name: 0.0 for name in ("user_post_count", "user_spam_tendency",
                                       "user_antiquity_weeks", "user_week_frequency")
            }
            contributions = []
            for event_id in reversed(event_ids):
                stored = pipeline.prediction_log[event_id]
                contributions.append(
                    ContributionView(
                        event_id=event_id,
                        predicted=stored.predicted,
                        predicted_name=explain.CLASS_NAMES[stored.predicted],
                        confidence=stored.confidence,
                        truth=stored.truth,
                        evaluated=stored.feedback is not None,
                        feedback_label=stored.feedback.expert_label if stored.feedback else None,
                        text_preview=stored.content[:120],
                    )
                )
        return UserResponse(
            user_id=user_id,
            post_count=int(behavioral["user_post_count"]),
            spam_tendency=behavioral["user_spam_tendency"],
            antiquity_weeks=behavioral["user_antiquity_weeks"],
            week_frequency=behavioral["user_week_frequency"],
            contributions=contributions,
        )

    @app.post("/feedback", response_model=FeedbackResponse)
    def post_feedback(body: FeedbackRequest):
        with state.lock:
            try:
                record = state.pipeline.record_feedback(body.event_id, body.label)
            except UnknownEventError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
            except DuplicateFeedbackError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            state._append_log("feedback", {"event_id": body.event_id, "label": body.label})
            state.explanations.pop(body.event_id, None)
        return FeedbackResponse(
            event_id=record.event_id,
            expert_label=record.expert_label,
            prior_prediction=record.prior_prediction,
            timestamp=record.timestamp,
            applied=record.applied,
        )

    @app.get("/metrics", response_model=MetricsResponse)
    def get_metrics():
        with state.lock:
            snapshot = state.metrics.snapshot()
            payload = MetricsResponse(
                sample_index=state.pipeline.samples_seen,
                labeled_samples=state.metrics.total,
                accuracy=snapshot.accuracy,
                precision_macro=snapshot.precision_macro,
                precision_0=snapshot.precision_0,
                precision_1=snapshot.precision_1,
                recall_macro=snapshot.recall_macro,
                recall_0=snapshot.recall_0,
                recall_1=snapshot.recall_1,
                f1_macro=snapshot.f1_macro,
                f1_0=snapshot.f1_0,
                f1_1=snapshot.f1_1,
                precision_micro=snapshot.precision_micro,
                recall_micro=snapshot.recall_micro,
                f1_micro=snapshot.f1_micro,
                feedback_applied=state.pipeline.applied_feedback_count,
            )
        return payload

    return app
