"""Wiki revision events: parsing, validation, ordering and scenario construction.

Events arrive as JSONL records (one revision per line). The stream is
replayed in timestamp order; three scenario builders rearrange a labeled
stream into the evaluation layouts used by the prequential runner.
"""

from __future__ import annotations

import json
import random
from datetime import datetime, timezone
from typing import Iterable, Iterator, Optional

import pydantic
from pydantic import BaseModel, Field, field_validator, model_validator

from .errors import EventParseError, EventValidationError, ScenarioError

ARTICLE_QUALITY_KEYS = ("ok", "wp10b", "wp10c", "wp10fa", "wp10ga", "wp10start", "wp10stub")
EDIT_QUALITY_KEYS = ("damaging_false", "damaging_true", "goodfaith_false", "goodfaith_true")
REVIEW_QUALITY_KEYS = ("a", "b", "c", "d", "e")

_ARTICLE_SUM_TOL = 1e-6


def _check_probs(name, mapping, keys, check_sum=False):
    missing = set(keys) - set(mapping)
    extra = set(mapping) - set(keys)
    if missing or extra:
        raise ValueError(f"{name} must have exactly keys {sorted(keys)}")
    for key, value in mapping.items():
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name}.{key}={value} outside [0, 1]")
    if check_sum and abs(sum(mapping.values()) - 1.0) > _ARTICLE_SUM_TOL:
        raise ValueError(f"{name} probabilities must sum to 1 (got {sum(mapping.values())})")
    return mapping


class WikiEvent(BaseModel):
    """One timestamped wiki revision.

    Wire format uses the short JSONL field names (``id``, ``ts``, ...);
    attribute names follow the domain vocabulary.
    """

    model_config = pydantic.ConfigDict(populate_by_name=True)

    event_id: str = Field(alias="id")
    timestamp: datetime = Field(alias="ts")
    user_id: str = Field(alias="user")
    page_id: str = Field(alias="page")
    content: str = Field(alias="text")
    bot_flag: bool = Field(alias="bot", default=False)
    deleted_flag: bool = Field(alias="deleted", default=False)
    new_flag: bool = Field(alias="new", default=False)
    revert_flag: bool = Field(alias="revert", default=False)
    size_diff: int = Field(alias="size_diff", default=0)
    article_quality: Optional[dict[str, float]] = Field(alias="article_quality", default=None)
    edit_quality: Optional[dict[str, float]] = Field(alias="edit_quality", default=None)
    review_quality: Optional[dict[str, float]] = Field(alias="review_quality", default=None)
    label: Optional[int] = Field(alias="label", default=None)

    @field_validator("timestamp")
    @classmethod
    def _utc(cls, value: datetime) -> datetime:
        if value.tzinfo is None:
            return value.replace(tzinfo=timezone.utc)
        return value.astimezone(timezone.utc)

    @field_validator("label")
    @classmethod
    def _binary_label(cls, value):
        if value is not None and value not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {value}")
        return value

    @model_validator(mode="after")
    def _quality_maps(self):
        if self.article_quality is not None:
            _check_probs("article_quality", self.article_quality, ARTICLE_QUALITY_KEYS, check_sum=True)
        if self.edit_quality is not None:
            _check_probs("edit_quality", self.edit_quality, EDIT_QUALITY_KEYS)
        if self.review_quality is not None:
            _check_probs("review_quality", self.review_quality, REVIEW_QUALITY_KEYS)
        return self

    @property
    def epoch(self) -> float:
        return self.timestamp.timestamp()

    def to_record(self) -> dict:
        """Serialize back to the JSONL wire format."""
        record = {
            "id": self.event_id,
            "ts": self.timestamp.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "user": self.user_id,
            "page": self.page_id,
            "text": self.content,
            "bot": self.bot_flag,
            "deleted": self.deleted_flag,
            "new": self.new_flag,
            "revert": self.revert_flag,
            "size_diff": self.size_diff,
        }
        if self.article_quality is not None:
            record["article_quality"] = self.article_quality
        if self.edit_quality is not None:
            record["edit_quality"] = self.edit_quality
        if self.review_quality is not None:
            record["review_quality"] = self.review_quality
        if self.label is not None:
            record["label"] = self.label
        return record


class ScenarioConfig(BaseModel):
    """Layout of the evaluation stream.

    ``s`` is the per-class sample budget (bounded by the minority class),
    ``delay_n`` the training-batch size for the delayed regime.
    """

    scenario: int
    s: int
    delay_n: int = 100
    rng_seed: int = 0

    @field_validator("scenario")
    @classmethod
    def _known_scenario(cls, value):
        if value not in (1, 2, 3):
            raise ValueError("scenario must be 1, 2 or 3")
        return value

    @field_validator("s", "delay_n")
    @classmethod
    def _positive(cls, value):
        if value < 1:
            raise ValueError("must be >= 1")
        return value


def parse_event_record(line: str, line_no: Optional[int] = None) -> WikiEvent:
    """Parse one JSONL record into a validated event."""
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise EventParseError(f"malformed JSON: {exc}", line_no) from exc
    if not isinstance(payload, dict):
        raise EventParseError("record is not a JSON object", line_no)
    try:
        return WikiEvent.model_validate(payload)
    except pydantic.ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(part) for part in first["loc"]) or "record"
        raise EventValidationError(f"{loc}: {first['msg']}", line_no) from exc


def read_events(path) -> Iterator[WikiEvent]:
    """Stream events from a JSONL file; blank lines are skipped."""
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if line.strip():
                yield parse_event_record(line, line_no)


def write_events(events: Iterable[WikiEvent], path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for event in events:
            handle.write(json.dumps(event.to_record()) + "\n")
            count += 1
    return count


def order_stream(events: Iterable[WikiEvent]) -> list[WikiEvent]:
    """Stable sort by (timestamp, event_id); ties break lexicographically."""
    return sorted(events, key=lambda e: (e.timestamp, e.event_id))


def _require_labels(events):
    for event in events:
        if event.label is None:
            raise ScenarioError(f"event {event.event_id} is unlabeled")


def build_scenario(events: list[WikiEvent], cfg: ScenarioConfig) -> list[WikiEvent]:
    """Materialize the evaluation stream for one scenario.

    Input must be fully labeled and already in stream (timestamp) order.

    Scenario 1 keeps the first ``s`` events of each class as contiguous
    blocks (unbalanced by time slots); blocks are emitted in order of their
    earliest event. Scenario 2 keeps the first ``s`` minority events plus
    ``s`` majority events drawn uniformly at random (seeded, without
    replacement), merged back into timestamp order. Scenario 3 uses the
    scenario-2 stream; the 100-sample delay lives in the training loop.
    """
    _require_labels(events)
    by_class = {0: [e for e in events if e.label == 0], 1: [e for e in events if e.label == 1]}
    counts = {cls: len(items) for cls, items in by_class.items()}
    minority = 1 if counts[1] <= counts[0] else 0
    majority = 1 - minority
    if cfg.s > counts[minority]:
        raise ScenarioError(
            f"s={cfg.s} exceeds minority class count {counts[minority]}"
        )

    if cfg.scenario == 1:
        if cfg.s > counts[majority]:
            raise ScenarioError(f"s={cfg.s} exceeds class-{majority} count {counts[majority]}")
        blocks = [by_class[0][: cfg.s], by_class[1][: cfg.s]]
        blocks.sort(key=lambda block: (block[0].timestamp, block[0].event_id))
        return blocks[0] + blocks[1]

    minority_part = by_class[minority][: cfg.s]
    rng = random.Random(cfg.rng_seed)
    majority_part = rng.sample(by_class[majority], cfg.s)
    merged = minority_part + majority_part
    merged.sort(key=lambda e: (e.timestamp, e.event_id))
    return merged
