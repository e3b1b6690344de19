"""Per-user and per-page incremental accumulators.

Each entity keeps running sum / mean / max for the 19 base feature
scalars plus posting metadata. Snapshots are taken strictly before the
current event is incorporated, so the features of a sample never leak
its own values (test-then-train causality).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import StreamOrderError

N_BASE_FEATURES = 19
WEEK_SECONDS = 7 * 24 * 3600.0

BEHAVIORAL_NAMES = (
    "user_post_count",
    "user_spam_tendency",
    "user_antiquity_weeks",
    "user_week_frequency",
)


def historical_feature_names() -> list[str]:
    """The 80 snapshot feature names, in stable order."""
    names = list(BEHAVIORAL_NAMES)
    for prefix in ("user", "page"):
        for stat in ("avg", "max"):
            names.extend(f"{prefix}_{stat}_f{i:02d}" for i in range(1, N_BASE_FEATURES + 1))
    return names


@dataclass
class EntityHistory:
    """Running state for one user or page."""

    entity_id: str
    n: int = 0
    sums: list[float] = field(default_factory=lambda: [0.0] * N_BASE_FEATURES)
    means: list[float] = field(default_factory=lambda: [0.0] * N_BASE_FEATURES)
    maxes: list[float] = field(default_factory=lambda: [0.0] * N_BASE_FEATURES)
    first_post_ts: float | None = None
    last_post_ts: float | None = None
    spam_count: int = 0

    def update(self, scalars, ts: float, spam: bool) -> None:
        if self.last_post_ts is not None and ts < self.last_post_ts:
            raise StreamOrderError(
                f"event at {ts} precedes last seen {self.last_post_ts} for {self.entity_id}"
            )
        self.n += 1
        for i in range(N_BASE_FEATURES):
            x = scalars[i]
            self.sums[i] += x
            self.means[i] += (x - self.means[i]) / self.n
            if self.n == 1 or x > self.maxes[i]:
                self.maxes[i] = x
        if self.first_post_ts is None:
            self.first_post_ts = ts
        self.last_post_ts = ts
        if spam:
            self.spam_count += 1

    def to_record(self) -> dict:
        return {
            "entity": self.entity_id,
            "n": self.n,
            "sums": self.sums,
            "means": self.means,
            "maxes": self.maxes,
            "first_ts": self.first_post_ts,
            "last_ts": self.last_post_ts,
            "spam_count": self.spam_count,
        }

    @classmethod
    def from_record(cls, record: dict) -> "EntityHistory":
        return cls(
            entity_id=record["entity"],
            n=record["n"],
            sums=list(record["sums"]),
            means=list(record["means"]),
            maxes=list(record["maxes"]),
            first_post_ts=record["first_ts"],
            last_post_ts=record["last_ts"],
            spam_count=record["spam_count"],
        )


def behavioral_features(history: EntityHistory, now: float) -> dict[str, float]:
    """Features 20-23: post count, spam tendency, antiquity, weekly rate.

    The frequency denominator is floored at one week so a user's very
    first week does not divide by zero.
    """
    if history.n == 0:
        return {name: 0.0 for name in BEHAVIORAL_NAMES}
    antiquity_weeks = max(0.0, (now - history.first_post_ts) / WEEK_SECONDS)
    return {
        "user_post_count": float(history.n),
        "user_spam_tendency": history.spam_count / history.n,
        "user_antiquity_weeks": antiquity_weeks,
        "user_week_frequency": history.n / max(antiquity_weeks, 1.0),
    }


class HistoryStore:
    """In-memory user/page accumulator store with JSONL snapshots."""

    def __init__(self):
        self.users: dict[str, EntityHistory] = {}
        self.pages: dict[str, EntityHistory] = {}

    def user(self, user_id: str) -> EntityHistory:
        if user_id not in self.users:
            self.users[user_id] = EntityHistory(entity_id=user_id)
        return self.users[user_id]

    def page(self, page_id: str) -> EntityHistory:
        if page_id not in self.pages:
            self.pages[page_id] = EntityHistory(entity_id=page_id)
        return self.pages[page_id]

    def mark_spam(self, user_id: str) -> None:
        self.user(user_id).spam_count += 1

    def snapshot_then_update(
        self, user_id: str, page_id: str, base_scalars, ts: float, spam: bool
    ) -> dict[str, float]:
        """80 historical features reflecting history before this event.

        Both entity histories are then updated with the event's scalars,
        atomically from the caller's perspective (single-writer stream).
        """
        user_hist = self.user(user_id)
        page_hist = self.page(page_id)

        snapshot = behavioral_features(user_hist, ts)
        for prefix, hist in (("user", user_hist), ("page", page_hist)):
            for i in range(N_BASE_FEATURES):
                has = hist.n > 0
                snapshot[f"{prefix}_avg_f{i + 1:02d}"] = hist.means[i] if has else 0.0
                snapshot[f"{prefix}_max_f{i + 1:02d}"] = hist.maxes[i] if has else 0.0

        user_hist.update(base_scalars, ts, spam)
        page_hist.update(base_scalars, ts, spam)
        return snapshot

    def export_jsonl(self, path) -> int:
        count = 0
        with open(path, "w", encoding="utf-8") as handle:
            for kind, table in (("user", self.users), ("page", self.pages)):
                for history in table.values():
                    record = history.to_record()
                    record["kind"] = kind
                    handle.write(json.dumps(record) + "\n")
                    count += 1
        return count

    @classmethod
    def load_jsonl(cls, path) -> "HistoryStore":
        store = cls()
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                record = json.loads(line)
                history = EntityHistory.from_record(record)
                table = store.users if record["kind"] == "user" else store.pages
                table[history.entity_id] = history
        return store
