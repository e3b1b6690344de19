"""Synthetic wiki-revision stream with planted class signal.

Disinformation events draw longer content with a distinct marker
vocabulary, higher ``wp10stub`` article-quality mass, higher damaging
probability, more reverts and riskier authors. A small label-noise rate
keeps the problem from being trivially separable. Everything is driven
by one seeded generator, so a (n, seed) pair always produces the same
stream.
"""

from __future__ import annotations

from datetime import datetime, timezone

import numpy as np

from .events import WikiEvent

COMMON_WORDS = (
    "city town travel guide hotel museum park history local place visit station food "
    "restaurant beach river mountain island temple church market airport train bus map "
    "photo section link update fix edit page article word village castle bridge garden "
    "tower festival event tour coast lake forest valley capital region street road review "
    "post comment good new old small large see run make cat dog fox"
).split()

DISINFO_MARKERS = (
    "shocking exposed hoax conspiracy secret hidden truth banned scandal fraud fake "
    "corrupt coverup miracle cure danger warning urgent alarming evil"
).split()

NORMAL_MARKERS = (
    "citation reference grammar spelling typo style layout revision source category template"
).split()

_START = datetime(2021, 3, 1, tzinfo=timezone.utc).timestamp()


def _quality_map(rng, keys, main_key, main_value):
    rest = rng.dirichlet(np.ones(len(keys) - 1)) * (1.0 - main_value)
    mapping = {}
    i = 0
    for key in keys:
        if key == main_key:
            mapping[key] = float(main_value)
        else:
            mapping[key] = float(rest[i])
            i += 1
    return mapping


def _sentence(rng, n_words, disinfo):
    words = []
    for _ in range(n_words):
        roll = rng.random()
        if disinfo and roll < 0.25:
            words.append(DISINFO_MARKERS[rng.integers(len(DISINFO_MARKERS))])
        elif not disinfo and roll < 0.15:
            words.append(NORMAL_MARKERS[rng.integers(len(NORMAL_MARKERS))])
        else:
            words.append(COMMON_WORDS[rng.integers(len(COMMON_WORDS))])
    return " ".join(words)


def _text(rng, disinfo):
    target = max(3, int(rng.normal(18, 4))) if disinfo else max(3, int(rng.normal(8, 2)))
    sentences = []
    remaining = target
    while remaining > 0:
        take = min(remaining, int(rng.integers(4, 9)))
        sentences.append(_sentence(rng, take, disinfo))
        remaining -= take
    return ". ".join(sentences) + "."


def generate_events(
    n: int,
    seed: int = 0,
    disinfo_fraction: float = 0.5,
    label_noise: float = 0.02,
    n_users: int = 60,
    n_pages: int = 40,
) -> list[WikiEvent]:
    """Generate ``n`` labeled events in strictly increasing timestamp order."""
    rng = np.random.default_rng(seed)
    risky_users = max(1, n_users // 4)
    hot_pages = max(1, n_pages // 4)
    events = []
    ts = _START
    for i in range(n):
        disinfo = rng.random() < disinfo_fraction
        ts += float(rng.exponential(120.0)) + 1.0

        if disinfo:
            user = int(rng.integers(0, risky_users)) if rng.random() < 0.7 else int(rng.integers(risky_users, n_users))
            page = int(rng.integers(0, hot_pages)) if rng.random() < 0.6 else int(rng.integers(hot_pages, n_pages))
            stub = float(np.clip(rng.beta(6, 3), 0.0, 1.0))
            damaging = float(np.clip(rng.beta(5, 3), 0.0, 1.0))
            goodfaith = float(np.clip(rng.beta(2, 5), 0.0, 1.0))
            revert = rng.random() < 0.30
            deleted = rng.random() < 0.10
            bot = rng.random() < 0.05
            size = int(rng.normal(120, 150))
        else:
            user = int(rng.integers(risky_users, n_users)) if rng.random() < 0.9 else int(rng.integers(0, risky_users))
            page = int(rng.integers(hot_pages, n_pages)) if rng.random() < 0.85 else int(rng.integers(0, hot_pages))
            stub = float(np.clip(rng.beta(2, 6), 0.0, 1.0))
            damaging = float(np.clip(rng.beta(2, 6), 0.0, 1.0))
            goodfaith = float(np.clip(rng.beta(5, 2), 0.0, 1.0))
            revert = rng.random() < 0.05
            deleted = rng.random() < 0.02
            bot = rng.random() < 0.10
            size = int(rng.normal(40, 80))

        label = int(disinfo)
        if rng.random() < label_noise:
            label = 1 - label

        record = {
            "id": f"ev{i:06d}",
            "ts": datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%f%z"),
            "user": f"user{user:03d}",
            "page": f"page{page:03d}",
            "text": _text(rng, disinfo),
            "bot": bool(bot),
            "deleted": bool(deleted),
            "new": bool(rng.random() < 0.1),
            "revert": bool(revert),
            "size_diff": size,
            "article_quality": _quality_map(
                rng,
                ("ok", "wp10b", "wp10c", "wp10fa", "wp10ga", "wp10start", "wp10stub"),
                "wp10stub",
                stub,
            ),
            "edit_quality": {
                "damaging_true": damaging,
                "damaging_false": 1.0 - damaging,
                "goodfaith_true": goodfaith,
                "goodfaith_false": 1.0 - goodfaith,
            },
            "label": label,
        }
        if rng.random() < 0.5:
            grades = rng.dirichlet(np.ones(5) * (2.0 if disinfo else 1.0))
            record["review_quality"] = {
                k: float(v) for k, v in zip(("a", "b", "c", "d", "e"), grades)
            }
        events.append(WikiEvent.model_validate(record))
    return events
