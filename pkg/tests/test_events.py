import json

import pytest

from wikiguard.errors import EventParseError, EventValidationError, ScenarioError
from wikiguard.events import (
    ScenarioConfig,
    WikiEvent,
    build_scenario,
    order_stream,
    parse_event_record,
)

BASE = {
    "id": "e1",
    "ts": "2020-01-01T00:00:00Z",
    "user": "u1",
    "page": "p1",
    "text": "hello",
    "bot": False,
    "deleted": False,
    "new": False,
    "revert": False,
    "size_diff": 3,
    "article_quality": {
        "ok": 1.0, "wp10b": 0.0, "wp10c": 0.0, "wp10fa": 0.0,
        "wp10ga": 0.0, "wp10start": 0.0, "wp10stub": 0.0,
    },
    "edit_quality": {
        "damaging_false": 0.9, "damaging_true": 0.1,
        "goodfaith_false": 0.2, "goodfaith_true": 0.8,
    },
}


def make_event(**overrides):
    record = {**BASE, **overrides}
    return WikiEvent.model_validate(record)


class TestParseEventRecord:
    def test_degenerate_quality_distribution(self):
        event = parse_event_record(json.dumps(BASE))
        assert event.event_id == "e1"
        assert event.article_quality["ok"] == 1.0
        assert event.review_quality is None
        assert event.label is None

    def test_missing_timestamp_is_validation_error(self):
        record = dict(BASE)
        del record["ts"]
        with pytest.raises(EventValidationError):
            parse_event_record(json.dumps(record), line_no=7)

    def test_probability_out_of_range(self):
        record = dict(BASE)
        record["edit_quality"] = dict(BASE["edit_quality"], damaging_true=1.3)
        with pytest.raises(EventValidationError):
            parse_event_record(json.dumps(record))

    def test_malformed_json_carries_line_number(self):
        with pytest.raises(EventParseError) as excinfo:
            parse_event_record("{not json", line_no=42)
        assert excinfo.value.line_no == 42
        assert "42" in str(excinfo.value)

    def test_article_quality_must_sum_to_one(self):
        record = dict(BASE)
        record["article_quality"] = dict(BASE["article_quality"], ok=0.5)
        with pytest.raises(EventValidationError):
            parse_event_record(json.dumps(record))

    def test_label_must_be_binary(self):
        with pytest.raises(EventValidationError):
            parse_event_record(json.dumps({**BASE, "label": 2}))

    def test_round_trip(self):
        event = parse_event_record(json.dumps({**BASE, "label": 1}))
        again = WikiEvent.model_validate(event.to_record())
        assert again == event


class TestOrderStream:
    def test_sorts_by_timestamp(self):
        events = [
            make_event(id="a", ts="2020-01-01T00:00:05Z"),
            make_event(id="b", ts="2020-01-01T00:00:03Z"),
            make_event(id="c", ts="2020-01-01T00:00:04Z"),
        ]
        assert [e.event_id for e in order_stream(events)] == ["b", "c", "a"]

    def test_ties_break_by_event_id(self):
        one = make_event(id="a")
        two = make_event(id="b")
        assert [e.event_id for e in order_stream([two, one])] == ["a", "b"]
        assert [e.event_id for e in order_stream([one, two])] == ["a", "b"]

    def test_empty(self):
        assert order_stream([]) == []


def labeled_stream():
    events = []
    for i, label in enumerate([0, 1, 0, 0, 1, 0]):
        events.append(make_event(id=f"e{i}", ts=f"2020-01-01T00:00:{i:02d}Z", label=label))
    return events


class TestBuildScenario:
    def test_scenario1_block_counts(self):
        out = build_scenario(labeled_stream(), ScenarioConfig(scenario=1, s=2))
        assert len(out) == 4
        assert sum(e.label for e in out) == 2
        labels = [e.label for e in out]
        # contiguous class blocks
        assert labels == sorted(labels) or labels == sorted(labels, reverse=True)

    def test_scenario2_balanced_by_construction(self):
        out = build_scenario(labeled_stream(), ScenarioConfig(scenario=2, s=2, rng_seed=5))
        assert len(out) == 4
        assert sum(e.label for e in out) == 2
        ts = [e.timestamp for e in out]
        assert ts == sorted(ts)

    def test_scenario2_deterministic_given_seed(self):
        a = build_scenario(labeled_stream(), ScenarioConfig(scenario=2, s=2, rng_seed=7))
        b = build_scenario(labeled_stream(), ScenarioConfig(scenario=2, s=2, rng_seed=7))
        assert [e.event_id for e in a] == [e.event_id for e in b]

    def test_scenario3_same_data_as_scenario2(self):
        two = build_scenario(labeled_stream(), ScenarioConfig(scenario=2, s=2, rng_seed=9))
        three = build_scenario(labeled_stream(), ScenarioConfig(scenario=3, s=2, rng_seed=9))
        assert [e.event_id for e in two] == [e.event_id for e in three]

    def test_unlabeled_event_rejected(self):
        events = labeled_stream()
        events[2] = make_event(id="e2", ts="2020-01-01T00:00:02Z")
        with pytest.raises(ScenarioError):
            build_scenario(events, ScenarioConfig(scenario=2, s=2))

    def test_s_exceeding_minority_rejected(self):
        with pytest.raises(ScenarioError):
            build_scenario(labeled_stream(), ScenarioConfig(scenario=2, s=3))

    def test_balance_holds_for_all_feasible_s(self):
        events = []
        for i in range(40):
            events.append(
                make_event(id=f"e{i:02d}", ts=f"2020-01-01T00:{i:02d}:00Z", label=int(i % 3 == 0))
            )
        minority = sum(e.label for e in events)
        for s in range(1, minority + 1):
            out = build_scenario(events, ScenarioConfig(scenario=2, s=s, rng_seed=s))
            assert sum(e.label for e in out) == s
            assert len(out) == 2 * s
            ts = [e.timestamp for e in out]
            assert ts == sorted(ts)


class TestScenarioConfig:
    def test_scenario_must_be_known(self):
        with pytest.raises(ValueError):
            ScenarioConfig(scenario=4, s=1)

    def test_counts_must_be_positive(self):
        with pytest.raises(ValueError):
            ScenarioConfig(scenario=1, s=0)
        with pytest.raises(ValueError):
            ScenarioConfig(scenario=3, s=1, delay_n=0)

    def test_scenario3_default_delay(self):
        assert ScenarioConfig(scenario=3, s=1).delay_n == 100
