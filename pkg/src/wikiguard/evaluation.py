"""Prequential (test-then-train) evaluation over a scenario stream.

Every sample is predicted first and only then used for training; under
the delayed regime (scenario 3) training happens in bursts of
``delay_n`` samples, in stream order, once that many predictions have
accumulated. Metric snapshots are appended every ten predictions.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable

from .errors import ScenarioError
from .events import ScenarioConfig, WikiEvent

SNAPSHOT_EVERY = 10

CLASSES = (0, 1)


@dataclass
class PredictionRecord:
    index: int
    event_id: str
    truth: int
    predicted: int
    proba_1: float
    confidence: float
    featurize_s: float
    select_s: float
    predict_s: float
    learn_s: float = 0.0

    @property
    def latency_s(self) -> float:
        return self.featurize_s + self.select_s + self.predict_s + self.learn_s


@dataclass
class MetricsSnapshot:
    sample_index: int
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
    seconds: float


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


class MetricsAccumulator:
    """Confusion-matrix counters matching :func:`compute_metrics` exactly."""

    def __init__(self):
        self.counts = {(t, p): 0 for t in CLASSES for p in CLASSES}
        self.total = 0

    def add(self, truth: int, predicted: int) -> None:
        self.counts[(truth, predicted)] += 1
        self.total += 1

    def snapshot(self, seconds: float = 0.0) -> MetricsSnapshot:
        return _metrics_from_counts(self.counts, self.total, seconds)


def _metrics_from_counts(counts, total, seconds) -> MetricsSnapshot:
    per_class = {}
    for cls in CLASSES:
        tp = counts[(cls, cls)]
        fp = counts[(1 - cls, cls)]
        fn = counts[(cls, 1 - cls)]
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class[cls] = (precision, recall, f1)
    correct = sum(counts[(cls, cls)] for cls in CLASSES)
    accuracy = _safe_div(correct, total)
    # single-label pooled counts: micro precision = micro recall = accuracy
    micro = accuracy
    return MetricsSnapshot(
        sample_index=total,
        accuracy=accuracy,
        precision_macro=(per_class[0][0] + per_class[1][0]) / 2,
        precision_0=per_class[0][0],
        precision_1=per_class[1][0],
        recall_macro=(per_class[0][1] + per_class[1][1]) / 2,
        recall_0=per_class[0][1],
        recall_1=per_class[1][1],
        f1_macro=(per_class[0][2] + per_class[1][2]) / 2,
        f1_0=per_class[0][2],
        f1_1=per_class[1][2],
        precision_micro=micro,
        recall_micro=micro,
        f1_micro=micro,
        seconds=seconds,
    )


def compute_metrics(records: Iterable[PredictionRecord], seconds: float = 0.0) -> MetricsSnapshot:
    """Recompute a snapshot from a prediction-log prefix."""
    counts = {(t, p): 0 for t in CLASSES for p in CLASSES}
    total = 0
    for record in records:
        counts[(record.truth, record.predicted)] += 1
        total += 1
    if total == 0:
        raise ScenarioError("metrics over an empty prediction log")
    return _metrics_from_counts(counts, total, seconds)


@dataclass
class EvaluationRun:
    scenario: ScenarioConfig
    model_id: str
    records: list[PredictionRecord] = field(default_factory=list)
    curve: list[MetricsSnapshot] = field(default_factory=list)
    training_bursts: list[int] = field(default_factory=list)
    wall_seconds: float = 0.0
    phase_seconds: dict[str, float] = field(default_factory=dict)

    @property
    def processing_seconds(self) -> float:
        return sum(r.latency_s for r in self.records)

    @property
    def samples_per_second(self) -> float:
        return len(self.records) / self.wall_seconds if self.wall_seconds > 0 else 0.0


def run_prequential(
    pipeline,
    stream: list[WikiEvent],
    cfg: ScenarioConfig,
    model_id: str = "",
    snapshot_every: int = SNAPSHOT_EVERY,
) -> EvaluationRun:
    """Predict-then-train over an already-built scenario stream.

    The pipeline must be calibrated beforehand (cold start consumed).
    Scenario 3 buffers (vector, label) pairs and trains in order every
    ``cfg.delay_n`` predictions; any tail shorter than the delay stays
    untrained, mirroring a batch-labelling expert.
    """
    run = EvaluationRun(scenario=cfg, model_id=model_id)
    accumulator = MetricsAccumulator()
    delayed: list[tuple[dict, int]] = []
    phase = {"featurize": 0.0, "select": 0.0, "predict": 0.0, "learn": 0.0}
    wall_start = time.perf_counter()

    for index, event in enumerate(stream, start=1):
        if event.label is None:
            raise ScenarioError(f"unlabeled event {event.event_id} in evaluation stream")
        result = pipeline.process(event)
        record = PredictionRecord(
            index=index,
            event_id=event.event_id,
            truth=event.label,
            predicted=result.predicted,
            proba_1=result.proba[1],
            confidence=result.confidence,
            featurize_s=result.featurize_s,
            select_s=result.select_s,
            predict_s=result.predict_s,
        )

        if cfg.scenario in (1, 2):
            t0 = time.perf_counter()
            pipeline.learn(result.selected, event.label)
            record.learn_s = time.perf_counter() - t0
        else:
            delayed.append((result.selected, event.label))
            if len(delayed) == cfg.delay_n:
                t0 = time.perf_counter()
                for vector, label in delayed:
                    pipeline.learn(vector, label)
                record.learn_s = time.perf_counter() - t0
                delayed.clear()
                run.training_bursts.append(index)

        run.records.append(record)
        accumulator.add(record.truth, record.predicted)
        phase["featurize"] += record.featurize_s
        phase["select"] += record.select_s
        phase["predict"] += record.predict_s
        phase["learn"] += record.learn_s

        if index % snapshot_every == 0:
            run.curve.append(accumulator.snapshot(seconds=sum(phase.values())))

    run.wall_seconds = time.perf_counter() - wall_start
    run.phase_seconds = phase
    return run


def export_results(run: EvaluationRun, out_dir) -> dict[str, Path]:
    """Write curve CSV, prediction-log CSV and a summary JSON."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "curve": out / "metrics_curve.csv",
        "log": out / "prediction_log.csv",
        "summary": out / "summary.json",
    }

    curve_fields = list(MetricsSnapshot.__dataclass_fields__)
    with open(paths["curve"], "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(curve_fields)
        for snap in run.curve:
            writer.writerow([getattr(snap, f) for f in curve_fields])

    log_fields = [
        "index", "event_id", "truth", "predicted", "proba_1", "confidence",
        "featurize_s", "select_s", "predict_s", "learn_s",
    ]
    with open(paths["log"], "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(log_fields)
        for record in run.records:
            writer.writerow([getattr(record, f) for f in log_fields])

    summary = {
        "model": run.model_id,
        "scenario": asdict(run.scenario) if hasattr(run.scenario, "__dataclass_fields__") else run.scenario.model_dump(),
        "samples": len(run.records),
        "wall_seconds": run.wall_seconds,
        "processing_seconds": run.processing_seconds,
        "samples_per_second": run.samples_per_second,
        "phase_seconds": run.phase_seconds,
        "training_bursts": run.training_bursts,
        "final_metrics": asdict(run.curve[-1]) if run.curve else None,
    }
    with open(paths["summary"], "w", encoding="utf-8") as handle:
        json.dump(summary, handle, indent=2)
    return paths
