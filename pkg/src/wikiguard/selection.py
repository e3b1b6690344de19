"""Online variance-threshold feature selection.

The threshold is calibrated once on the cold-start window (nearest-rank
90th percentile of the probe features' variances) and never moves
afterwards; selection itself stays dynamic because the running variances
keep evolving with every sample.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import CalibrationError

DEFAULT_COLD_START_FRACTION = 0.005
DEFAULT_PERCENTILE = 90.0


class VarianceTracker:
    """Per-feature running count / mean / M2 (population variance)."""

    __slots__ = ("stats",)

    def __init__(self):
        self.stats: dict[str, list[float]] = {}

    def update(self, vector: Mapping[str, float]) -> None:
        stats = self.stats
        for feature, value in vector.items():
            entry = stats.get(feature)
            if entry is None:
                stats[feature] = [1.0, value, 0.0]
            else:
                entry[0] += 1.0
                delta = value - entry[1]
                entry[1] += delta / entry[0]
                entry[2] += delta * (value - entry[1])

    def variance(self, feature: str) -> float:
        entry = self.stats.get(feature)
        if entry is None or entry[0] == 0.0:
            return 0.0
        return entry[2] / entry[0]

    def variances(self) -> dict[str, float]:
        return {feature: entry[2] / entry[0] for feature, entry in self.stats.items()}

    def count(self, feature: str) -> int:
        entry = self.stats.get(feature)
        return int(entry[0]) if entry else 0


def nearest_rank_percentile(values: Iterable[float], percentile: float) -> float:
    """Nearest-rank percentile: value at rank ceil(p/100 * N), 1-indexed."""
    ordered = sorted(values)
    if not ordered:
        raise CalibrationError("percentile of empty set")
    rank = max(1, math.ceil(percentile / 100.0 * len(ordered)))
    return ordered[rank - 1]


def calibrate_threshold(
    cold_start_vectors: Iterable[Mapping[str, float]],
    probe_features: set[str],
    percentile: float = DEFAULT_PERCENTILE,
    tracker: VarianceTracker | None = None,
) -> float:
    """Fixed selection threshold from the cold-start window.

    ``tracker`` may be supplied to keep the calibration observations in
    the live tracker that the selector will continue updating.
    """
    tracker = VarianceTracker() if tracker is None else tracker
    count = 0
    for vector in cold_start_vectors:
        tracker.update(vector)
        count += 1
    if count == 0:
        raise CalibrationError("empty cold-start window")
    probe_variances = [tracker.variance(f) for f in probe_features if tracker.count(f) > 0]
    if not probe_variances:
        raise CalibrationError("no probe features observed during cold start")
    return nearest_rank_percentile(probe_variances, percentile)


@dataclass
class SelectorState:
    """Variance selector with an immutable post-calibration threshold."""

    threshold: float
    tracker: VarianceTracker = field(default_factory=VarianceTracker)
    cold_start_fraction: float = DEFAULT_COLD_START_FRACTION

    def update_and_select(self, vector: Mapping[str, float]) -> dict[str, float]:
        """Track the sample, then keep features at or above the threshold.

        New dimensions start fresh trackers on first sight (a single
        observation has zero variance, so they stay excluded until their
        variance crosses the threshold).
        """
        self.tracker.update(vector)
        threshold = self.threshold
        variance = self.tracker.variance
        return {f: v for f, v in vector.items() if variance(f) >= threshold}

    def selected_features(self) -> set[str]:
        return {
            feature
            for feature, var in self.tracker.variances().items()
            if var >= self.threshold
        }

    def export_csv(self, path) -> int:
        """Dump (feature, variance, selected) rows for inspection."""
        rows = sorted(self.tracker.variances().items())
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["feature", "variance", "selected"])
            for feature, variance in rows:
                writer.writerow([feature, repr(variance), int(variance >= self.threshold)])
        return len(rows)
