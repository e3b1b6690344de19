"""Incremental Gaussian naive Bayes over sparse feature dicts."""

from __future__ import annotations

import math
from typing import Mapping

CLASSES = (0, 1)

# Per-(class, feature) variances are floored before entering the
# likelihood so constant features cannot produce infinite densities.
VARIANCE_FLOOR = 1e-9


class GaussianNaiveBayes:
    """Running per-class priors and per-(class, feature) moments.

    Absent dimensions are treated as unobserved: they update nothing on
    learn and contribute no likelihood term on predict. Before any
    training the posterior is uniform.
    """

    def __init__(self):
        self.class_counts = {0: 0.0, 1: 0.0}
        # stats[class][feature] = [weight, mean, M2]
        self.stats: dict[int, dict[str, list[float]]] = {0: {}, 1: {}}

    def learn_one(self, x: Mapping[str, float], y: int, weight: float = 1.0) -> None:
        self.class_counts[y] += weight
        stats = self.stats[y]
        for feature, value in x.items():
            entry = stats.get(feature)
            if entry is None:
                stats[feature] = [weight, value, 0.0]
            else:
                entry[0] += weight
                delta = value - entry[1]
                entry[1] += weight * delta / entry[0]
                entry[2] += weight * delta * (value - entry[1])

    def _log_joint(self, x: Mapping[str, float], cls: int, total: float) -> float:
        log_joint = math.log(self.class_counts[cls] / total)
        stats = self.stats[cls]
        for feature, value in x.items():
            entry = stats.get(feature)
            if entry is None or entry[0] <= 0.0:
                continue
            variance = max(entry[2] / entry[0], VARIANCE_FLOOR)
            diff = value - entry[1]
            log_joint += -0.5 * math.log(2.0 * math.pi * variance) - diff * diff / (2.0 * variance)
        return log_joint

    def predict_proba_one(self, x: Mapping[str, float]) -> dict[int, float]:
        total = self.class_counts[0] + self.class_counts[1]
        if total == 0.0:
            return {0: 0.5, 1: 0.5}
        log_joints = {}
        for cls in CLASSES:
            if self.class_counts[cls] > 0.0:
                log_joints[cls] = self._log_joint(x, cls, total)
        peak = max(log_joints.values())
        raw = {cls: math.exp(lj - peak) for cls, lj in log_joints.items()}
        norm = sum(raw.values())
        return {cls: raw.get(cls, 0.0) / norm for cls in CLASSES}

    def predict_one(self, x: Mapping[str, float]) -> int:
        proba = self.predict_proba_one(x)
        return 1 if proba[1] > proba[0] else 0
