"""Approximate large-margin (p=2) linear classifier for streams."""

from __future__ import annotations

import math
from typing import Mapping


class AlmaClassifier:
    """Margin-driven perceptron variant with norm-1 projection.

    Labels map to {-1, +1} internally. An update fires when the signed
    margin falls inside the (1 - alpha) band of the shrinking target
    gamma_k = b / sqrt(k); the learning rate is c / sqrt(k) and the
    weight vector is projected back onto the unit ball afterwards.
    A zero score predicts class 0.
    """

    def __init__(self, alpha: float = 0.9, b: float = 1.8, c: float = 1.8):
        self.alpha = alpha
        self.b = b
        self.c = c
        self.w: dict[str, float] = {}
        self.k = 1

    def margin(self, x: Mapping[str, float]) -> float:
        w = self.w
        return sum(w[f] * v for f, v in x.items() if f in w)

    def predict_one(self, x: Mapping[str, float]) -> int:
        return 1 if self.margin(x) > 0.0 else 0

    def predict_proba_one(self, x: Mapping[str, float]) -> dict[int, float]:
        p1 = 1.0 / (1.0 + math.exp(-self.margin(x)))
        return {0: 1.0 - p1, 1: p1}

    def learn_one(self, x: Mapping[str, float], y: int, weight: float = 1.0) -> None:
        y_signed = 1.0 if y == 1 else -1.0
        gamma = self.b / math.sqrt(self.k)
        if y_signed * self.margin(x) <= (1.0 - self.alpha) * gamma:
            eta = self.c / math.sqrt(self.k) * weight
            w = self.w
            for feature, value in x.items():
                w[feature] = w.get(feature, 0.0) + eta * y_signed * value
            norm = math.sqrt(sum(v * v for v in w.values()))
            if norm > 1.0:
                for feature in w:
                    w[feature] /= norm
            self.k += 1
