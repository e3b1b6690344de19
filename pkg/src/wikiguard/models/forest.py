"""Adaptive random forest: bagged ensemble of Hoeffding adaptive trees."""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .hoeffding import HoeffdingAdaptiveTree


class AdaptiveRandomForest:
    """Majority-voting ensemble with online (Poisson) bagging.

    Each member is a full adaptive tree with its own seeded RNG and
    random feature subspace. A sample reaches each tree with weight
    drawn from Poisson(lambda); zero weight skips the tree. The
    predicted probability is the vote share over members, so with
    ``n_models=1`` and bagging disabled the forest is exactly the
    single tree.
    """

    def __init__(
        self,
        n_models: int = 75,
        subspace: int | str | None = 100,
        lambda_: float = 100.0,
        seed: int = 0,
        disable_bagging: bool = False,
        **tree_kwargs,
    ):
        if n_models < 1:
            raise ValueError("n_models must be >= 1")
        self.n_models = n_models
        self.lambda_ = lambda_
        self.disable_bagging = disable_bagging
        seeds = np.random.SeedSequence(seed).spawn(n_models)
        self._rngs = [np.random.default_rng(s) for s in seeds]
        self.trees = [
            HoeffdingAdaptiveTree(subspace=subspace, rng=self._rngs[i], **tree_kwargs)
            for i in range(n_models)
        ]

    def learn_one(self, x: Mapping[str, float], y: int, weight: float = 1.0) -> None:
        if self.disable_bagging:
            for tree in self.trees:
                tree.learn_one(x, y, weight)
            return
        lam = self.lambda_
        for tree, rng in zip(self.trees, self._rngs):
            k = int(rng.poisson(lam))
            if k > 0:
                tree.learn_one(x, y, weight * k)

    def votes(self, x: Mapping[str, float]) -> list[int]:
        return [tree.predict_one(x) for tree in self.trees]

    def predict_proba_one(self, x: Mapping[str, float]) -> dict[int, float]:
        votes = self.votes(x)
        ones = sum(votes)
        n = len(votes)
        return {0: (n - ones) / n, 1: ones / n}

    def predict_one(self, x: Mapping[str, float]) -> int:
        proba = self.predict_proba_one(x)
        return 1 if proba[1] > proba[0] else 0

    def dump(self) -> dict:
        return {
            "format": "wikiguard-tree",
            "version": 1,
            "kind": "arfc",
            "trees": [tree.dump()["root"] for tree in self.trees],
        }
