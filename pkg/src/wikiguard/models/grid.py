"""Model factory and exhaustive cold-start hyperparameter search."""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Sequence

from .alma import AlmaClassifier
from .forest import AdaptiveRandomForest
from .gnb import GaussianNaiveBayes
from .hoeffding import HoeffdingAdaptiveTree

MODEL_IDS = ("gnb", "alma", "hatc", "arfc")

# Candidate ranges swept during the cold start.
DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "gnb": {},
    "alma": {
        "alpha": [0.3, 0.5, 0.7, 0.9],
        "b": [0.6, 1.0, 1.4, 1.8],
        "c": [0.6, 1.0, 1.1, 1.4, 1.8],
    },
    "hatc": {
        "max_depth": [None, 50, 100, 200],
        "tie_threshold": [0.9, 0.5, 0.05, 0.005],
        "max_size_mb": [25, 50, 100, 200],
    },
    "arfc": {
        "n_models": [10, 25, 50, 75],
        "subspace": ["sqrt", 25, 50, 100],
        "lambda_": [5, 25, 50, 100],
    },
}

# Configurations that won the sweep on the reference corpora; used when
# the search is skipped.
BEST_PARAMS: dict[str, dict] = {
    "gnb": {},
    "alma": {"alpha": 0.9, "b": 1.8, "c": 1.8},
    "hatc": {"max_depth": 200, "tie_threshold": 0.005, "max_size_mb": 200},
    "arfc": {"n_models": 75, "subspace": 100, "lambda_": 100},
}


def make_model(model_id: str, seed: int = 0, **params):
    if model_id == "gnb":
        return GaussianNaiveBayes()
    if model_id == "alma":
        return AlmaClassifier(**params)
    if model_id == "hatc":
        return HoeffdingAdaptiveTree(**params)
    if model_id == "arfc":
        return AdaptiveRandomForest(seed=seed, **params)
    raise ValueError(f"unknown model id {model_id!r}; expected one of {MODEL_IDS}")


def prequential_accuracy(model, samples: Sequence[tuple[Mapping[str, float], int]]) -> float:
    """Test-then-train accuracy over an in-memory window."""
    if not samples:
        return 0.0
    correct = 0
    for x, y in samples:
        if model.predict_one(x) == y:
            correct += 1
        model.learn_one(x, y)
    return correct / len(samples)


def grid_points(grid: Mapping[str, list]) -> Iterable[dict]:
    if not grid:
        yield {}
        return
    names = list(grid)
    for combo in itertools.product(*(grid[name] for name in names)):
        yield dict(zip(names, combo))


def grid_search_cold_start(
    model_id: str,
    cold_start: Sequence[tuple[Mapping[str, float], int]],
    grid: Mapping[str, list] | None = None,
    seed: int = 0,
) -> tuple[dict, float]:
    """Exhaustive sweep scored by prequential accuracy on the cold start.

    Returns (best_params, best_accuracy); ties keep the first grid point
    in enumeration order, so the result is deterministic.
    """
    if not cold_start:
        raise ValueError("empty cold-start window")
    grid = DEFAULT_GRIDS[model_id] if grid is None else grid
    points = list(grid_points(grid))
    if not points:
        raise ValueError("empty hyperparameter grid")
    best_params = None
    best_accuracy = -1.0
    for params in points:
        model = make_model(model_id, seed=seed, **params)
        accuracy = prequential_accuracy(model, cold_start)
        if accuracy > best_accuracy:
            best_params = params
            best_accuracy = accuracy
    return best_params, best_accuracy
