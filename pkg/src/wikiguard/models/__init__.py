"""Incremental classifiers with learn-one / predict-proba-one contracts."""

from .adwin import Adwin
from .alma import AlmaClassifier
from .forest import AdaptiveRandomForest
from .gnb import GaussianNaiveBayes
from .hoeffding import HoeffdingAdaptiveTree, hoeffding_bound
from .grid import (
    BEST_PARAMS,
    DEFAULT_GRIDS,
    MODEL_IDS,
    grid_search_cold_start,
    make_model,
    prequential_accuracy,
)

__all__ = [
    "Adwin",
    "AlmaClassifier",
    "AdaptiveRandomForest",
    "GaussianNaiveBayes",
    "HoeffdingAdaptiveTree",
    "hoeffding_bound",
    "BEST_PARAMS",
    "DEFAULT_GRIDS",
    "MODEL_IDS",
    "grid_search_cold_start",
    "make_model",
    "prequential_accuracy",
]
