"""Hoeffding adaptive tree for binary classification over sparse dicts.

Leaves keep per-class Gaussian summaries per feature and split when the
information-gain lead of the best feature beats the Hoeffding bound (or
the bound drops under the tie threshold). Every split node monitors its
subtree's prequential error with an ADWIN detector; on a detected change
an alternate subtree grows in parallel and replaces the original once
its error is significantly lower.

Absent features update nothing and route down the heavier branch at
split nodes. All tie-breaks (classes, features, branches) are fixed so
identical streams reproduce identical trees.
"""

from __future__ import annotations

import functools
import math
from typing import Mapping

import numpy as np

from .adwin import Adwin

_SQRT2 = math.sqrt(2.0)
_VAR_EPS = 1e-12
# error-rate comparison confidence for promoting/discarding alternates
_SWAP_DELTA = 0.05
_SWAP_MIN_WIDTH = 100
_MEMORY_CHECK_EVERY = 512
_BYTES_PER_SPLIT = 400
_BYTES_PER_LEAF = 280
_BYTES_PER_ENTRY = 180


def hoeffding_bound(range_r: float, delta: float, n: float) -> float:
    """Confidence radius sqrt(R^2 ln(1/delta) / 2n); n must be positive."""
    if n <= 0:
        raise ValueError("hoeffding_bound requires n >= 1")
    return math.sqrt(range_r * range_r * math.log(1.0 / delta) / (2.0 * n))


def _entropy(w0: float, w1: float) -> float:
    total = w0 + w1
    if total <= 0.0:
        return 0.0
    h = 0.0
    for w in (w0, w1):
        if w > 0.0:
            p = w / total
            h -= p * math.log2(p)
    return h


def _gaussian_left_weight(weight: float, mean: float, m2: float, t: float) -> float:
    """Estimated class weight falling at or below threshold t."""
    if weight <= 0.0:
        return 0.0
    variance = m2 / weight
    if variance < _VAR_EPS:
        return weight if mean <= t else 0.0
    z = (t - mean) / math.sqrt(2.0 * variance)
    return weight * 0.5 * (1.0 + math.erf(z))


class _LeafNode:
    __slots__ = (
        "class_weights",
        "stats",
        "depth",
        "total_weight",
        "instances_since_attempt",
        "allowed",
        "admission_cap",
    )

    def __init__(self, depth: int, class_weights=None):
        self.class_weights = [0.0, 0.0] if class_weights is None else class_weights
        # stats[feature] = [w0, mean0, M2_0, w1, mean1, M2_1, min, max]
        self.stats: dict[str, list[float]] = {}
        self.depth = depth
        self.total_weight = self.class_weights[0] + self.class_weights[1]
        self.instances_since_attempt = 0
        self.allowed: set | None = None
        self.admission_cap: int | None = None


class _SplitNode:
    __slots__ = (
        "feature",
        "threshold",
        "left",
        "right",
        "depth",
        "total_weight",
        "adwin",
        "alternate",
        "alt_adwin",
    )

    def __init__(self, feature, threshold, left, right, depth, total_weight, detector):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.depth = depth
        self.total_weight = total_weight
        self.adwin = detector
        self.alternate = None
        self.alt_adwin = None


class _Candidate:
    __slots__ = ("gain", "feature", "threshold", "left_dist", "right_dist")

    def __init__(self, gain, feature, threshold, left_dist, right_dist):
        self.gain = gain
        self.feature = feature
        self.threshold = threshold
        self.left_dist = left_dist
        self.right_dist = right_dist


class HoeffdingAdaptiveTree:
    """Single adaptive tree; also the member learner of the forest."""

    def __init__(
        self,
        max_depth: int | None = 200,
        tie_threshold: float = 0.005,
        max_size_mb: float = 200.0,
        split_confidence: float = 1e-7,
        grace_period: int = 200,
        drift_delta: float = 0.002,
        n_split_points: int = 10,
        subspace: int | str | None = None,
        rng: np.random.Generator | None = None,
        drift_detector_factory=None,
    ):
        self.max_depth = math.inf if max_depth is None else max_depth
        self.tie_threshold = tie_threshold
        self.max_size_mb = max_size_mb
        self.split_confidence = split_confidence
        self.grace_period = grace_period
        self.drift_delta = drift_delta
        # any object with update(value) -> bool, estimation and width works
        self.drift_detector_factory = drift_detector_factory or functools.partial(
            Adwin, delta=drift_delta
        )
        self.n_split_points = n_split_points
        self.subspace = subspace
        self.rng = rng if rng is not None else np.random.default_rng(0)

        self.feature_universe: dict[str, None] = {}
        self.frozen = False
        self._instances = 0
        self._n_leaves = 0
        self._n_splits = 0
        self._observer_entries = 0
        self.root = self._new_leaf(0)

    # -- construction helpers -------------------------------------------------

    def _new_leaf(self, depth: int, class_weights=None) -> _LeafNode:
        leaf = _LeafNode(depth, class_weights)
        self._n_leaves += 1
        if self.subspace is not None:
            self._resolve_subspace(leaf)
        return leaf

    def _resolve_subspace(self, leaf: _LeafNode) -> None:
        universe = self.feature_universe
        if not universe:
            leaf.admission_cap = -1  # resolve on first learn
            return
        if self.subspace == "sqrt":
            k = max(1, math.isqrt(len(universe)))
        else:
            k = max(1, int(self.subspace))
        if len(universe) <= k:
            leaf.allowed = set()
            leaf.admission_cap = k
        else:
            names = sorted(universe)
            picks = self.rng.permutation(len(names))[:k]
            leaf.allowed = {names[i] for i in picks}
            leaf.admission_cap = None

    # -- learning -------------------------------------------------------------

    def learn_one(self, x: Mapping[str, float], y: int, weight: float = 1.0) -> None:
        if self.subspace is not None:
            universe = self.feature_universe
            for feature in x:
                if feature not in universe:
                    universe[feature] = None
        self._instances += 1
        self.root = self._learn_node(self.root, x, y, weight, None)
        if self._instances % _MEMORY_CHECK_EVERY == 0:
            self._check_memory()

    def _learn_node(self, node, x, y, w, err):
        if type(node) is _LeafNode:
            self._leaf_learn(node, x, y, w)
            return self._maybe_split(node)

        # split node: monitor this subtree's prequential error
        if err is None:
            err = self._subtree_error(node, x, y)
        if node.adwin.update(err) and node.alternate is None and not self.frozen:
            node.alternate = self._new_leaf(node.depth)
            node.alt_adwin = self.drift_detector_factory()

        if node.alternate is not None:
            alt_err = self._subtree_error(node.alternate, x, y)
            node.alt_adwin.update(alt_err)
            node.alternate = self._learn_node(node.alternate, x, y, w, alt_err)
            resolution = self._resolve_alternate(node)
            if resolution == "promote":
                promoted = node.alternate
                node.alternate = None
                self._forget_subtree(node, keep=promoted)
                return promoted
            if resolution == "discard":
                self._forget_subtree(node.alternate, keep=None)
                node.alternate = None
                node.alt_adwin = None

        value = x.get(node.feature)
        if self._route_left(node, value):
            node.left = self._learn_node(node.left, x, y, w, err)
        else:
            node.right = self._learn_node(node.right, x, y, w, err)
        node.total_weight += w
        return node

    def _resolve_alternate(self, node) -> str | None:
        main, alt = node.adwin, node.alt_adwin
        if main.width < _SWAP_MIN_WIDTH or alt.width < _SWAP_MIN_WIDTH:
            return None
        old_rate = main.estimation
        alt_rate = alt.estimation
        f_n = 1.0 / alt.width + 1.0 / main.width
        bound = math.sqrt(2.0 * old_rate * (1.0 - old_rate) * math.log(2.0 / _SWAP_DELTA) * f_n)
        if old_rate - alt_rate > bound:
            return "promote"
        if alt_rate - old_rate > bound:
            return "discard"
        return None

    def _leaf_learn(self, leaf: _LeafNode, x, y, w) -> None:
        leaf.class_weights[y] += w
        leaf.total_weight += w
        leaf.instances_since_attempt += 1
        if leaf.admission_cap == -1:
            self._resolve_subspace(leaf)
        stats = leaf.stats
        allowed = leaf.allowed
        base = 3 * y
        for feature, value in x.items():
            entry = stats.get(feature)
            if entry is None:
                if allowed is not None:
                    if feature not in allowed:
                        cap = leaf.admission_cap
                        if cap is None or len(allowed) >= cap:
                            continue
                        allowed.add(feature)
                entry = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, value, value]
                stats[feature] = entry
                self._observer_entries += 1
            entry[base] += w
            delta = value - entry[base + 1]
            entry[base + 1] += w * delta / entry[base]
            entry[base + 2] += w * delta * (value - entry[base + 1])
            if value < entry[6]:
                entry[6] = value
            elif value > entry[7]:
                entry[7] = value

    def _maybe_split(self, leaf: _LeafNode):
        if (
            leaf.instances_since_attempt < self.grace_period
            or self.frozen
            or leaf.depth >= self.max_depth
        ):
            return leaf
        leaf.instances_since_attempt = 0
        w0, w1 = leaf.class_weights
        if w0 <= 0.0 or w1 <= 0.0:
            return leaf

        best, second_gain = self._best_candidates(leaf)
        if best is None or best.gain <= 0.0:
            return leaf
        epsilon = hoeffding_bound(1.0, self.split_confidence, w0 + w1)
        if best.gain - second_gain > epsilon or epsilon < self.tie_threshold:
            return self._split_leaf(leaf, best)
        return leaf

    def _best_candidates(self, leaf: _LeafNode):
        best: _Candidate | None = None
        second_gain = 0.0  # the null split
        n_points = self.n_split_points
        for feature in sorted(leaf.stats):
            entry = leaf.stats[feature]
            w0, m0, v0, w1, m1, v1, fmin, fmax = entry
            if fmax <= fmin:
                continue
            feature_best: _Candidate | None = None
            span = fmax - fmin
            for i in range(1, n_points + 1):
                t = fmin + span * i / (n_points + 1)
                left0 = _gaussian_left_weight(w0, m0, v0, t)
                left1 = _gaussian_left_weight(w1, m1, v1, t)
                right0 = w0 - left0
                right1 = w1 - left1
                total = w0 + w1
                n_left = left0 + left1
                n_right = right0 + right1
                gain = _entropy(w0, w1) - (
                    n_left / total * _entropy(left0, left1)
                    + n_right / total * _entropy(right0, right1)
                )
                if feature_best is None or gain > feature_best.gain:
                    feature_best = _Candidate(gain, feature, t, (left0, left1), (right0, right1))
            if feature_best is None:
                continue
            if best is None or feature_best.gain > best.gain:
                if best is not None:
                    second_gain = max(second_gain, best.gain)
                best = feature_best
            else:
                second_gain = max(second_gain, feature_best.gain)
        return best, second_gain

    def _split_leaf(self, leaf: _LeafNode, best: _Candidate) -> _SplitNode:
        self._n_leaves -= 1
        self._observer_entries -= len(leaf.stats)
        left = self._new_leaf(leaf.depth + 1, list(best.left_dist))
        right = self._new_leaf(leaf.depth + 1, list(best.right_dist))
        self._n_splits += 1
        return _SplitNode(
            best.feature,
            best.threshold,
            left,
            right,
            leaf.depth,
            leaf.total_weight,
            self.drift_detector_factory(),
        )

    # -- routing / prediction --------------------------------------------------

    @staticmethod
    def _route_left(node: _SplitNode, value) -> bool:
        if value is None:
            return node.left.total_weight >= node.right.total_weight
        return value <= node.threshold

    def _find_leaf(self, node, x) -> _LeafNode:
        while type(node) is _SplitNode:
            node = node.left if self._route_left(node, x.get(node.feature)) else node.right
        return node

    def _subtree_error(self, node, x, y) -> float:
        leaf = self._find_leaf(node, x)
        w0, w1 = leaf.class_weights
        pred = 1 if w1 > w0 else 0
        return 0.0 if pred == y else 1.0

    def predict_proba_one(self, x: Mapping[str, float]) -> dict[int, float]:
        leaf = self._find_leaf(self.root, x)
        w0, w1 = leaf.class_weights
        total = w0 + w1
        if total <= 0.0:
            return {0: 0.5, 1: 0.5}
        return {0: w0 / total, 1: w1 / total}

    def predict_one(self, x: Mapping[str, float]) -> int:
        proba = self.predict_proba_one(x)
        return 1 if proba[1] > proba[0] else 0

    # -- bookkeeping ------------------------------------------------------------

    def _forget_subtree(self, node, keep) -> None:
        """Drop counters for a replaced subtree, sparing the ``keep`` branch."""
        stack = [node]
        while stack:
            current = stack.pop()
            if current is keep or current is None:
                continue
            if type(current) is _LeafNode:
                self._n_leaves -= 1
                self._observer_entries -= len(current.stats)
            else:
                self._n_splits -= 1
                stack.append(current.left)
                stack.append(current.right)
                stack.append(current.alternate)

    def estimated_size_bytes(self) -> int:
        return (
            self._n_splits * _BYTES_PER_SPLIT
            + self._n_leaves * _BYTES_PER_LEAF
            + self._observer_entries * _BYTES_PER_ENTRY
        )

    def _check_memory(self) -> None:
        if not self.frozen and self.estimated_size_bytes() > self.max_size_mb * 2**20:
            self.frozen = True

    @property
    def n_nodes(self) -> int:
        return self._n_leaves + self._n_splits

    # -- export ------------------------------------------------------------------

    def dump(self) -> dict:
        """JSON-serializable main-tree structure for the explainer."""
        return {"format": "wikiguard-tree", "version": 1, "kind": "hatc", "root": _dump_node(self.root)}


def _dump_node(node) -> dict:
    if type(node) is _LeafNode:
        return {
            "leaf": True,
            "counts": list(node.class_weights),
            "weight": node.total_weight,
        }
    return {
        "leaf": False,
        "feature": node.feature,
        "threshold": node.threshold,
        "weight": node.total_weight,
        "left": _dump_node(node.left),
        "right": _dump_node(node.right),
    }
