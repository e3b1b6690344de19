import numpy as np
import pytest

from wikiguard.models import AdaptiveRandomForest, HoeffdingAdaptiveTree


def random_stream(n, seed=0, n_features=6):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        y = int(rng.integers(0, 2))
        x = {f"f{j}": float(rng.normal(loc=y * (j % 2), scale=1.0)) for j in range(n_features)}
        yield x, y


class TestAdaptiveRandomForest:
    def test_paper_best_defaults(self):
        forest = AdaptiveRandomForest()
        assert forest.n_models == 75
        assert forest.lambda_ == 100.0
        assert forest.trees[0].subspace == 100

    def test_vote_share(self):
        forest = AdaptiveRandomForest(n_models=3, seed=0, subspace=None)
        # prime tree leaves so votes are (1, 1, 0)
        forest.trees[0].root.class_weights = [0.0, 5.0]
        forest.trees[1].root.class_weights = [1.0, 5.0]
        forest.trees[2].root.class_weights = [5.0, 1.0]
        proba = forest.predict_proba_one({"f0": 0.0})
        assert proba == {0: 1 / 3, 1: 2 / 3}
        assert forest.predict_one({"f0": 0.0}) == 1

    def test_tie_vote_predicts_class_zero(self):
        forest = AdaptiveRandomForest(n_models=2, seed=0, subspace=None)
        forest.trees[0].root.class_weights = [0.0, 5.0]
        forest.trees[1].root.class_weights = [5.0, 0.0]
        assert forest.predict_one({"f0": 0.0}) == 0

    def test_degenerate_equivalence_with_single_tree(self):
        stream = list(random_stream(2000, seed=11))
        tree = HoeffdingAdaptiveTree()
        forest = AdaptiveRandomForest(n_models=1, subspace=None, disable_bagging=True, seed=3)
        for x, y in stream:
            assert forest.predict_proba_one(x)[1] in (0.0, 1.0)
            assert forest.predict_one(x) == tree.predict_one(x)
            tree.learn_one(x, y)
            forest.learn_one(x, y)

    def test_degenerate_equivalence_with_clamped_subspace(self):
        # subspace larger than the feature universe clamps to all features
        stream = list(random_stream(1500, seed=13, n_features=4))
        tree = HoeffdingAdaptiveTree()
        forest = AdaptiveRandomForest(n_models=1, subspace=100, disable_bagging=True, seed=5)
        for x, y in stream:
            assert forest.predict_one(x) == tree.predict_one(x)
            tree.learn_one(x, y)
            forest.learn_one(x, y)

    def test_identical_seeds_identical_predictions(self):
        stream = list(random_stream(800, seed=21))
        votes = []
        for _ in range(2):
            forest = AdaptiveRandomForest(n_models=5, seed=42, lambda_=6)
            run = []
            for x, y in stream:
                run.append(tuple(forest.votes(x)))
                forest.learn_one(x, y)
            votes.append(run)
        assert votes[0] == votes[1]

    def test_different_seeds_diverge(self):
        stream = list(random_stream(800, seed=21))
        traces = []
        for seed in (1, 2):
            forest = AdaptiveRandomForest(n_models=5, seed=seed, lambda_=6)
            trace = []
            for x, y in stream:
                trace.append(tuple(forest.votes(x)))
                forest.learn_one(x, y)
            traces.append(trace)
        assert traces[0] != traces[1]

    def test_subspace_size_respected(self):
        rng = np.random.default_rng(0)
        forest = AdaptiveRandomForest(n_models=3, subspace=4, seed=1, lambda_=6)
        for _ in range(1200):
            x = {f"f{j}": float(rng.normal()) for j in range(12)}
            forest.learn_one(x, int(rng.integers(0, 2)))
        for tree in forest.trees:

            def check(node):
                if hasattr(node, "left"):
                    check(node.left)
                    check(node.right)
                else:
                    assert len(node.stats) <= 4

            check(tree.root)

    def test_ensemble_size_constant(self):
        forest = AdaptiveRandomForest(n_models=7, seed=0, lambda_=6)
        for x, y in random_stream(500, seed=2):
            forest.learn_one(x, y)
        assert len(forest.trees) == 7

    def test_dump_has_one_entry_per_tree(self):
        forest = AdaptiveRandomForest(n_models=4, seed=0, lambda_=6)
        for x, y in random_stream(300, seed=3):
            forest.learn_one(x, y)
        dump = forest.dump()
        assert dump["kind"] == "arfc"
        assert len(dump["trees"]) == 4

    def test_rejects_empty_ensemble(self):
        with pytest.raises(ValueError):
            AdaptiveRandomForest(n_models=0)
