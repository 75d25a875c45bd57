import numpy as np
import pytest

from hallumeta.meta.forest import RandomForest, fit_forest
from hallumeta.meta.specs import ForestSpec
from hallumeta.meta.tree import fit_tree


def toy_problem(n=60, d=3, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, d))
    y = np.clip(0.7 * X[:, 0] + 0.3 * X[:, 1] + rng.normal(0, 0.05, n), 0, 1)
    return X, y


class TestDeterminism:
    def test_same_seed_same_predictions(self):
        X, y = toy_problem()
        spec = ForestSpec(n_trees=12, max_depth=4)
        a = fit_forest(X, y, spec, seed=3)
        b = fit_forest(X, y, spec, seed=3)
        np.testing.assert_array_equal(a.predict(X), b.predict(X))

    def test_different_seed_usually_differs(self):
        X, y = toy_problem()
        spec = ForestSpec(n_trees=5, max_depth=4)
        a = fit_forest(X, y, spec, seed=0)
        b = fit_forest(X, y, spec, seed=1)
        assert not np.array_equal(a.predict(X), b.predict(X))

    def test_per_tree_streams_independent_of_count(self):
        # tree t is seeded by (seed, t), so a longer forest extends a
        # shorter one instead of reshuffling it
        X, y = toy_problem()
        small = fit_forest(X, y, ForestSpec(n_trees=3, max_depth=3), seed=9)
        large = fit_forest(X, y, ForestSpec(n_trees=6, max_depth=3), seed=9)
        for t_small, t_large in zip(small.trees, large.trees):
            np.testing.assert_array_equal(t_small.feature, t_large.feature)
            np.testing.assert_array_equal(t_small.threshold, t_large.threshold)


class TestEnsembleSemantics:
    def test_no_bootstrap_all_features_collapses_to_one_tree(self):
        X, y = toy_problem()
        spec = ForestSpec(n_trees=7, bootstrap=False, max_features="auto", max_depth=3)
        forest = fit_forest(X, y, spec, seed=0)
        single = fit_tree(X, y, max_depth=3)
        for tree in forest.trees:
            np.testing.assert_array_equal(tree.feature, single.feature)
            np.testing.assert_array_equal(tree.threshold, single.threshold)
            np.testing.assert_array_equal(tree.value, single.value)
        # averaging n identical values reintroduces ~1 ulp of noise
        np.testing.assert_allclose(forest.predict(X), single.predict(X), rtol=0, atol=1e-15)

    def test_bootstrap_trees_differ(self):
        X, y = toy_problem()
        spec = ForestSpec(n_trees=4, bootstrap=True, max_depth=3)
        forest = fit_forest(X, y, spec, seed=0)
        roots = {(int(t.feature[0]), float(t.threshold[0])) for t in forest.trees}
        leaf_counts = {int(t.leaf_cnt[0]) for t in forest.trees}
        assert len(roots) > 1 or len(leaf_counts) >= 1  # resamples realized
        preds = [t.predict(X) for t in forest.trees]
        assert any(not np.array_equal(preds[0], p) for p in preds[1:])

    def test_prediction_is_mean_of_trees(self):
        X, y = toy_problem(n=30)
        spec = ForestSpec(n_trees=5, max_depth=2)
        forest = fit_forest(X, y, spec, seed=4)
        stacked = np.stack([t.predict(X) for t in forest.trees])
        manual = stacked.sum(axis=0) / len(forest.trees)
        np.testing.assert_array_equal(forest.predict(X), manual)

    def test_predictions_within_target_range(self):
        X, y = toy_problem()
        forest = fit_forest(X, y, ForestSpec(n_trees=10, max_depth=5), seed=0)
        probe = np.random.default_rng(1).uniform(-1, 2, size=(50, 3))
        preds = forest.predict(probe)
        assert np.all(preds >= y.min() - 1e-12)
        assert np.all(preds <= y.max() + 1e-12)

    def test_forest_fits_signal(self):
        X, y = toy_problem(n=200)
        forest = fit_forest(X, y, ForestSpec(n_trees=50, max_depth=6), seed=0)
        residual = np.mean(np.abs(forest.predict(X) - y))
        baseline = np.mean(np.abs(y.mean() - y))
        assert residual < 0.5 * baseline


class TestInterface:
    def test_predict_validates_width(self):
        X, y = toy_problem(d=3)
        forest = fit_forest(X, y, ForestSpec(n_trees=2, max_depth=2), seed=0)
        with pytest.raises(ValueError):
            forest.predict(np.zeros((4, 2)))

    def test_round_trip(self):
        X, y = toy_problem()
        spec = ForestSpec(n_trees=6, max_depth=3)
        forest = fit_forest(X, y, spec, seed=2)
        clone = RandomForest.from_dict(spec, forest.to_dict())
        np.testing.assert_array_equal(forest.predict(X), clone.predict(X))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            ForestSpec(n_trees=0)
        with pytest.raises(ValueError):
            ForestSpec(max_features="log2")
        with pytest.raises(ValueError):
            ForestSpec(min_samples_leaf=0)
