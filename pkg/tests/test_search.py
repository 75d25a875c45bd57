import numpy as np
import pytest

from hallumeta.errors import FoldTooSmall, GridEmpty
from hallumeta.meta.search import (
    default_grids,
    fit_family,
    kfold_indices,
    meta_search_cv,
    train_and_select,
)
from hallumeta.meta.specs import CvConfig, ForestSpec, GbtSpec, MlpSpec


def toy_problem(n=60, d=3, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, d))
    y = np.clip(0.7 * X[:, 0] + 0.3 * X[:, 1] + rng.normal(0, 0.03, n), 0, 1)
    return X, y


class TestKfold:
    def test_partition_covers_every_row_once(self):
        folds = kfold_indices(23, CvConfig(k=5, seed=3))
        combined = np.sort(np.concatenate(folds))
        np.testing.assert_array_equal(combined, np.arange(23))

    def test_fold_sizes_balanced(self):
        folds = kfold_indices(23, CvConfig(k=5, seed=0))
        sizes = sorted(len(f) for f in folds)
        assert sizes == [4, 4, 5, 5, 5]

    def test_shuffle_depends_on_cv_seed_only(self):
        a = kfold_indices(20, CvConfig(k=4, seed=1))
        b = kfold_indices(20, CvConfig(k=4, seed=1))
        c = kfold_indices(20, CvConfig(k=4, seed=2))
        for fa, fb in zip(a, b):
            np.testing.assert_array_equal(fa, fb)
        assert any(not np.array_equal(fa, fc) for fa, fc in zip(a, c))

    def test_unshuffled_folds_are_contiguous(self):
        folds = kfold_indices(6, CvConfig(k=3, seed=0, shuffle=False))
        np.testing.assert_array_equal(folds[0], [0, 1])
        np.testing.assert_array_equal(folds[2], [4, 5])

    def test_too_few_rows(self):
        with pytest.raises(FoldTooSmall):
            kfold_indices(3, CvConfig(k=4))


class TestMetaSearch:
    def test_empty_grid_rejected(self):
        X, y = toy_problem()
        with pytest.raises(GridEmpty):
            meta_search_cv(X, y, "forest", [], CvConfig(k=3))

    def test_unknown_family_rejected(self):
        with pytest.raises(ValueError):
            fit_family("svm", np.zeros((4, 1)), np.zeros(4), None, 0)

    def test_better_spec_wins(self):
        # a depth-capped stump cannot express the signal; the deeper
        # candidate must win the cross-validated comparison
        X, y = toy_problem(n=120)
        grid = [
            ForestSpec(n_trees=5, max_depth=1, bootstrap=False),
            ForestSpec(n_trees=40, max_depth=6),
        ]
        result = meta_search_cv(X, y, "forest", grid, CvConfig(k=4), seed=0)
        assert result.spec == grid[1]

    def test_exact_tie_keeps_first_in_grid(self):
        X, y = toy_problem()
        spec = ForestSpec(n_trees=3, max_depth=2)
        result = meta_search_cv(X, y, "forest", [spec, spec], CvConfig(k=3), seed=0)
        assert result.candidates[0]["cv_mae_mean"] == result.candidates[1]["cv_mae_mean"]
        assert result.cv_mae_mean == result.candidates[0]["cv_mae_mean"]
        assert result.spec == spec

    def test_winner_mae_is_minimum_over_candidates(self):
        X, y = toy_problem()
        grid = [
            ForestSpec(n_trees=5, max_depth=1),
            ForestSpec(n_trees=10, max_depth=3),
            ForestSpec(n_trees=20, max_depth=6),
        ]
        result = meta_search_cv(X, y, "forest", grid, CvConfig(k=3), seed=0)
        means = [c["cv_mae_mean"] for c in result.candidates]
        assert result.cv_mae_mean == min(means)

    def test_mean_of_fold_maes(self):
        X, y = toy_problem()
        result = meta_search_cv(
            X, y, "gbt", [GbtSpec(n_rounds=10, max_depth=2)], CvConfig(k=4), seed=0
        )
        assert len(result.cv_maes) == 4
        assert result.cv_mae_mean == pytest.approx(np.mean(result.cv_maes))

    def test_oof_predictions_cover_all_rows(self):
        X, y = toy_problem(n=40)
        result = meta_search_cv(
            X, y, "forest", [ForestSpec(n_trees=5, max_depth=3)], CvConfig(k=4), seed=0
        )
        assert len(result.oof_predictions) == 40
        assert all(np.isfinite(result.oof_predictions))

    def test_deterministic(self):
        X, y = toy_problem()
        grid = [ForestSpec(n_trees=8, max_depth=3)]
        a = meta_search_cv(X, y, "forest", grid, CvConfig(k=3, seed=1), seed=2)
        b = meta_search_cv(X, y, "forest", grid, CvConfig(k=3, seed=1), seed=2)
        assert a.cv_mae_mean == b.cv_mae_mean
        np.testing.assert_array_equal(
            np.asarray(a.oof_predictions), np.asarray(b.oof_predictions)
        )
        np.testing.assert_array_equal(a.model.predict(X), b.model.predict(X))


class TestFamilySelection:
    def test_lowest_mae_family_wins(self):
        X, y = toy_problem(n=120)
        grids = {
            "forest": [ForestSpec(n_trees=40, max_depth=6)],
            "mlp": [MlpSpec(hidden_layers=(), epochs=1, learning_rate=1e-5)],
        }
        result = train_and_select(X, y, grids, CvConfig(k=4), seed=0)
        assert result.family == "forest"

    def test_exact_tie_falls_back_to_family_order(self):
        # one tree without bagging and a single full-rate boosting round on
        # the same stump geometry produce the same mean-leaf predictor.
        # Dyadic targets and power-of-two leaf counts make the arithmetic
        # exact in both families, so the tie is bitwise and the earlier
        # family must win.
        X = np.arange(8, dtype=np.float64)[:, None]
        y = np.array([0.25] * 4 + [0.75] * 4)
        grids = {
            "forest": [ForestSpec(n_trees=1, max_depth=1, bootstrap=False)],
            "gbt": [
                GbtSpec(n_rounds=1, learning_rate=1.0, max_depth=1,
                        reg_lambda=0.0, reg_alpha=0.0, min_child_weight=0.0)
            ],
        }
        cv = CvConfig(k=4, seed=0, shuffle=False)
        forest_only = meta_search_cv(X, y, "forest", grids["forest"], cv, seed=0)
        gbt_only = meta_search_cv(X, y, "gbt", grids["gbt"], cv, seed=0)
        assert forest_only.cv_mae_mean == gbt_only.cv_mae_mean
        assert forest_only.oof_spearman == gbt_only.oof_spearman
        result = train_and_select(X, y, grids, cv, seed=0)
        assert result.family == "forest"

    def test_mae_tie_prefers_higher_oof_spearman(self, monkeypatch):
        import hallumeta.meta.search as search_mod
        from hallumeta.meta.specs import TrainedMeta

        def fake_search(X, y, family, grid, cv, seed=0):
            rho = {"forest": 0.5, "gbt": 0.9}[family]
            return TrainedMeta(
                family=family, spec=grid[0], model=None,
                cv_mae_mean=0.25, cv_maes=(0.25,), oof_spearman=rho,
                candidates=[{"family": family}],
            )

        monkeypatch.setattr(search_mod, "meta_search_cv", fake_search)
        result = search_mod.train_and_select(
            np.zeros((4, 1)), np.zeros(4),
            {"forest": [ForestSpec()], "gbt": [GbtSpec()]},
            CvConfig(k=2), seed=0,
        )
        assert result.family == "gbt"

    def test_merged_candidates_span_families(self):
        X, y = toy_problem()
        grids = {
            "forest": [ForestSpec(n_trees=5, max_depth=2)],
            "gbt": [GbtSpec(n_rounds=5, max_depth=2), GbtSpec(n_rounds=10, max_depth=2)],
        }
        result = train_and_select(X, y, grids, CvConfig(k=3), seed=0)
        families = [c["family"] for c in result.candidates]
        assert families == ["forest", "gbt", "gbt"]

    def test_all_grids_empty_rejected(self):
        X, y = toy_problem()
        with pytest.raises(GridEmpty):
            train_and_select(X, y, {"forest": [], "gbt": []}, CvConfig(k=3))

    def test_missing_families_are_skipped(self):
        X, y = toy_problem()
        result = train_and_select(
            X, y, {"gbt": [GbtSpec(n_rounds=5, max_depth=2)]}, CvConfig(k=3), seed=0
        )
        assert result.family == "gbt"


class TestDefaultGrids:
    def test_families_present_and_ordered_lists(self):
        grids = default_grids()
        assert set(grids) == {"forest", "gbt", "mlp"}
        assert all(isinstance(g, list) and g for g in grids.values())

    def test_forest_coverage(self):
        forest = default_grids()["forest"]
        assert {s.n_trees for s in forest} >= {50, 100, 200}
        assert {s.max_depth for s in forest} >= {None, 3, 6}
        assert {s.min_samples_split for s in forest} >= {2, 5}
        assert {s.min_samples_leaf for s in forest} >= {1, 3}
        assert {s.max_features for s in forest} == {"auto", "sqrt"}
        assert {s.bootstrap for s in forest} == {True, False}

    def test_gbt_coverage(self):
        gbt = default_grids()["gbt"]
        assert {s.n_rounds for s in gbt} >= {50, 100, 200}
        assert {s.learning_rate for s in gbt} >= {0.05, 0.1, 0.3}
        assert {s.max_depth for s in gbt} >= {3, 6, None}
        assert {s.min_child_weight for s in gbt} >= {1, 5}
        assert {s.gamma for s in gbt} >= {0.0, 0.1}
        assert {s.subsample for s in gbt} >= {1.0, 0.8}
        assert {s.colsample_bytree for s in gbt} >= {1.0, 0.8}
        assert {s.reg_alpha for s in gbt} >= {0.0, 0.1}
        assert {s.reg_lambda for s in gbt} >= {0.0, 1.0}

    def test_mlp_coverage(self):
        mlp = default_grids()["mlp"]
        depths = {len(s.hidden_layers) for s in mlp}
        assert depths >= {0, 1, 2}
        acts = {act for s in mlp for _, act in s.hidden_layers}
        assert acts == {"relu", "tanh"}
        assert any(s.dropout > 0 for s in mlp)
        assert any(s.l2_reg > 0 for s in mlp)
