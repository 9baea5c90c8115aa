import numpy as np
import pytest

from mdresolve.classify import (DimensionMismatch, Feature, FeatureSpec, RaggedVectors, SingleClassTraining,
                                SvmModel, SvmParams, TrainingExample, WeightVector, build_training_matrix,
                                objective, split_70_30, subgradient, svm_predict, svm_train, weight_vector)
from mdresolve.fixtures import MAS_PAPER, MAS_PAPERS
from mdresolve.relcore import Tuple

X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
LABELS = [0, 0, 1, 1]
Y = np.array([-1, -1, 1, 1], dtype=float)


def hinge(m, X, y):
    return float(np.maximum(0.0, 1.0 - y * (X @ m.weights + m.bias)).sum())


class TestTraining:
    def test_separable_accuracy(self):
        m = svm_train(X, LABELS)
        assert [svm_predict(m, x) for x in X] == LABELS
        assert svm_predict(m, (1, 1)) == 1

    def test_separable_near_zero_hinge(self):
        # the optimum has w = (2, 0), b = -1 and no hinge loss; subgradient steps land within 2e-3
        m = svm_train(X, LABELS)
        assert m.converged
        assert hinge(m, X, Y) < 2e-3
        assert m.weights == pytest.approx([2.0, 0.0], abs=2e-3) and m.bias == pytest.approx(-1.0, abs=2e-3)

    def test_loss_history_non_increasing(self):
        m = svm_train(X, LABELS)
        assert all(b <= a for a, b in zip(m.history, m.history[1:]))

    def test_single_class(self):
        with pytest.raises(SingleClassTraining):
            svm_train(X, [1, 1, 1, 1])

    def test_duplicated_examples(self):
        a = svm_train(X, LABELS)
        b = svm_train(np.vstack([X, X]), LABELS + LABELS)
        assert b.weights == pytest.approx(a.weights, abs=1e-2)
        assert b.bias == pytest.approx(a.bias, abs=1e-2)
        assert [svm_predict(b, x) for x in X] == LABELS

    def test_deterministic(self):
        assert svm_train(X, LABELS, SvmParams(seed=3)).to_text() == svm_train(X, LABELS, SvmParams(seed=3)).to_text()

    def test_dual_matches_primal(self):
        m = svm_train(X, LABELS)
        rng = np.random.default_rng(0)
        for v in rng.uniform(-2, 3, size=(20, 2)):
            assert m.dual_decision(v) == pytest.approx(m.decision(v), abs=1e-9)

    def test_no_convergence_warning(self):
        with pytest.warns(UserWarning):
            m = svm_train(X, LABELS, SvmParams(max_epochs=3))
        assert not m.converged


class TestPredict:
    def test_sign_rule(self):
        m = SvmModel(np.array([1.0, 0.0]), 0.0)
        assert svm_predict(m, (2, 3)) == 1 and svm_predict(m, (-2, 3)) == 0
        assert svm_predict(m, WeightVector((1, 2), (2.0, 3.0))) == 1

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            svm_predict(SvmModel(np.array([1.0, 0.0]), 0.0), (1, 2, 3))

    def test_text_round_trip(self, tmp_path):
        m = svm_train(X, LABELS, feature_names=("x", "y"))
        p = tmp_path / "m.txt"
        m.save(p)
        back = SvmModel.load(p)
        assert back.to_text() == m.to_text()
        assert back.feature_names == ("x", "y")
        assert back.dual_decision((1, 1)) == pytest.approx(m.decision((1, 1)))


class TestGradient:
    def test_finite_differences(self):
        rng = np.random.default_rng(11)
        Xr = rng.normal(size=(12, 3))
        yr = np.where(rng.random(12) < 0.5, 1.0, -1.0)
        checked = 0
        while checked < 20:
            w, b = rng.normal(size=3), float(rng.normal())
            if np.min(np.abs(yr * (Xr @ w + b) - 1.0)) < 1e-3:
                continue
            gw, gb = subgradient(w, b, Xr, yr, 0.7)
            h = 1e-6
            num = []
            for k in range(3):
                e = np.zeros(3)
                e[k] = h
                num.append((objective(w + e, b, Xr, yr, 0.7) - objective(w - e, b, Xr, yr, 0.7)) / (2 * h))
            nb = (objective(w, b + h, Xr, yr, 0.7) - objective(w, b - h, Xr, yr, 0.7)) / (2 * h)
            for g, n in zip(list(gw) + [gb], num + [nb]):
                assert g == pytest.approx(n, rel=1e-4, abs=1e-8)
            checked += 1


class TestWeightVectors:
    SPEC = FeatureSpec("Paper", [Feature("Title", "jaro-winkler"), Feature("Year", "levenshtein"),
                                 Feature("CID", "equality")])

    def tuples(self):
        return [Tuple(r[0], r[1:]) for r in MAS_PAPERS]

    def test_symmetric(self):
        t = self.tuples()
        for a in t:
            for b in t:
                assert weight_vector(a, b, self.SPEC, MAS_PAPER).entries == \
                    weight_vector(b, a, self.SPEC, MAS_PAPER).entries

    def test_identical_records(self):
        spec = FeatureSpec("Paper", [Feature("Title", "jaro-winkler", 2.0), Feature("Year", "levenshtein", 0.5)])
        t = self.tuples()[0]
        assert weight_vector(t, t, spec, MAS_PAPER).entries == (2.0, 0.5)

    def test_null_entry_zero(self):
        spec = FeatureSpec("Paper", [Feature("JID", "equality")])
        a, b = self.tuples()[:2]
        assert weight_vector(a, b, spec, MAS_PAPER).entries == (0.0,)

    def test_non_feature_attribute(self):
        with pytest.raises(ValueError):
            FeatureSpec("Paper", [Feature("Bl", "equality")]).validate(MAS_PAPER)
        with pytest.raises(ValueError):
            Feature("Title", "equality", 0.0)


class TestMatrix:
    def test_shape(self):
        ex = [TrainingExample(WeightVector((1, 2), (0.1, 0.2, 0.3)), 1),
              TrainingExample(WeightVector((1, 3), (0.4, 0.5, 0.6)), 0)]
        Xm, y = build_training_matrix(ex)
        assert Xm.shape == (2, 3) and y == [1, 0]

    def test_empty(self):
        Xm, y = build_training_matrix([])
        assert Xm.size == 0 and y == []

    def test_ragged(self):
        with pytest.raises(RaggedVectors):
            build_training_matrix([TrainingExample(WeightVector((1, 2), (0.1,)), 1),
                                   TrainingExample(WeightVector((1, 3), (0.4, 0.5)), 0)])

    def test_bad_label(self):
        with pytest.raises(ValueError):
            TrainingExample(WeightVector((1, 2), (0.1,)), 2)


class TestSplit:
    def test_seven_three(self):
        ex = [(i, i % 2) for i in range(10)]
        train, test = split_70_30(ex, 5, label=lambda e: e[1])
        assert len(train) == 7 and len(test) == 3
        assert sorted(train + test) == ex

    def test_deterministic(self):
        ex = list(range(20))
        assert split_70_30(ex, 1, label=lambda e: e % 2) == split_70_30(ex, 1, label=lambda e: e % 2)

    def test_empty(self):
        assert split_70_30([], 0) == ([], [])

    def test_both_sides_keep_each_class(self):
        for seed in range(30):
            ex = [(i, 1 if i < 2 else 0) for i in range(10)]
            train, test = split_70_30(ex, seed, label=lambda e: e[1])
            assert {e[1] for e in train} == {0, 1} and {e[1] for e in test} == {0, 1}
            assert len(train) == 7
