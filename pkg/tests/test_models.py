import math

import numpy as np
import pytest

from sevlab.features import SparseVector, fit_tfidf, transform
from sevlab.models import (
    CorruptModelError,
    ModelError,
    ModelSpec,
    ModelVersionError,
    load_model,
    predict_batch,
    save_model,
    train,
    train_gradient_boosting,
    train_linear_svm,
    train_naive_bayes,
    train_random_forest,
)

from conftest import make_doc


def sv(*pairs):
    return SparseVector(tuple(pairs))


def tfidf_corpus(texts):
    docs = [make_doc(t, doc_id=f"d{i}") for i, t in enumerate(texts)]
    model = fit_tfidf(docs)
    return model, [transform(model, d) for d in docs]


def separable_corpus(n_per_class=10, seed=0):
    """Two classes with disjoint vocabularies: linearly separable."""
    rng = np.random.default_rng(seed)
    pools = {
        "P": ["alpha", "bravo", "charlie", "delta", "echo"],
        "Q": ["zulu", "yankee", "xray", "whiskey", "victor"],
    }
    texts, labels = [], []
    for label, pool in pools.items():
        for _ in range(n_per_class):
            k = int(rng.integers(2, 5))
            words = [pool[i] for i in rng.choice(len(pool), size=k, replace=False)]
            texts.append(" ".join(words))
            labels.append(label)
    model, X = tfidf_corpus(texts)
    return X, labels


def accuracy(model, X, y):
    return sum(p == t for p, t in zip(model.predict_batch(X), y)) / len(y)


class TestModelSpec:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ModelError, match="unknown model kind"):
            ModelSpec(kind="perceptron")

    def test_unknown_hyperparameter_rejected(self):
        with pytest.raises(ModelError, match="unknown hyperparameter"):
            ModelSpec(kind="naive_bayes", hyperparameters={"allpha": 2.0})

    def test_known_hyperparameters_accepted(self):
        ModelSpec(kind="random_forest", hyperparameters={"n_trees": 5})
        ModelSpec(kind="linear_svm", hyperparameters={"lambda": 0.1, "epochs": 3})
        ModelSpec(kind="gradient_boosting", hyperparameters={"depth": 1})


class TestNaiveBayes:
    def test_hand_computed_posterior(self):
        """Two single-doc classes; the worked posterior arithmetic is done
        here with independent formulas."""
        model_tfidf, X = tfidf_corpus(["good happy", "sad bad"])
        nb = train_naive_bayes(X, ["P", "Q"], ModelSpec(kind="naive_bayes"))

        w = math.sqrt(0.5)  # each term's normalized tf-idf weight
        total = 2 * w
        theta_present = (1 + w) / (4 + total)
        theta_absent = 1 / (4 + total)
        score_p = math.log(0.5) + math.log(theta_present)
        score_q = math.log(0.5) + math.log(theta_absent)
        expected_p = math.exp(score_p) / (math.exp(score_p) + math.exp(score_q))

        x = transform(model_tfidf, make_doc("happy"))
        assert nb.predict(x) == "P"
        proba = nb.predict_proba(x)
        assert proba["P"] == pytest.approx(expected_p, abs=1e-9)

    def test_single_class_always_predicted(self):
        _, X = tfidf_corpus(["a b", "b c", "c d"])
        nb = train_naive_bayes(X, ["Only"] * 3, ModelSpec(kind="naive_bayes"))
        for x in X + [sv()]:
            assert nb.predict(x) == "Only"

    def test_posteriors_sum_to_one(self):
        X, y = separable_corpus()
        nb = train_naive_bayes(X, y, ModelSpec(kind="naive_bayes"))
        rng = np.random.default_rng(1)
        for _ in range(20):
            entries = tuple(
                (int(i), float(rng.random()))
                for i in sorted(rng.choice(9, size=3, replace=False))
            )
            proba = nb.predict_proba(SparseVector(entries))
            assert sum(proba.values()) == pytest.approx(1.0, abs=1e-9)

    def test_matches_dense_brute_force(self):
        """Tiny corpora: compare with an independent dense Bayes computation."""
        rng = np.random.default_rng(7)
        for trial in range(10):
            n_docs = int(rng.integers(2, 6))
            vocab = [f"t{i}" for i in range(int(rng.integers(2, 10)))]
            texts, labels = [], []
            for d in range(n_docs):
                k = int(rng.integers(1, 5))
                texts.append(" ".join(vocab[i] for i in rng.integers(0, len(vocab), size=k)))
                labels.append("A" if rng.random() < 0.5 else "B")
            if len(set(labels)) < 2:
                labels[0] = "A"
                labels[-1] = "B"
            tfidf_model, X = tfidf_corpus(texts)
            alpha = 1.0
            nb = train_naive_bayes(X, labels, ModelSpec(kind="naive_bayes"))

            classes = sorted(set(labels))
            F = tfidf_model.n_features
            dense = np.zeros((n_docs, F))
            for row, x in enumerate(X):
                for i, v in x.entries:
                    dense[row, i] = v
            for probe_text in texts:
                probe = transform(tfidf_model, make_doc(probe_text))
                dense_probe = np.zeros(F)
                for i, v in probe.entries:
                    dense_probe[i] = v
                scores = []
                for c in classes:
                    rows = [r for r in range(n_docs) if labels[r] == c]
                    prior = len(rows) / n_docs
                    weight = dense[rows].sum(axis=0)
                    theta = (alpha + weight) / (alpha * F + weight.sum())
                    scores.append(math.log(prior) + float(dense_probe @ np.log(theta)))
                scores = np.array(scores)
                expected = np.exp(scores - scores.max())
                expected /= expected.sum()
                got = nb.predict_proba(probe)
                for c, e in zip(classes, expected):
                    assert got[c] == pytest.approx(float(e), abs=1e-9)

    def test_zero_vector_predicts_max_prior(self):
        _, X = tfidf_corpus(["a", "b", "c", "d", "e"])
        nb = train_naive_bayes(X, ["A", "A", "A", "B", "B"], ModelSpec(kind="naive_bayes"))
        assert nb.predict(sv()) == "A"

    def test_dimension_mismatch(self):
        with pytest.raises(ModelError, match="rows but"):
            train_naive_bayes([sv((0, 1.0))], ["A", "B"], ModelSpec(kind="naive_bayes"))


class TestRandomForest:
    def spec(self, **hp):
        hp.setdefault("n_trees", 15)
        return ModelSpec(kind="random_forest", hyperparameters=hp, seed=5)

    def test_separable_training_accuracy(self):
        X, y = separable_corpus(n_per_class=10)
        rf = train_random_forest(X, y, self.spec())
        assert accuracy(rf, X, y) == 1.0

    def test_deterministic(self):
        X, y = separable_corpus()
        a = train_random_forest(X, y, self.spec())
        b = train_random_forest(X, y, self.spec())
        assert a.trees == b.trees
        assert a.predict_batch(X) == b.predict_batch(X)

    def test_degenerate_single_leaf(self):
        _, X = tfidf_corpus(["a"] * 12 + ["b"] * 3)
        y = ["A"] * 12 + ["B"] * 3
        spec = ModelSpec(
            kind="random_forest",
            hyperparameters={"n_trees": 1, "min_samples_split": len(X) + 1},
            seed=0,
        )
        rf = train_random_forest(X, y, spec)
        tree = rf.trees[0]
        assert "leaf" in tree  # no split happened
        assert rf.predict(sv((0, 1.0))) == "A"

    def test_prediction_in_class_list(self):
        X, y = separable_corpus()
        rf = train_random_forest(X, y, self.spec())
        rng = np.random.default_rng(3)
        for _ in range(20):
            entries = tuple(
                (int(i), float(rng.random())) for i in sorted(rng.choice(9, 3, replace=False))
            )
            assert rf.predict(SparseVector(entries)) in rf.classes


class TestLinearSvm:
    def spec(self, **hp):
        return ModelSpec(kind="linear_svm", hyperparameters=hp, seed=11)

    def test_separable_training_accuracy(self):
        X, y = separable_corpus(n_per_class=10)
        svm = train_linear_svm(X, y, self.spec())
        assert accuracy(svm, X, y) == 1.0

    def test_scaling_inputs_keeps_predictions(self):
        X, y = separable_corpus(n_per_class=10)
        scaled = [x.scale(2.0) for x in X]
        base = train_linear_svm(X, y, self.spec())
        rescaled = train_linear_svm(scaled, y, self.spec())
        assert base.predict_batch(X) == rescaled.predict_batch(scaled) == list(y)

    def test_deterministic(self):
        X, y = separable_corpus()
        a = train_linear_svm(X, y, self.spec())
        b = train_linear_svm(X, y, self.spec())
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.biases, b.biases)

    def test_margin_tie_breaks_more_severe(self):
        from sevlab.models.svm import LinearSvmModel

        model = LinearSvmModel(
            classes=["Mild", "Severe"],
            hyperparameters={"lambda": 1e-4, "epochs": 1},
            seed=0,
            weights=np.zeros((2, 3)),
            biases=np.zeros(2),
            n_features=3,
        )
        assert model.predict(sv((0, 1.0))) == "Severe"


class TestGradientBoosting:
    def spec(self, **hp):
        hp.setdefault("stages", 30)
        return ModelSpec(kind="gradient_boosting", hyperparameters=hp, seed=2)

    def test_separable_training_accuracy(self):
        X, y = separable_corpus(n_per_class=10)
        gb = train_gradient_boosting(X, y, self.spec())
        assert accuracy(gb, X, y) == 1.0

    def test_zero_stages_predicts_majority(self):
        _, X = tfidf_corpus(["a b", "a c", "b c", "d", "e"])
        y = ["A", "A", "A", "B", "B"]
        gb = train_gradient_boosting(X, y, self.spec(stages=0))
        for x in X:
            assert gb.predict(x) == "A"

    def test_loss_trace_non_increasing(self):
        X, y = separable_corpus(n_per_class=10)
        gb = train_gradient_boosting(X, y, self.spec(stages=40))
        assert gb.loss_trace, "trainer must record the loss trace"
        for losses in gb.loss_trace:
            assert len(losses) == 41
            for before, after in zip(losses, losses[1:]):
                assert after <= before + 1e-12

    def test_deterministic(self):
        X, y = separable_corpus()
        a = train_gradient_boosting(X, y, self.spec())
        b = train_gradient_boosting(X, y, self.spec())
        assert a.ensembles == b.ensembles


class TestPredictSurface:
    def test_batch_preserves_order_and_length(self):
        X, y = separable_corpus()
        model = train_naive_bayes(X, y, ModelSpec(kind="naive_bayes"))
        batch = predict_batch(model, X)
        assert len(batch) == len(X)
        assert batch == [model.predict(x) for x in X]

    def test_train_dispatch(self):
        X, y = separable_corpus()
        for kind in ("naive_bayes", "random_forest", "linear_svm", "gradient_boosting"):
            hp = {"n_trees": 5} if kind == "random_forest" else (
                {"stages": 5} if kind == "gradient_boosting" else {}
            )
            model = train(X, y, ModelSpec(kind=kind, hyperparameters=hp, seed=1))
            assert model.kind == kind
            assert set(model.predict_batch(X)) <= set(y)


class TestPersistence:
    def roundtrip(self, model, tmp_path, probes):
        path = tmp_path / f"{model.kind}.model"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.kind == model.kind
        assert loaded.classes == model.classes
        assert loaded.predict_batch(probes) == model.predict_batch(probes)
        return path

    def test_round_trip_all_kinds(self, tmp_path):
        X, y = separable_corpus()
        rng = np.random.default_rng(0)
        probes = X + [
            SparseVector(
                tuple((int(i), float(rng.random())) for i in sorted(rng.choice(9, 3, replace=False)))
            )
            for _ in range(100)
        ]
        for kind in ("naive_bayes", "random_forest", "linear_svm", "gradient_boosting"):
            hp = {"n_trees": 5} if kind == "random_forest" else (
                {"stages": 5} if kind == "gradient_boosting" else {}
            )
            model = train(X, y, ModelSpec(kind=kind, hyperparameters=hp, seed=4))
            self.roundtrip(model, tmp_path, probes)

    def test_truncated_file_is_corrupt(self, tmp_path):
        X, y = separable_corpus()
        model = train_naive_bayes(X, y, ModelSpec(kind="naive_bayes"))
        path = tmp_path / "nb.model"
        save_model(model, path)
        content = path.read_text()
        path.write_text(content[: len(content) // 2])
        with pytest.raises(CorruptModelError):
            load_model(path)

    def test_tampered_payload_is_corrupt(self, tmp_path):
        X, y = separable_corpus()
        model = train_naive_bayes(X, y, ModelSpec(kind="naive_bayes"))
        path = tmp_path / "nb.model"
        save_model(model, path)
        content = path.read_text().replace('"n_features":', '"n_feature5":', 1)
        path.write_text(content)
        with pytest.raises(CorruptModelError, match="checksum"):
            load_model(path)

    def test_future_version_rejected(self, tmp_path):
        X, y = separable_corpus()
        model = train_naive_bayes(X, y, ModelSpec(kind="naive_bayes"))
        path = tmp_path / "nb.model"
        save_model(model, path)
        content = path.read_text().replace("sevlab-model 1", "sevlab-model 2", 1)
        path.write_text(content)
        with pytest.raises(ModelVersionError, match="version 2"):
            load_model(path)
