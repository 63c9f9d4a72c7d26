import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sevlab.features import (
    FeatureError,
    SparseVector,
    distance,
    fit_tfidf,
    load_tfidf,
    save_tfidf,
    transform,
)

from conftest import make_doc


def corpus(*texts):
    return [make_doc(t, doc_id=f"d{i}") for i, t in enumerate(texts)]


def dense_tfidf_oracle(texts):
    """Independent dense implementation of the pinned TF-IDF variant."""
    docs = [t.split() for t in texts]
    vocab = []
    for tokens in docs:
        for tok in tokens:
            if tok not in vocab:
                vocab.append(tok)
    n = len(docs)
    df = {t: sum(1 for tokens in docs if t in tokens) for t in vocab}
    idf = {t: math.log((1 + n) / (1 + df[t])) + 1.0 for t in vocab}

    def embed(text):
        tokens = text.split()
        row = [tokens.count(t) * idf[t] if t in vocab else 0.0 for t in vocab]
        norm = math.sqrt(sum(v * v for v in row))
        return [v / norm for v in row] if norm else row

    return vocab, idf, embed


class TestFit:
    def test_idf_common_term(self):
        model = fit_tfidf(corpus("a b", "a c"))
        assert model.idf["a"] == pytest.approx(1.0, abs=1e-12)

    def test_idf_rare_term(self):
        model = fit_tfidf(corpus("a b", "a c"))
        assert model.idf["b"] == pytest.approx(math.log(3 / 2) + 1, abs=1e-12)
        assert model.idf["b"] == pytest.approx(1.4054651081, abs=1e-9)

    def test_single_doc(self):
        model = fit_tfidf(corpus("x x"))
        assert set(model.vocabulary) == {"x"}
        assert model.idf["x"] == pytest.approx(1.0)
        assert model.document_count == 1

    def test_empty_corpus_rejected(self):
        with pytest.raises(FeatureError, match="empty corpus"):
            fit_tfidf([])
        with pytest.raises(FeatureError, match="empty corpus"):
            fit_tfidf(corpus(""))

    def test_first_seen_vocabulary_order(self):
        model = fit_tfidf(corpus("b a", "c a"))
        assert model.vocabulary == {"b": 0, "a": 1, "c": 2}

    def test_idf_at_least_one(self):
        model = fit_tfidf(corpus("a b c", "a b", "a"))
        assert all(v >= 1.0 for v in model.idf.values())


class TestTransform:
    def test_hand_oracle_two_doc_corpus(self):
        model = fit_tfidf(corpus("a b", "a c"))
        vec = transform(model, make_doc("a b")).as_dict()
        idf_b = math.log(3 / 2) + 1
        norm = math.sqrt(1.0 + idf_b**2)
        assert norm == pytest.approx(math.sqrt(1 + 1.9754), abs=1e-4)
        assert vec[model.vocabulary["a"]] == pytest.approx(1.0 / norm, abs=1e-9)
        assert vec[model.vocabulary["b"]] == pytest.approx(idf_b / norm, abs=1e-9)
        assert vec[model.vocabulary["a"]] == pytest.approx(0.5797, abs=1e-4)
        assert vec[model.vocabulary["b"]] == pytest.approx(0.8148, abs=1e-4)

    def test_oov_only_doc_is_empty_vector(self):
        model = fit_tfidf(corpus("a b", "a c"))
        assert len(transform(model, make_doc("z q"))) == 0

    def test_unit_norm_contract(self):
        model = fit_tfidf(corpus("a b c", "b c d", "d e"))
        for text in ("a", "a b", "c d e", "a a b"):
            vec = transform(model, make_doc(text))
            assert vec.norm() == pytest.approx(1.0, abs=1e-9)

    def test_vocabulary_closure(self):
        model = fit_tfidf(corpus("a b", "c"))
        vec = transform(model, make_doc("a b c a"))
        assert all(i < model.n_features for i in vec.indices)

    @given(
        st.lists(
            st.lists(st.sampled_from("abcdefghij"), min_size=1, max_size=8),
            min_size=1,
            max_size=5,
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_matches_dense_oracle(self, token_lists):
        texts = [" ".join(tokens) for tokens in token_lists]
        vocab, idf, embed = dense_tfidf_oracle(texts)
        model = fit_tfidf(corpus(*texts))
        assert list(model.vocabulary) == vocab
        for term in vocab:
            assert model.idf[term] == pytest.approx(idf[term], abs=1e-9)
        for text in texts + ["a z", "j j j"]:
            expected = embed(text)
            got = transform(model, make_doc(text)).as_dict()
            for term, col in model.vocabulary.items():
                assert got.get(col, 0.0) == pytest.approx(expected[vocab.index(term)], abs=1e-9)


def sv(*pairs):
    return SparseVector(tuple(pairs))


class TestDistance:
    def test_identity(self):
        v = sv((0, 0.3), (4, 0.7))
        assert distance(v, v) == 0.0

    def test_orthogonal_unit_vectors(self):
        assert distance(sv((0, 1.0)), sv((1, 1.0))) == pytest.approx(math.sqrt(2))

    def test_three_four_five(self):
        assert distance(sv(), sv((0, 3.0), (1, 4.0))) == pytest.approx(5.0)

    @given(
        st.lists(
            st.tuples(st.integers(0, 6), st.floats(-5, 5).filter(lambda v: v != 0)),
            max_size=5,
        ),
        st.lists(
            st.tuples(st.integers(0, 6), st.floats(-5, 5).filter(lambda v: v != 0)),
            max_size=5,
        ),
        st.lists(
            st.tuples(st.integers(0, 6), st.floats(-5, 5).filter(lambda v: v != 0)),
            max_size=5,
        ),
    )
    @settings(max_examples=80, deadline=None)
    def test_symmetry_and_triangle(self, a, b, c):
        def build(pairs):
            merged = {}
            for i, v in pairs:
                merged[i] = v
            return sv(*sorted(merged.items()))

        va, vb, vc = build(a), build(b), build(c)
        assert distance(va, vb) == pytest.approx(distance(vb, va), abs=1e-12)
        assert distance(va, vc) <= distance(va, vb) + distance(vb, vc) + 1e-9


class TestSparseVector:
    def test_indices_strictly_increasing(self):
        with pytest.raises(FeatureError, match="strictly increasing"):
            sv((3, 1.0), (3, 2.0))

    def test_zero_weights_rejected(self):
        with pytest.raises(FeatureError, match="zero weights"):
            sv((0, 0.0))


class TestPersistence:
    def test_round_trip(self, tmp_path):
        model = fit_tfidf(corpus("a b c", "b c d", "e"))
        path = tmp_path / "tfidf.model"
        save_tfidf(model, path)
        loaded = load_tfidf(path)
        assert loaded.vocabulary == model.vocabulary
        assert loaded.document_count == model.document_count
        for term in model.vocabulary:
            assert loaded.idf[term] == model.idf[term]

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.model"
        path.write_text("")
        with pytest.raises(FeatureError):
            load_tfidf(path)
