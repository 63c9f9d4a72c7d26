"""TF-IDF vectorization over clean documents.

The variant is pinned so every downstream oracle is exact: smoothed
idf(t) = ln((1 + N) / (1 + df(t))) + 1, raw term counts, and L2
normalization of the final vector. Vectors are sparse (sorted index,
weight) pairs; the Euclidean distance here is what the oversampler uses
for nearest neighbors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .corpus import CleanDocument

__all__ = ["SparseVector", "TfidfModel", "FeatureError", "fit_tfidf", "transform", "distance",
           "save_tfidf", "load_tfidf"]


class FeatureError(ValueError):
    """Raised for empty corpora or malformed model files."""


@dataclass(frozen=True)
class SparseVector:
    """Strictly increasing indices with non-zero weights."""

    entries: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        last = -1
        for index, weight in self.entries:
            if index <= last:
                raise FeatureError("sparse indices must be strictly increasing")
            if weight == 0.0:
                raise FeatureError("zero weights must not be stored")
            last = index

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    def as_dict(self) -> dict[int, float]:
        return dict(self.entries)

    def norm(self) -> float:
        return math.sqrt(sum(w * w for _, w in self.entries))

    def dot(self, other: "SparseVector") -> float:
        a, b = self.as_dict(), other.as_dict()
        if len(a) > len(b):
            a, b = b, a
        return sum(w * b[i] for i, w in a.items() if i in b)

    def scale(self, factor: float) -> "SparseVector":
        if factor == 0.0:
            return SparseVector(())
        return SparseVector(tuple((i, w * factor) for i, w in self.entries))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class TfidfModel:
    """Fitted vocabulary and idf weights."""

    vocabulary: dict[str, int]  # term -> column index, 0..|vocab|-1
    idf: dict[str, float]
    document_count: int

    def __post_init__(self) -> None:
        if sorted(self.vocabulary.values()) != list(range(len(self.vocabulary))):
            raise FeatureError("vocabulary indices must be 0..|vocab|-1 without gaps")

    @property
    def n_features(self) -> int:
        return len(self.vocabulary)


def fit_tfidf(docs: list[CleanDocument]) -> TfidfModel:
    """Fit vocabulary (first-seen order) and smoothed idf weights."""
    if not docs or all(doc.token_count == 0 for doc in docs):
        raise FeatureError("cannot fit TF-IDF on an empty corpus")
    vocabulary: dict[str, int] = {}
    df: dict[str, int] = {}
    for doc in docs:
        tokens = doc.tokens
        for token in tokens:
            if token not in vocabulary:
                vocabulary[token] = len(vocabulary)
        for token in set(tokens):
            df[token] = df.get(token, 0) + 1
    n = len(docs)
    idf = {term: math.log((1 + n) / (1 + df[term])) + 1.0 for term in vocabulary}
    return TfidfModel(vocabulary=vocabulary, idf=idf, document_count=n)


def transform(model: TfidfModel, doc: CleanDocument) -> SparseVector:
    """Embed a document: raw counts times idf, L2-normalized.

    Out-of-vocabulary tokens are ignored; a document with no known
    tokens maps to the zero vector.
    """
    counts: dict[int, float] = {}
    weights: dict[int, float] = {}
    for token in doc.tokens:
        index = model.vocabulary.get(token)
        if index is None:
            continue
        counts[index] = counts.get(index, 0.0) + 1.0
        weights[index] = model.idf[token]
    if not counts:
        return SparseVector(())
    raw = {i: counts[i] * weights[i] for i in counts}
    norm = math.sqrt(sum(w * w for w in raw.values()))
    return SparseVector(tuple((i, raw[i] / norm) for i in sorted(raw)))


def distance(a: SparseVector, b: SparseVector) -> float:
    """Euclidean distance over the union of indices."""
    da, db = a.as_dict(), b.as_dict()
    total = 0.0
    for i in set(da) | set(db):
        diff = da.get(i, 0.0) - db.get(i, 0.0)
        total += diff * diff
    return math.sqrt(total)


def save_tfidf(model: TfidfModel, path: str | Path) -> None:
    """Persist as text: document_count, then per-line term, index, idf."""
    terms = sorted(model.vocabulary, key=model.vocabulary.get)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{model.document_count}\n")
        for term in terms:
            fh.write(f"{term}\t{model.vocabulary[term]}\t{model.idf[term]!r}\n")


def load_tfidf(path: str | Path) -> TfidfModel:
    lines = Path(path).read_text("utf-8").splitlines()
    if not lines:
        raise FeatureError(f"empty TF-IDF model file {path}")
    try:
        document_count = int(lines[0])
        vocabulary: dict[str, int] = {}
        idf: dict[str, float] = {}
        for line in lines[1:]:
            if not line.strip():
                continue
            term, index_str, idf_str = line.split("\t")
            vocabulary[term] = int(index_str)
            idf[term] = float(idf_str)
    except ValueError as exc:
        raise FeatureError(f"bad TF-IDF model file {path}: {exc}") from exc
    return TfidfModel(vocabulary=vocabulary, idf=idf, document_count=document_count)
