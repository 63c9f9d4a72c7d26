"""Random forest: bagged Gini decision trees with feature subsampling.

Each tree gets its own generator derived from (seed, tree index), so a
forest can be grown in parallel and still match the sequential run
bit for bit. At each node sqrt(n_features) candidate features are
sampled; if none of them splits, the search widens to all features once
before the node becomes a leaf.
"""

from __future__ import annotations

import math

import numpy as np

from ..features import SparseVector
from ._split import Columns, best_split_gini
from .base import ModelError, ModelSpec, TrainedModel, check_dimensions, class_codes

DEFAULTS = {"n_trees": 100, "min_samples_split": 2}


def _grow(columns, rows, codes, n_classes, min_samples_split, rng) -> dict:
    counts = np.bincount(codes[rows], minlength=n_classes)
    if len(rows) < min_samples_split or int(counts.max()) == len(rows):
        return {"leaf": [int(c) for c in counts]}
    m = max(1, int(math.isqrt(columns.n_features)))
    candidates = rng.choice(columns.n_features, size=m, replace=False)
    split = best_split_gini(columns, rows, codes, n_classes, candidates)
    if split is None and m < columns.n_features:
        split = best_split_gini(
            columns, rows, codes, n_classes, np.arange(columns.n_features)
        )
    if split is None:
        return {"leaf": [int(c) for c in counts]}
    feature, threshold = split
    values = columns.block(np.array([feature]), rows)[:, 0]
    left_mask = values <= threshold
    return {
        "feature": feature,
        "threshold": threshold,
        "left": _grow(columns, rows[left_mask], codes, n_classes, min_samples_split, rng),
        "right": _grow(columns, rows[~left_mask], codes, n_classes, min_samples_split, rng),
    }


def _tree_predict(node: dict, x: dict[int, float]) -> np.ndarray:
    while "leaf" not in node:
        value = x.get(node["feature"], 0.0)
        node = node["left"] if value <= node["threshold"] else node["right"]
    return np.asarray(node["leaf"], dtype=float)


class RandomForestModel(TrainedModel):
    kind = "random_forest"

    def __init__(self, classes, hyperparameters, seed, trees, n_features):
        super().__init__(classes, hyperparameters, seed)
        self.trees = trees
        self.n_features = n_features

    def predict(self, x: SparseVector) -> str:
        xd = x.as_dict()
        votes = np.zeros(len(self.classes))
        for tree in self.trees:
            counts = _tree_predict(tree, xd)
            votes[int(np.argmax(counts))] += 1
        # argmax takes the first maximum: ties go to the earlier class
        return self.classes[int(np.argmax(votes))]

    def to_payload(self) -> dict:
        return {"n_features": self.n_features, "trees": self.trees}

    @classmethod
    def from_payload(cls, classes, hyperparameters, seed, payload) -> "RandomForestModel":
        return cls(classes, hyperparameters, seed, payload["trees"], payload["n_features"])


def train_random_forest(X: list[SparseVector], y: list[str], spec: ModelSpec) -> RandomForestModel:
    check_dimensions(X, y)
    params = {**DEFAULTS, **spec.hyperparameters}
    n_trees = int(params["n_trees"])
    min_samples_split = int(params["min_samples_split"])
    if n_trees < 1:
        raise ModelError("n_trees must be at least 1")
    classes, codes = class_codes(y)
    n_features = max(1, 1 + max((max(v.indices) for v in X if len(v)), default=-1))
    columns = Columns(X, n_features)
    n = len(X)

    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng([spec.seed & (2**64 - 1), t])
        rows = np.sort(rng.integers(0, n, size=n))
        trees.append(_grow(columns, rows, codes, len(classes), min_samples_split, rng))
    return RandomForestModel(classes, params, spec.seed, trees, n_features)
