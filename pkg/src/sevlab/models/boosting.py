"""One-vs-rest gradient boosting with shallow regression trees.

Each class gets a logistic model: a prior log-odds baseline plus
learning-rate-scaled trees fit to the loss gradient (residuals), with
Newton leaf values. The per-stage training loss is recorded during
training (not persisted) so convergence can be audited.
"""

from __future__ import annotations

import numpy as np

from ..features import SparseVector
from ._split import Columns, best_split_sse
from .base import ModelError, ModelSpec, TrainedModel, check_dimensions, class_codes

DEFAULTS = {"depth": 2, "stages": 100, "learning_rate": 0.1}

_EPS = 1e-12


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def _logloss(targets: np.ndarray, scores: np.ndarray) -> float:
    p = np.clip(_sigmoid(scores), _EPS, 1.0 - _EPS)
    return float(-np.mean(targets * np.log(p) + (1.0 - targets) * np.log(1.0 - p)))


def _grow(columns, rows, residual, hessian, depth_left) -> dict:
    if depth_left == 0 or len(rows) < 2:
        return _leaf(rows, residual, hessian)
    split = best_split_sse(columns, rows, residual, np.arange(columns.n_features))
    if split is None:
        return _leaf(rows, residual, hessian)
    feature, threshold = split
    values = columns.block(np.array([feature]), rows)[:, 0]
    left_mask = values <= threshold
    return {
        "feature": feature,
        "threshold": threshold,
        "left": _grow(columns, rows[left_mask], residual, hessian, depth_left - 1),
        "right": _grow(columns, rows[~left_mask], residual, hessian, depth_left - 1),
    }


def _leaf(rows, residual, hessian) -> dict:
    denominator = max(float(hessian[rows].sum()), _EPS)
    return {"leaf": float(residual[rows].sum() / denominator)}


def _tree_value(node: dict, x: dict[int, float]) -> float:
    while "leaf" not in node:
        value = x.get(node["feature"], 0.0)
        node = node["left"] if value <= node["threshold"] else node["right"]
    return node["leaf"]


class GradientBoostingModel(TrainedModel):
    kind = "gradient_boosting"

    def __init__(self, classes, hyperparameters, seed, baselines, ensembles, n_features):
        super().__init__(classes, hyperparameters, seed)
        self.baselines = baselines  # per-class prior log-odds
        self.ensembles = ensembles  # per-class list of trees
        self.n_features = n_features
        self.loss_trace: list[list[float]] = []  # filled by the trainer only

    def scores(self, x: SparseVector) -> np.ndarray:
        xd = x.as_dict()
        lr = float(self.hyperparameters["learning_rate"])
        out = np.array(self.baselines, dtype=float)
        for c, trees in enumerate(self.ensembles):
            out[c] += lr * sum(_tree_value(tree, xd) for tree in trees)
        return out

    def predict(self, x: SparseVector) -> str:
        s = self.scores(x)
        best = max(range(len(self.classes)), key=lambda c: (s[c], c))
        return self.classes[best]

    def to_payload(self) -> dict:
        return {
            "n_features": self.n_features,
            "baselines": [float(b) for b in self.baselines],
            "ensembles": self.ensembles,
        }

    @classmethod
    def from_payload(cls, classes, hyperparameters, seed, payload) -> "GradientBoostingModel":
        return cls(
            classes,
            hyperparameters,
            seed,
            payload["baselines"],
            payload["ensembles"],
            payload["n_features"],
        )


def train_gradient_boosting(X: list[SparseVector], y: list[str], spec: ModelSpec) -> GradientBoostingModel:
    check_dimensions(X, y)
    params = {**DEFAULTS, **spec.hyperparameters}
    depth = int(params["depth"])
    stages = int(params["stages"])
    lr = float(params["learning_rate"])
    if depth < 1 or stages < 0 or lr <= 0:
        raise ModelError("depth must be >= 1, stages >= 0, learning_rate > 0")
    classes, codes = class_codes(y)
    n = len(X)
    n_features = max(1, 1 + max((max(v.indices) for v in X if len(v)), default=-1))
    columns = Columns(X, n_features)
    rows_all = np.arange(n)
    xds = [x.as_dict() for x in X]

    baselines: list[float] = []
    ensembles: list[list[dict]] = []
    trace: list[list[float]] = []
    for c in range(len(classes)):
        targets = (codes == c).astype(float)
        prior = float(np.clip(targets.mean(), _EPS, 1.0 - _EPS))
        baseline = float(np.log(prior / (1.0 - prior)))
        scores = np.full(n, baseline)
        trees: list[dict] = []
        losses = [_logloss(targets, scores)]
        for _ in range(stages):
            p = _sigmoid(scores)
            residual = targets - p
            hessian = p * (1.0 - p)
            tree = _grow(columns, rows_all, residual, hessian, depth)
            trees.append(tree)
            scores += lr * np.array([_tree_value(tree, xd) for xd in xds])
            losses.append(_logloss(targets, scores))
        baselines.append(baseline)
        ensembles.append(trees)
        trace.append(losses)

    model = GradientBoostingModel(classes, params, spec.seed, baselines, ensembles, n_features)
    model.loss_trace = trace
    return model
