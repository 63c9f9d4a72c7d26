"""One-vs-rest linear SVM trained by stochastic subgradient descent.

Hinge loss with L2 regularization, learning rate 1/(lambda * t). The
weight vector is kept as scale * direction so each step touches only the
non-zero coordinates of the current example. The bias is unregularized.
Margin ties at prediction time break toward the more severe class.
"""

from __future__ import annotations

import numpy as np

from ..features import SparseVector
from .base import ModelError, ModelSpec, TrainedModel, check_dimensions, class_codes

DEFAULTS = {"lambda": 1e-4, "epochs": 50}


def _train_binary(X, targets, lam, epochs, rng, n_features):
    scale = 1.0
    direction = np.zeros(n_features)
    bias = 0.0
    t = 0
    n = len(X)
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            if t == 1:
                scale, direction[:] = 1.0, 0.0  # (1 - eta*lam) == 0 on the first step
            else:
                scale *= 1.0 - 1.0 / t
            x = X[i]
            margin = targets[i] * (scale * sum(w * direction[j] for j, w in x.entries) + bias)
            if margin < 1.0:
                step = eta * targets[i] / scale
                for j, w in x.entries:
                    direction[j] += step * w
                bias += eta * targets[i]
    return scale * direction, bias


class LinearSvmModel(TrainedModel):
    kind = "linear_svm"

    def __init__(self, classes, hyperparameters, seed, weights, biases, n_features):
        super().__init__(classes, hyperparameters, seed)
        self.weights = weights  # (C, F)
        self.biases = biases  # (C,)
        self.n_features = n_features

    def margins(self, x: SparseVector) -> np.ndarray:
        out = np.array(self.biases, dtype=float)
        for index, weight in x.entries:
            if index < self.n_features:
                out += weight * self.weights[:, index]
        return out

    def predict(self, x: SparseVector) -> str:
        m = self.margins(x)
        # ties break toward the later (more severe) class
        best = max(range(len(self.classes)), key=lambda c: (m[c], c))
        return self.classes[best]

    def to_payload(self) -> dict:
        return {
            "n_features": self.n_features,
            "weights": [[float(v) for v in row] for row in self.weights],
            "biases": [float(v) for v in self.biases],
        }

    @classmethod
    def from_payload(cls, classes, hyperparameters, seed, payload) -> "LinearSvmModel":
        return cls(
            classes,
            hyperparameters,
            seed,
            weights=np.array(payload["weights"]),
            biases=np.array(payload["biases"]),
            n_features=payload["n_features"],
        )


def train_linear_svm(X: list[SparseVector], y: list[str], spec: ModelSpec) -> LinearSvmModel:
    check_dimensions(X, y)
    params = {**DEFAULTS, **spec.hyperparameters}
    lam = float(params["lambda"])
    epochs = int(params["epochs"])
    if lam <= 0 or epochs < 1:
        raise ModelError("lambda must be positive and epochs at least 1")
    classes, codes = class_codes(y)
    n_features = max(1, 1 + max((max(v.indices) for v in X if len(v)), default=-1))

    weights = np.zeros((len(classes), n_features))
    biases = np.zeros(len(classes))
    for c in range(len(classes)):
        rng = np.random.default_rng([spec.seed & (2**64 - 1), c])
        targets = np.where(codes == c, 1.0, -1.0)
        weights[c], biases[c] = _train_binary(X, targets, lam, epochs, rng, n_features)
    return LinearSvmModel(classes, params, spec.seed, weights, biases, n_features)
