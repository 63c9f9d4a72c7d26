"""Multinomial naive Bayes over TF-IDF weights used as fractional counts."""

from __future__ import annotations

import numpy as np

from ..features import SparseVector
from .base import ModelError, ModelSpec, TrainedModel, check_dimensions, class_codes

DEFAULTS = {"alpha": 1.0}


class NaiveBayesModel(TrainedModel):
    kind = "naive_bayes"

    def __init__(self, classes, hyperparameters, seed, log_prior, log_theta, n_features):
        super().__init__(classes, hyperparameters, seed)
        self.log_prior = log_prior  # (C,)
        self.log_theta = log_theta  # (C, F) smoothed log feature weights
        self.n_features = n_features

    def scores(self, x: SparseVector) -> np.ndarray:
        out = np.array(self.log_prior, dtype=float)
        for index, weight in x.entries:
            if index < self.n_features:
                out += weight * self.log_theta[:, index]
        return out

    def predict(self, x: SparseVector) -> str:
        return self.classes[int(np.argmax(self.scores(x)))]

    def predict_proba(self, x: SparseVector) -> dict[str, float]:
        """Posterior over classes; always sums to 1."""
        s = self.scores(x)
        s -= s.max()
        e = np.exp(s)
        e /= e.sum()
        return {c: float(p) for c, p in zip(self.classes, e)}

    def to_payload(self) -> dict:
        return {
            "n_features": self.n_features,
            "log_prior": [float(v) for v in self.log_prior],
            "log_theta": [[float(v) for v in row] for row in self.log_theta],
        }

    @classmethod
    def from_payload(cls, classes, hyperparameters, seed, payload) -> "NaiveBayesModel":
        return cls(
            classes,
            hyperparameters,
            seed,
            log_prior=np.array(payload["log_prior"]),
            log_theta=np.array(payload["log_theta"]),
            n_features=payload["n_features"],
        )


def train_naive_bayes(X: list[SparseVector], y: list[str], spec: ModelSpec) -> NaiveBayesModel:
    """Fit class priors and Laplace-smoothed per-term weights in log space."""
    check_dimensions(X, y)
    params = {**DEFAULTS, **spec.hyperparameters}
    alpha = float(params["alpha"])
    if alpha <= 0:
        raise ModelError("alpha must be positive")
    classes, codes = class_codes(y)
    n_features = max(1, 1 + max((max(v.indices) for v in X if len(v)), default=-1))
    n_classes = len(classes)

    weight = np.zeros((n_classes, n_features))
    counts = np.zeros(n_classes)
    for vec, code in zip(X, codes):
        counts[code] += 1
        for index, w in vec.entries:
            weight[code, index] += w

    log_prior = np.log(counts / counts.sum())
    totals = weight.sum(axis=1, keepdims=True)
    log_theta = np.log((alpha + weight) / (alpha * n_features + totals))
    return NaiveBayesModel(
        classes, params, spec.seed, log_prior=log_prior, log_theta=log_theta, n_features=n_features
    )
