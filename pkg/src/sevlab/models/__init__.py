"""From-scratch baseline classifiers over sparse TF-IDF vectors.

All four trainers are pure functions of (X, y, spec) including the seed;
predictions always come from the training label set. Models persist to a
versioned text format.
"""

from __future__ import annotations

from ..features import SparseVector
from .base import (
    CorruptModelError,
    ModelError,
    ModelSpec,
    ModelVersionError,
    TrainedModel,
    load_model,
    save_model,
)
from .boosting import GradientBoostingModel, train_gradient_boosting
from .forest import RandomForestModel, train_random_forest
from .naive_bayes import NaiveBayesModel, train_naive_bayes
from .svm import LinearSvmModel, train_linear_svm

__all__ = [
    "ModelSpec",
    "TrainedModel",
    "ModelError",
    "ModelVersionError",
    "CorruptModelError",
    "MODEL_CLASSES",
    "train",
    "train_naive_bayes",
    "train_random_forest",
    "train_linear_svm",
    "train_gradient_boosting",
    "predict",
    "predict_batch",
    "save_model",
    "load_model",
]

MODEL_CLASSES = {
    cls.kind: cls
    for cls in (NaiveBayesModel, RandomForestModel, LinearSvmModel, GradientBoostingModel)
}

_TRAINERS = {
    "naive_bayes": train_naive_bayes,
    "random_forest": train_random_forest,
    "linear_svm": train_linear_svm,
    "gradient_boosting": train_gradient_boosting,
}


def train(X: list[SparseVector], y: list[str], spec: ModelSpec) -> TrainedModel:
    """Train one model of the requested kind."""
    return _TRAINERS[spec.kind](X, y, spec)


def predict(model: TrainedModel, x: SparseVector) -> str:
    return model.predict(x)


def predict_batch(model: TrainedModel, xs: list[SparseVector]) -> list[str]:
    return model.predict_batch(xs)
