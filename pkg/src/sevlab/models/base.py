"""Shared classifier surface: specs, trained-model base, persistence.

Model files are versioned, self-describing text: a header with kind,
class list, hyperparameters, and seed, a single-line JSON payload, and a
checksum footer so truncation or corruption is always detected.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..bdi import canonical_order
from ..features import SparseVector

FORMAT_VERSION = 1
_MAGIC = "sevlab-model"


class ModelError(ValueError):
    """Raised for invalid specs or training inputs."""


class ModelVersionError(ModelError):
    """Raised when a model file carries an unsupported format version."""


class CorruptModelError(ModelError):
    """Raised when a model file fails its integrity checks."""


KNOWN_HYPERPARAMETERS = {
    "naive_bayes": {"alpha"},
    "random_forest": {"n_trees", "min_samples_split"},
    "linear_svm": {"lambda", "epochs"},
    "gradient_boosting": {"depth", "stages", "learning_rate"},
}


@dataclass(frozen=True)
class ModelSpec:
    """What to train: kind, hyperparameter overrides, and the seed."""

    kind: str
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KNOWN_HYPERPARAMETERS:
            raise ModelError(
                f"unknown model kind {self.kind!r}; expected one of {sorted(KNOWN_HYPERPARAMETERS)}"
            )
        unknown = set(self.hyperparameters) - KNOWN_HYPERPARAMETERS[self.kind]
        if unknown:
            raise ModelError(
                f"unknown hyperparameter(s) for {self.kind}: {', '.join(sorted(unknown))}"
            )


class TrainedModel:
    """Base for the four classifiers: predict plus text persistence."""

    kind: str = ""

    def __init__(self, classes: list[str], hyperparameters: dict, seed: int):
        self.classes = list(classes)
        self.hyperparameters = dict(hyperparameters)
        self.seed = seed

    def predict(self, x: SparseVector) -> str:
        raise NotImplementedError

    def predict_batch(self, xs: list[SparseVector]) -> list[str]:
        return [self.predict(x) for x in xs]

    def to_payload(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_payload(cls, classes, hyperparameters, seed, payload) -> "TrainedModel":
        raise NotImplementedError


def class_codes(y: list[str]) -> tuple[list[str], np.ndarray]:
    """Canonically ordered class list and integer codes for the labels."""
    if not y:
        raise ModelError("no training labels")
    classes = canonical_order(set(y))
    index = {c: i for i, c in enumerate(classes)}
    return classes, np.array([index[label] for label in y], dtype=np.int64)


def check_dimensions(X: list[SparseVector], y: list[str]) -> None:
    if len(X) != len(y):
        raise ModelError(f"X has {len(X)} rows but y has {len(y)} labels")
    if not X:
        raise ModelError("empty training set")


def save_model(model: TrainedModel, path: str | Path) -> None:
    """Write the versioned text format with a checksum footer."""
    payload = json.dumps(model.to_payload(), sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{_MAGIC} {FORMAT_VERSION}\n")
        fh.write(f"kind\t{model.kind}\n")
        fh.write(f"classes\t{json.dumps(model.classes)}\n")
        fh.write(f"hyperparameters\t{json.dumps(model.hyperparameters, sort_keys=True)}\n")
        fh.write(f"seed\t{model.seed}\n")
        fh.write(f"payload\t{payload}\n")
        fh.write(f"sha256\t{digest}\n")
        fh.write("end\n")


def load_model(path: str | Path) -> TrainedModel:
    """Read a model file back; reject future versions and corrupt files."""
    from . import MODEL_CLASSES  # deferred to avoid a circular import

    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].startswith(_MAGIC):
        raise CorruptModelError(f"{path}: not a model file")
    try:
        version = int(lines[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise CorruptModelError(f"{path}: unreadable version header") from exc
    if version != FORMAT_VERSION:
        raise ModelVersionError(
            f"{path}: format version {version} not supported (expected {FORMAT_VERSION})"
        )
    if not lines[-1].strip() == "end":
        raise CorruptModelError(f"{path}: truncated file (missing end marker)")
    fields = {}
    for line in lines[1:-1]:
        key, _, value = line.partition("\t")
        fields[key] = value
    try:
        kind = fields["kind"]
        classes = json.loads(fields["classes"])
        hyperparameters = json.loads(fields["hyperparameters"])
        seed = int(fields["seed"])
        payload_text = fields["payload"]
        digest = fields["sha256"]
    except KeyError as exc:
        raise CorruptModelError(f"{path}: missing field {exc}") from exc
    if hashlib.sha256(payload_text.encode("utf-8")).hexdigest() != digest:
        raise CorruptModelError(f"{path}: payload checksum mismatch")
    if kind not in MODEL_CLASSES:
        raise CorruptModelError(f"{path}: unknown model kind {kind!r}")
    payload = json.loads(payload_text)
    return MODEL_CLASSES[kind].from_payload(classes, hyperparameters, seed, payload)
