"""Dataset assembly: stratified splits and SMOTE balancing.

Splitting is per class with a seeded shuffle (test ids drawn first, then
validation, remainder to training), so fixed per-class validation/test
counts are reproduced exactly. Oversampling interpolates new minority
points between a real point and one of its k nearest same-class
neighbors until every class matches the majority count.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bdi import canonical_order
from .corpus import CleanDocument
from .features import SparseVector, distance

__all__ = [
    "SplitSpec",
    "DatasetSplits",
    "LabeledVector",
    "DatasetError",
    "shuffle_split",
    "smote_oversample",
    "export_dataset",
]


class DatasetError(ValueError):
    """Raised for infeasible split specs or unresolvable documents."""


@dataclass(frozen=True)
class SplitSpec:
    """Per-class validation/test counts plus the shuffle seed."""

    counts: dict[str, tuple[int, int]]  # class -> (validation_count, test_count)
    seed: int

    def __post_init__(self) -> None:
        for label, (v, t) in self.counts.items():
            if v < 0 or t < 0:
                raise DatasetError(f"class {label!r}: negative split counts")


@dataclass(frozen=True)
class DatasetSplits:
    train: tuple[tuple[str, str], ...]  # (doc_id, coarse label)
    validation: tuple[tuple[str, str], ...]
    test: tuple[tuple[str, str], ...]
    language: str
    seed: int


@dataclass(frozen=True)
class LabeledVector:
    """A vector with its class; synthetic points carry no document id."""

    vector: SparseVector
    label: str
    doc_id: str = ""
    synthetic: bool = False

    def __post_init__(self) -> None:
        if self.synthetic and self.doc_id:
            raise DatasetError("synthetic points must not carry a doc_id")


def _rng(seed: int, stream: int) -> np.random.Generator:
    """Per-class generator derived from (seed, stream); 64-bit safe."""
    return np.random.default_rng([seed & (2**64 - 1), stream])


def shuffle_split(
    population: list[tuple[str, str]], spec: SplitSpec, language: str = "en"
) -> DatasetSplits:
    """Stratified split of (doc_id, label) pairs, deterministic per seed."""
    by_class: dict[str, list[str]] = {}
    for doc_id, label in population:
        by_class.setdefault(label, []).append(doc_id)

    train: list[tuple[str, str]] = []
    validation: list[tuple[str, str]] = []
    test: list[tuple[str, str]] = []
    for rank, label in enumerate(canonical_order(by_class)):
        ids = by_class[label]
        v, t = spec.counts.get(label, (0, 0))
        if v + t > len(ids):
            raise DatasetError(
                f"class {label!r}: requested {v} validation + {t} test "
                f"but only {len(ids)} members"
            )
        rng = _rng(spec.seed, rank)
        shuffled = [ids[i] for i in rng.permutation(len(ids))]
        test.extend((d, label) for d in shuffled[:t])
        validation.extend((d, label) for d in shuffled[t : t + v])
        train.extend((d, label) for d in shuffled[t + v :])
    return DatasetSplits(
        train=tuple(train),
        validation=tuple(validation),
        test=tuple(test),
        language=language,
        seed=spec.seed,
    )


def smote_oversample(
    train: list[LabeledVector], k: int = 5, seed: int = 0
) -> list[LabeledVector]:
    """Bring every class up to the majority count with synthetic points.

    Each synthetic point is x + u * (nn - x) for a random same-class
    point x, one of its k nearest neighbors nn (Euclidean), and u drawn
    uniformly from [0, 1). Real points pass through unchanged. A class
    with fewer than k+1 members uses all its neighbors; a singleton
    class is duplicated verbatim with a warning.
    """
    if k < 1:
        raise DatasetError("k must be at least 1")
    if not train:
        raise DatasetError("cannot oversample an empty training set")
    by_class: dict[str, list[LabeledVector]] = {}
    for point in train:
        by_class.setdefault(point.label, []).append(point)
    target = max(len(points) for points in by_class.values())

    result = list(train)
    for rank, label in enumerate(canonical_order(by_class)):
        points = by_class[label]
        needed = target - len(points)
        if needed == 0:
            continue
        rng = _rng(seed, rank)
        if len(points) == 1:
            warnings.warn(
                f"class {label!r} has a single member; duplicating it verbatim",
                stacklevel=2,
            )
            result.extend(
                LabeledVector(vector=points[0].vector, label=label, synthetic=True)
                for _ in range(needed)
            )
            continue
        k_eff = min(k, len(points) - 1)
        neighbor_ids = _nearest_neighbors(points, k_eff)
        for _ in range(needed):
            base = int(rng.integers(len(points)))
            neighbor = points[neighbor_ids[base][int(rng.integers(k_eff))]]
            u = float(rng.random())
            result.append(
                LabeledVector(
                    vector=_interpolate(points[base].vector, neighbor.vector, u),
                    label=label,
                    synthetic=True,
                )
            )
    return result


def _nearest_neighbors(points: list[LabeledVector], k: int) -> list[list[int]]:
    """For each point, the indices of its k nearest same-class neighbors."""
    n = len(points)
    out = []
    for i in range(n):
        dists = [(distance(points[i].vector, points[j].vector), j) for j in range(n) if j != i]
        dists.sort()
        out.append([j for _, j in dists[:k]])
    return out


def _interpolate(a: SparseVector, b: SparseVector, u: float) -> SparseVector:
    da, db = a.as_dict(), b.as_dict()
    entries = []
    for i in sorted(set(da) | set(db)):
        va = da.get(i, 0.0)
        value = va + u * (db.get(i, 0.0) - va)
        if value != 0.0:
            entries.append((i, value))
    return SparseVector(tuple(entries))


def export_dataset(
    splits: DatasetSplits,
    docs: dict[str, CleanDocument],
    out_dir: str | Path,
) -> dict:
    """Write train/validation/test JSONL files plus a manifest.

    Each line carries {id, language, text, label}; the manifest records
    the seed and per-split class counts for reproducibility.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"language": splits.language, "seed": splits.seed, "splits": {}}
    for name, rows in (
        ("train", splits.train),
        ("validation", splits.validation),
        ("test", splits.test),
    ):
        counts: dict[str, int] = {}
        path = out_dir / f"{name}.jsonl"
        with open(path, "w", encoding="utf-8") as fh:
            for doc_id, label in rows:
                doc = docs.get(doc_id)
                if doc is None:
                    raise DatasetError(f"split references unknown document {doc_id!r}")
                fh.write(
                    json.dumps(
                        {"id": doc_id, "language": doc.language, "text": doc.text, "label": label},
                        ensure_ascii=False,
                    )
                    + "\n"
                )
                counts[label] = counts.get(label, 0) + 1
        manifest["splits"][name] = {"total": len(rows), "classes": counts}
    with open(out_dir / "split_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
