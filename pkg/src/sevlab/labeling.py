"""Label votes and their fusion.

Each document collects three votes: one from questionnaire keyword
scoring, one from an external zero-shot classifier, and one from a human
expert. Votes fuse by weighted majority: unanimity wins outright, a
two-way majority wins, and any tie in the weighted argmax falls back to
the expert's label. Rare fine-grained classes then merge into the coarse
four-class scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bdi import (
    COARSE_LABELS,
    SEVERITY_LABELS,
    BdiLexicon,
    SeverityBands,
    map_score_to_band,
    score_text,
    severity_rank,
)
from .corpus import CleanDocument

__all__ = [
    "SOURCES",
    "LabelVote",
    "FusedLabel",
    "MergeMap",
    "ExpertAnnotation",
    "LabelingError",
    "keyword_label",
    "zeroshot_label",
    "record_expert_label",
    "fuse",
    "merge_rare",
    "default_merge_map",
]

SOURCES = ("keyword", "zeroshot", "expert")


class LabelingError(ValueError):
    """Raised for invalid votes or infeasible fusion inputs."""


@dataclass(frozen=True)
class LabelVote:
    """One labeler's verdict on one document."""

    doc_id: str
    source: str
    label: str
    confidence: float | None = None
    created_at: int = 0

    def __post_init__(self) -> None:
        if self.source not in SOURCES:
            raise LabelingError(f"unknown vote source {self.source!r}")
        if self.label not in SEVERITY_LABELS:
            raise LabelingError(f"unknown severity label {self.label!r}")
        if self.confidence is not None:
            if self.source != "zeroshot":
                raise LabelingError("confidence is only carried by zeroshot votes")
            if not 0.0 <= self.confidence <= 1.0:
                raise LabelingError(f"confidence {self.confidence} outside 0..1")


@dataclass(frozen=True)
class FusedLabel:
    """The fused verdict with its agreement provenance."""

    doc_id: str
    label: str
    agreement: str  # unanimous | majority | expert_fallback
    votes: tuple[LabelVote, LabelVote, LabelVote]


@dataclass(frozen=True)
class MergeMap:
    """Total map from the six fine labels to the four coarse ones."""

    mapping: dict[str, str] = field(
        default_factory=lambda: dict(_DEFAULT_MERGE)
    )

    def __post_init__(self) -> None:
        if set(self.mapping) != set(SEVERITY_LABELS):
            raise LabelingError("merge map must cover all six severity labels")
        bad = {v for v in self.mapping.values() if v not in COARSE_LABELS}
        if bad:
            raise LabelingError(f"merge targets outside the coarse label set: {sorted(bad)}")


_DEFAULT_MERGE = {
    "Normal": "Normal",
    "Mild": "Mild",
    "Borderline": "Mild",
    "Moderate": "Moderate",
    "Severe": "Severe",
    "Extreme": "Severe",
}


def default_merge_map() -> MergeMap:
    return MergeMap()


@dataclass(frozen=True)
class ExpertAnnotation:
    doc_id: str
    annotator_id: str
    label: str
    submitted_at: int

    def __post_init__(self) -> None:
        if self.label not in SEVERITY_LABELS:
            raise LabelingError(f"unknown severity label {self.label!r}")
        if not self.doc_id or not self.annotator_id:
            raise LabelingError("doc_id and annotator_id must be non-empty")


def keyword_label(
    doc: CleanDocument,
    lexicon: BdiLexicon,
    bands: SeverityBands,
    created_at: int = 0,
) -> LabelVote:
    """Vote from questionnaire keyword scoring mapped through the bands."""
    total = score_text(doc, lexicon).total
    return LabelVote(
        doc_id=doc.id,
        source="keyword",
        label=map_score_to_band(total, bands),
        created_at=created_at,
    )


def zeroshot_label(
    doc: CleanDocument,
    client,
    labelset: tuple[str, ...] = SEVERITY_LABELS,
    created_at: int = 0,
) -> LabelVote:
    """Vote from the external zero-shot classifier.

    The client (see sevlab.zeroshot) sends the text with the candidate
    labels and returns per-label scores; argmax wins, score ties break
    toward the more severe label.
    """
    scores = client.classify(doc.text, labelset)
    label, confidence = argmax_severe(scores)
    return LabelVote(
        doc_id=doc.id,
        source="zeroshot",
        label=label,
        confidence=confidence,
        created_at=created_at,
    )


def argmax_severe(scores: dict[str, float]) -> tuple[str, float]:
    """Highest-scoring label; exact ties resolve to the more severe one."""
    best = max(scores, key=lambda lbl: (scores[lbl], severity_rank(lbl)))
    return best, scores[best]


def record_expert_label(annotation: ExpertAnnotation, store) -> dict:
    """Persist an expert annotation; later submissions supersede earlier ones.

    The store (see sevlab.store) validates the document id, appends the
    record durably, and keeps full history for audit.
    """
    store.append(annotation)
    return {"status": "ok", "doc_id": annotation.doc_id, "label": annotation.label}


def fuse(
    kw: LabelVote,
    zs: LabelVote,
    ex: LabelVote,
    weights: tuple[float, float, float] | None = None,
) -> FusedLabel:
    """Fuse the three votes for one document.

    With default weights (1,1,1) this reproduces plain majority voting
    with expert fallback: unanimity wins, a two-way majority wins, and
    three distinct labels defer to the expert. With explicit weights the
    label is the argmax of summed weights per label; any argmax tie
    resolves to the expert's label.
    """
    votes = (kw, zs, ex)
    if {v.source for v in votes} != set(SOURCES) or kw.source != "keyword" or zs.source != "zeroshot" or ex.source != "expert":
        raise LabelingError("fuse needs exactly one vote per source (keyword, zeroshot, expert)")
    if not (kw.doc_id == zs.doc_id == ex.doc_id):
        raise LabelingError(
            f"votes are for different documents: {kw.doc_id!r}, {zs.doc_id!r}, {ex.doc_id!r}"
        )
    if weights is None:
        weights = (1.0, 1.0, 1.0)
    if len(weights) != 3 or any(w <= 0 for w in weights):
        raise LabelingError("weights must be three positive numbers")

    tally: dict[str, float] = {}
    for vote, weight in zip(votes, weights):
        tally[vote.label] = tally.get(vote.label, 0.0) + weight
    top = max(tally.values())
    winners = [label for label, score in tally.items() if score == top]

    if len(winners) > 1:
        label, agreement = ex.label, "expert_fallback"
    else:
        label = winners[0]
        agreement = "unanimous" if kw.label == zs.label == ex.label else "majority"
    return FusedLabel(doc_id=kw.doc_id, label=label, agreement=agreement, votes=votes)


def merge_rare(label: str, merge: MergeMap | None = None) -> str:
    """Map a fine-grained label to its coarse class."""
    merge = merge or default_merge_map()
    if label not in merge.mapping:
        raise LabelingError(f"unknown severity label {label!r}")
    return merge.mapping[label]
