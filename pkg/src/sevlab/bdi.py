"""Questionnaire-driven severity scoring.

A 21-item questionnaire (four options per item, scored 0..3) is turned
into a keyword lexicon: every non-stop-word token of an option statement
becomes a keyword carrying that option's score. Documents are scored by
exact whole-token matching, taking the maximum matched score per item
and summing across items, so totals stay on the 0..63 scale that the
severity bands assume.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .corpus import CleanDocument, StopList, normalize_token

__all__ = [
    "SEVERITY_LABELS",
    "COARSE_LABELS",
    "severity_rank",
    "canonical_order",
    "QuestionnaireItem",
    "LexiconEntry",
    "BdiLexicon",
    "BdiScore",
    "SeverityBands",
    "LexiconError",
    "load_questionnaire",
    "build_lexicon",
    "score_text",
    "map_score_to_band",
    "default_bands",
    "load_bands",
    "write_lexicon",
    "read_lexicon",
]

# Fine-grained labels in ascending severity; band order fixes the ranking.
SEVERITY_LABELS = ("Normal", "Mild", "Borderline", "Moderate", "Severe", "Extreme")
# Labels remaining after rare-class merging.
COARSE_LABELS = ("Normal", "Mild", "Moderate", "Severe")

ITEM_COUNT = 21
OPTIONS_PER_ITEM = 4
MAX_TOTAL = ITEM_COUNT * 3


class LexiconError(ValueError):
    """Raised for invalid questionnaires, lexicons, or band tables."""


def severity_rank(label: str) -> int:
    """Position of a label in the six-step severity ordering."""
    try:
        return SEVERITY_LABELS.index(label)
    except ValueError:
        raise LexiconError(f"unknown severity label {label!r}") from None


def canonical_order(labels) -> list[str]:
    """Stable class ordering: ascending severity for known labels, then
    any remaining labels sorted lexicographically."""
    labels = set(labels)
    known = [c for c in SEVERITY_LABELS if c in labels]
    return known + sorted(labels - set(SEVERITY_LABELS))


@dataclass(frozen=True)
class QuestionnaireItem:
    """One questionnaire item: four statements scored 0..3."""

    index: int
    options: tuple[tuple[str, int], ...]  # (statement, score)

    def __post_init__(self) -> None:
        if not 1 <= self.index <= ITEM_COUNT:
            raise LexiconError(f"item index {self.index} outside 1..{ITEM_COUNT}")
        if len(self.options) != OPTIONS_PER_ITEM:
            raise LexiconError(
                f"item {self.index}: expected {OPTIONS_PER_ITEM} options, got {len(self.options)}"
            )
        if sorted(score for _, score in self.options) != [0, 1, 2, 3]:
            raise LexiconError(f"item {self.index}: option scores must be exactly 0,1,2,3")
        if any(not statement.strip() for statement, _ in self.options):
            raise LexiconError(f"item {self.index}: empty option statement")


@dataclass(frozen=True)
class LexiconEntry:
    item_index: int
    keyword: str
    score: int


@dataclass(frozen=True)
class BdiLexicon:
    """Keyword lexicon derived from a questionnaire, fixed per language."""

    language: str
    entries: tuple[LexiconEntry, ...]

    def __post_init__(self) -> None:
        seen = set()
        for e in self.entries:
            key = (e.item_index, e.keyword)
            if key in seen:
                raise LexiconError(f"duplicate lexicon entry {key}")
            seen.add(key)
            if not 0 <= e.score <= 3:
                raise LexiconError(f"entry {key}: score {e.score} outside 0..3")

    def by_item(self) -> dict[int, dict[str, int]]:
        """item index -> {keyword: score}."""
        out: dict[int, dict[str, int]] = {}
        for e in self.entries:
            out.setdefault(e.item_index, {})[e.keyword] = e.score
        return out


@dataclass(frozen=True)
class BdiScore:
    total: int
    per_item: dict[int, int] = field(default_factory=dict)
    matched_keywords: tuple[tuple[str, int, int], ...] = ()  # (keyword, item, score)

    def __post_init__(self) -> None:
        if self.total != sum(self.per_item.values()):
            raise LexiconError("score total does not equal the sum of per-item scores")
        if not 0 <= self.total <= MAX_TOTAL:
            raise LexiconError(f"total {self.total} outside 0..{MAX_TOTAL}")


@dataclass(frozen=True)
class SeverityBands:
    """Ordered (inclusive upper bound, label) pairs partitioning 0..63."""

    bands: tuple[tuple[int, str], ...]

    def __post_init__(self) -> None:
        if not self.bands:
            raise LexiconError("empty band table")
        previous = -1
        for bound, label in self.bands:
            if label not in SEVERITY_LABELS:
                raise LexiconError(f"unknown band label {label!r}")
            if bound <= previous:
                raise LexiconError("band bounds must be strictly increasing")
            previous = bound
        if previous != MAX_TOTAL:
            raise LexiconError(f"last band bound must be {MAX_TOTAL}, got {previous}")


def load_questionnaire(path: str | Path | None = None) -> tuple[str, list[QuestionnaireItem]]:
    """Load a questionnaire file; defaults to the bundled English one.

    Returns (language, items). The file is JSON: {"language": ...,
    "items": [{"index": n, "options": [{"statement": ..., "score": n}]}]}.
    """
    if path is None:
        text = resources.files("sevlab.data").joinpath("questionnaire_en.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
        language = data["language"]
        items = [
            QuestionnaireItem(
                index=item["index"],
                options=tuple((opt["statement"], opt["score"]) for opt in item["options"]),
            )
            for item in data["items"]
        ]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise LexiconError(f"bad questionnaire file: {exc}") from exc
    return language, items


def build_lexicon(items: list[QuestionnaireItem], stops: StopList) -> BdiLexicon:
    """Extract a keyword lexicon from questionnaire items.

    Each option statement is normalized and tokenized; surviving tokens
    become entries carrying the option's score. A token appearing in
    several options of one item keeps the maximum score.
    """
    if not items:
        raise LexiconError("empty questionnaire")
    if len(items) != ITEM_COUNT:
        raise LexiconError(f"expected {ITEM_COUNT} items, got {len(items)}")
    indexes = sorted(item.index for item in items)
    if indexes != list(range(1, ITEM_COUNT + 1)):
        raise LexiconError("item indexes must cover 1..21 exactly once")

    entries: list[LexiconEntry] = []
    for item in sorted(items, key=lambda i: i.index):
        keywords: dict[str, int] = {}
        for statement, score in item.options:
            tokens = [t for t in normalize_token(statement).split() if t not in stops]
            if not tokens:
                warnings.warn(
                    f"item {item.index}: option scored {score} has only stop words",
                    stacklevel=2,
                )
                continue
            for token in tokens:
                keywords[token] = max(keywords.get(token, -1), score)
        for keyword in sorted(keywords):
            entries.append(LexiconEntry(item.index, keyword, keywords[keyword]))
    return BdiLexicon(language=stops.language, entries=tuple(entries))


def score_text(doc: CleanDocument, lexicon: BdiLexicon) -> BdiScore:
    """Score a clean document by keyword matching.

    Per item the maximum score among matched keywords counts; repeated
    occurrences of one keyword count once (matching is on the token set).
    """
    if doc.language != lexicon.language:
        raise LexiconError(
            f"document language {doc.language!r} does not match lexicon {lexicon.language!r}"
        )
    token_set = set(doc.tokens)
    per_item: dict[int, int] = {}
    matched: list[tuple[str, int, int]] = []
    for item_index, keywords in sorted(lexicon.by_item().items()):
        best = -1
        for keyword in sorted(keywords):
            if keyword in token_set:
                score = keywords[keyword]
                matched.append((keyword, item_index, score))
                best = max(best, score)
        if best >= 0:
            per_item[item_index] = best
    return BdiScore(
        total=sum(per_item.values()), per_item=per_item, matched_keywords=tuple(matched)
    )


def map_score_to_band(score: int, bands: SeverityBands) -> str:
    """Return the label of the unique band containing the score."""
    if not 0 <= score <= MAX_TOTAL:
        raise LexiconError(f"score {score} outside 0..{MAX_TOTAL}")
    for bound, label in bands.bands:
        if score <= bound:
            return label
    raise LexiconError(f"no band contains score {score}")  # unreachable for valid bands


def default_bands() -> SeverityBands:
    """The bundled six-band table over 0..63."""
    return _parse_bands(
        resources.files("sevlab.data").joinpath("bands_default.tsv").read_text("utf-8")
    )


def load_bands(path: str | Path) -> SeverityBands:
    """Load a band table file: one 'upper_bound<TAB>label' pair per line."""
    return _parse_bands(Path(path).read_text(encoding="utf-8"))


def _parse_bands(text: str) -> SeverityBands:
    pairs = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            bound_str, label = line.split("\t")
            pairs.append((int(bound_str), label.strip()))
        except ValueError as exc:
            raise LexiconError(f"bad band line {line!r}") from exc
    return SeverityBands(bands=tuple(pairs))


def write_lexicon(lexicon: BdiLexicon, path: str | Path) -> None:
    """Export entries as tab-separated item_index, keyword, score."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# language: {lexicon.language}\n")
        for e in lexicon.entries:
            fh.write(f"{e.item_index}\t{e.keyword}\t{e.score}\n")


def read_lexicon(path: str | Path) -> BdiLexicon:
    """Read a lexicon exported by write_lexicon."""
    language = "en"
    entries = []
    for line in Path(path).read_text("utf-8").splitlines():
        if line.startswith("# language:"):
            language = line.split(":", 1)[1].strip()
            continue
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        item_str, keyword, score_str = line.split("\t")
        entries.append(LexiconEntry(int(item_str), keyword, int(score_str)))
    return BdiLexicon(language=language, entries=tuple(entries))
