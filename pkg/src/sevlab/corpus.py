"""Corpus ingestion and text normalization.

Raw posts arrive as line-delimited JSON records and are normalized into
clean documents: lowercased, URLs stripped, punctuation removed, stop
words dropped. Cleaning is pure and deterministic, so documents can be
processed in any order or in parallel.
"""

from __future__ import annotations

import json
import re
import unicodedata
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

__all__ = [
    "RawPost",
    "CleanDocument",
    "StopList",
    "CorpusError",
    "ingest_corpus",
    "preprocess",
    "load_stoplist",
    "normalize_token",
    "write_documents",
    "read_documents",
]


class CorpusError(ValueError):
    """Raised for unreadable, malformed, or inconsistent corpus files."""


@dataclass(frozen=True)
class RawPost:
    """One unprocessed post as it came off the source platform."""

    id: str
    source: str
    body: str
    language: str = "en"
    title: str | None = None
    created_at: int | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("post id must be non-empty")
        if not self.body:
            raise CorpusError(f"post {self.id!r}: body must be non-empty")


@dataclass(frozen=True)
class CleanDocument:
    """A normalized post: lowercase tokens joined by single spaces."""

    id: str
    language: str
    text: str
    token_count: int

    @property
    def tokens(self) -> list[str]:
        return self.text.split() if self.text else []


@dataclass(frozen=True)
class StopList:
    """Set of tokens to drop during cleaning, tied to one language."""

    language: str
    words: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        for w in self.words:
            if w != w.lower():
                raise CorpusError(f"stop list entry {w!r} is not lowercase")

    def __contains__(self, token: str) -> bool:
        return token in self.words

    def __len__(self) -> int:
        return len(self.words)


_URL_RE = re.compile(r"(?:\S+://\S+|www\.\S+)", re.IGNORECASE)
_APOSTROPHES = "'’ʼ"


def normalize_token(token: str) -> str:
    """Apply the same normal form cleaning applies to corpus tokens."""
    token = token.lower()
    for ch in _APOSTROPHES:
        token = token.replace(ch, "")
    return "".join(" " if _is_separator(ch) else ch for ch in token).strip()


def _is_separator(ch: str) -> bool:
    # Everything that is not a letter, digit, or whitespace becomes a
    # token boundary. Covers all Unicode punctuation and symbol classes.
    if ch.isspace():
        return False
    cat = unicodedata.category(ch)
    return not (cat.startswith("L") or cat.startswith("N"))


def preprocess(post: RawPost, stops: StopList) -> CleanDocument:
    """Normalize one post into a CleanDocument.

    Order: concatenate title and body, strip URLs, lowercase, drop
    apostrophes inside words, replace remaining punctuation with spaces,
    tokenize, remove stop words, rejoin with single spaces. A post that
    cleans down to nothing is kept (with a warning) so corpus counts
    stay auditable.
    """
    if stops.language != post.language:
        raise CorpusError(
            f"stop list language {stops.language!r} does not match post language {post.language!r}"
        )
    text = f"{post.title} {post.body}" if post.title else post.body
    text = _URL_RE.sub(" ", text)
    text = text.lower()
    for ch in _APOSTROPHES:
        text = text.replace(ch, "")
    text = "".join(" " if _is_separator(ch) else ch for ch in text)
    tokens = [t for t in text.split() if t not in stops]
    if not tokens:
        warnings.warn(f"document {post.id!r} is empty after cleaning", stacklevel=2)
    return CleanDocument(
        id=post.id, language=post.language, text=" ".join(tokens), token_count=len(tokens)
    )


_REQUIRED_FIELDS = ("id", "source", "body", "language")


def ingest_corpus(path: str | Path) -> list[RawPost]:
    """Read a line-delimited corpus file into RawPosts, preserving order.

    Every line must be a JSON object with id, source, body, and language
    (title and created_at optional). Duplicate ids reject the whole file.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc

    posts: list[RawPost] = []
    seen: dict[str, int] = {}
    duplicates: list[str] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(record, dict):
            raise CorpusError(f"{path}:{lineno}: record is not an object")
        missing = [f for f in _REQUIRED_FIELDS if not record.get(f)]
        if missing:
            raise CorpusError(f"{path}:{lineno}: missing field(s) {', '.join(missing)}")
        title = record.get("title")
        try:
            post = RawPost(
                id=str(record["id"]),
                source=str(record["source"]),
                body=str(record["body"]),
                language=str(record["language"]),
                title=str(title) if title is not None else None,
                created_at=record.get("created_at"),
            )
        except CorpusError as exc:
            raise CorpusError(f"{path}:{lineno}: {exc}") from exc
        if post.id in seen:
            if post.id not in duplicates:
                duplicates.append(post.id)
        else:
            seen[post.id] = lineno
        posts.append(post)
    if duplicates:
        raise CorpusError(f"{path}: duplicate post id(s): {', '.join(duplicates)}")
    return posts


def load_stoplist(language: str, path: str | Path | None = None) -> StopList:
    """Load a stop list: the bundled English list, or a one-token-per-line file.

    File entries are normalized through the tokenizer's normal form so
    that matching against cleaned tokens is consistent.
    """
    if path is None:
        if language == "en":
            text = (
                resources.files("sevlab.data").joinpath("stopwords_en.txt").read_text("utf-8")
            )
        else:
            raise CorpusError(f"no built-in stop list for {language!r}; supply a file")
    else:
        text = Path(path).read_text(encoding="utf-8")
    words: set[str] = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for token in normalize_token(line).split():
            words.add(token)
    return StopList(language=language, words=frozenset(words))


def write_documents(docs: list[CleanDocument], path: str | Path) -> None:
    """Write clean documents as line-delimited JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(
                json.dumps(
                    {
                        "id": doc.id,
                        "language": doc.language,
                        "text": doc.text,
                        "token_count": doc.token_count,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_documents(path: str | Path) -> list[CleanDocument]:
    """Read clean documents written by write_documents."""
    docs = []
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            docs.append(
                CleanDocument(
                    id=rec["id"],
                    language=rec["language"],
                    text=rec["text"],
                    token_count=rec["token_count"],
                )
            )
        except (json.JSONDecodeError, KeyError) as exc:
            raise CorpusError(f"{path}:{lineno}: bad document record: {exc}") from exc
    return docs
