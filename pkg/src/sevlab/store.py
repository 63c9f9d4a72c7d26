"""Durable expert-annotation storage.

A single append-only JSONL log holds every submission ever made (full
history for audit); a periodic snapshot records the effective state and
the log byte offset it covers, so startup replays only the tail. Every
append is flushed and fsynced before it is acknowledged: an acknowledged
annotation survives a hard kill. A corrupt log line makes the store
refuse to load, reporting the byte offset.
"""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

from .bdi import SEVERITY_LABELS
from .labeling import ExpertAnnotation

__all__ = ["AnnotationStore", "StoreError", "StoreCorruptionError", "UnknownDocumentError"]

LOG_NAME = "annotations.log"
SNAPSHOT_NAME = "annotations.snapshot"


class StoreError(RuntimeError):
    pass


class UnknownDocumentError(StoreError):
    """Annotation references a document that is not in the corpus."""


class StoreCorruptionError(StoreError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


_FIELDS = ("doc_id", "annotator_id", "label", "submitted_at")


class AnnotationStore:
    """Append-only annotation log with last-write-wins effective state."""

    def __init__(
        self,
        directory: str | Path,
        known_docs: set[str] | None = None,
        snapshot_every: int = 100,
    ):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.log_path = self.directory / LOG_NAME
        self.snapshot_path = self.directory / SNAPSHOT_NAME
        self.known_docs = known_docs
        self.snapshot_every = snapshot_every
        self.history: list[dict] = []
        self._effective: dict[str, ExpertAnnotation] = {}
        self._identities: set[tuple[str, str, int]] = set()
        self._appends_since_snapshot = 0
        self._load()
        self._log_file = open(self.log_path, "ab")

    # -- loading ---------------------------------------------------------

    def _load(self) -> None:
        offset = 0
        if self.snapshot_path.exists():
            try:
                snapshot = json.loads(self.snapshot_path.read_text("utf-8"))
                offset = int(snapshot["offset"])
                for record in snapshot["history"]:
                    self._apply(record)
            except (ValueError, KeyError) as exc:
                raise StoreCorruptionError(f"unreadable snapshot: {exc}", 0) from exc
        if not self.log_path.exists():
            self.log_path.touch()
            return
        raw = self.log_path.read_bytes()
        if offset > len(raw):
            raise StoreCorruptionError(
                f"snapshot offset {offset} beyond log size {len(raw)}", offset
            )
        position = offset
        for line in raw[offset:].split(b"\n"):
            if not line:
                position += 1
                continue
            try:
                record = json.loads(line.decode("utf-8"))
                if not all(f in record for f in _FIELDS):
                    raise ValueError("missing fields")
                self._apply(record)
            except (ValueError, UnicodeDecodeError) as exc:
                raise StoreCorruptionError(f"corrupt log record: {exc}", position) from exc
            position += len(line) + 1

    def _apply(self, record: dict) -> None:
        annotation = ExpertAnnotation(
            doc_id=record["doc_id"],
            annotator_id=record["annotator_id"],
            label=record["label"],
            submitted_at=int(record["submitted_at"]),
        )
        self.history.append(record)
        self._effective[annotation.doc_id] = annotation
        self._identities.add(
            (annotation.doc_id, annotation.annotator_id, annotation.submitted_at)
        )

    # -- writing ---------------------------------------------------------

    def append(self, annotation: ExpertAnnotation, blind_mode: bool | None = None) -> str:
        """Durably record one annotation. Returns "ok" or "duplicate".

        Replays of an identical (doc_id, annotator_id, submitted_at)
        identity are acknowledged without being re-applied, which makes
        client retries idempotent.
        """
        if annotation.label not in SEVERITY_LABELS:
            raise StoreError(f"unknown label {annotation.label!r}")
        if self.known_docs is not None and annotation.doc_id not in self.known_docs:
            raise UnknownDocumentError(f"unknown document {annotation.doc_id!r}")
        identity = (annotation.doc_id, annotation.annotator_id, annotation.submitted_at)
        if identity in self._identities:
            return "duplicate"
        record = {
            "doc_id": annotation.doc_id,
            "annotator_id": annotation.annotator_id,
            "label": annotation.label,
            "submitted_at": annotation.submitted_at,
        }
        if blind_mode is not None:
            record["blind_mode"] = blind_mode
        payload = (json.dumps(record, sort_keys=True) + "\n").encode("utf-8")
        self._log_file.write(payload)
        self._log_file.flush()
        os.fsync(self._log_file.fileno())
        self._apply(record)
        self._appends_since_snapshot += 1
        if self._appends_since_snapshot >= self.snapshot_every:
            self.write_snapshot()
        return "ok"

    def write_snapshot(self) -> None:
        """Atomically persist effective history plus the covered offset."""
        self._log_file.flush()
        offset = self.log_path.stat().st_size
        tmp = self.snapshot_path.with_suffix(".tmp")
        tmp.write_text(
            json.dumps({"offset": offset, "history": self.history}, sort_keys=True),
            encoding="utf-8",
        )
        tmp.replace(self.snapshot_path)
        self._appends_since_snapshot = 0

    def close(self) -> None:
        self._log_file.close()

    # -- reading ---------------------------------------------------------

    def effective(self) -> dict[str, ExpertAnnotation]:
        return dict(self._effective)

    def get(self, doc_id: str) -> ExpertAnnotation | None:
        return self._effective.get(doc_id)

    def __len__(self) -> int:
        return len(self._effective)

    # -- import/export ---------------------------------------------------

    def export_csv(self) -> str:
        """Effective annotations as doc_id, annotator_id, label, submitted_at."""
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(_FIELDS)
        for doc_id in sorted(self._effective):
            a = self._effective[doc_id]
            writer.writerow([a.doc_id, a.annotator_id, a.label, a.submitted_at])
        return buffer.getvalue()

    def import_csv(self, path: str | Path) -> int:
        """Append annotations from a CSV file (header optional)."""
        count = 0
        for annotation in read_annotation_csv(path):
            if self.append(annotation) == "ok":
                count += 1
        return count


def read_annotation_csv(path: str | Path) -> list[ExpertAnnotation]:
    """Parse a doc_id, annotator_id, label, submitted_at CSV file."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            if row[0] == "doc_id":  # header
                continue
            if len(row) != len(_FIELDS):
                raise StoreError(f"{path}: expected {len(_FIELDS)} columns, got {len(row)}")
            rows.append(
                ExpertAnnotation(
                    doc_id=row[0],
                    annotator_id=row[1],
                    label=row[2],
                    submitted_at=int(row[3]),
                )
            )
    return rows
