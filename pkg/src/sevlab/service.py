"""HTTP service hosting the expert-annotation workflow.

Serves the task queue, accepts annotations (durably, via the append-only
store), runs fusion on demand, exports labels, and proxies the zero-shot
service with a response cache. Blind mode (default on) hides machine
votes from task payloads so the expert is not anchored by them.
"""

from __future__ import annotations

import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import HTMLResponse, PlainTextResponse
from pydantic import BaseModel

from . import labeling
from .bdi import SEVERITY_LABELS
from .corpus import CleanDocument, read_documents
from .labeling import ExpertAnnotation, LabelVote
from .pipeline import PipelineConfig, zeroshot_client
from .store import AnnotationStore, UnknownDocumentError
from .zeroshot import ZeroShotError

__all__ = ["create_app", "ServiceState"]


class AnnotationIn(BaseModel):
    doc_id: str
    annotator_id: str
    label: str
    submitted_at: int | None = None
    blind_mode: bool | None = None


class ServiceState:
    """Everything the endpoints share: documents, votes, store, client."""

    def __init__(self, config: PipelineConfig, docs: list[CleanDocument]):
        self.config = config
        self.docs = {doc.id: doc for doc in docs}
        self.order = [doc.id for doc in docs]
        store_dir = config.store or (Path(config.out) / "store")
        self.store = AnnotationStore(store_dir, known_docs=set(self.docs))
        self.blind_mode = config.blind_mode
        self.client = zeroshot_client(config)
        languages = sorted({doc.language for doc in docs})
        from .pipeline import _lexicons  # reuse the stage loader

        self.lexicons, self.bands = _lexicons(config, languages)
        self.fused: dict[str, labeling.FusedLabel] = {}
        self._last_auto_ts = 0

    def next_submitted_at(self) -> int:
        """Monotonic fallback timestamp so rapid relabels never collide
        on the idempotency identity."""
        self._last_auto_ts = max(int(time.time() * 1000), self._last_auto_ts + 1)
        return self._last_auto_ts

    def keyword_vote(self, doc: CleanDocument) -> LabelVote:
        return labeling.keyword_label(doc, self.lexicons[doc.language], self.bands)

    def zeroshot_vote(self, doc: CleanDocument) -> LabelVote:
        return labeling.zeroshot_label(doc, self.client, created_at=int(time.time()))

    def status(self, doc_id: str) -> str:
        if doc_id in self.fused:
            return "fused"
        if self.store.get(doc_id) is not None:
            return "labeled"
        return "unlabeled"

    def task(self, doc_id: str, blind: bool) -> dict:
        doc = self.docs[doc_id]
        payload = {
            "doc_id": doc_id,
            "text": doc.text,
            "language": doc.language,
            "status": self.status(doc_id),
        }
        annotation = self.store.get(doc_id)
        if annotation is not None:
            payload["expert_label"] = annotation.label
        if not blind:
            votes = {"keyword": self.keyword_vote(doc).label}
            try:
                votes["zeroshot"] = self.zeroshot_vote(doc).label
            except ZeroShotError:
                votes["zeroshot"] = None
            payload["machine_votes"] = votes
        return payload


def create_app(config: PipelineConfig, docs: list[CleanDocument] | None = None) -> FastAPI:
    """Build the service; docs default to the corpus named by the config."""
    if docs is None:
        docs = _load_docs(config)
    state = ServiceState(config, docs)
    app = FastAPI(title="sevlab annotation service")
    app.state.sevlab = state

    @app.get("/tasks")
    def list_tasks(
        status: str | None = Query(default=None),
        limit: int = Query(default=50, ge=1, le=1000),
        blind: bool | None = Query(default=None),
    ):
        use_blind = state.blind_mode if blind is None else blind
        tasks = []
        for doc_id in state.order:
            if status is not None and state.status(doc_id) != status:
                continue
            tasks.append(state.task(doc_id, use_blind))
            if len(tasks) >= limit:
                break
        return tasks

    @app.get("/tasks/{doc_id}")
    def get_task(doc_id: str, blind: bool | None = Query(default=None)):
        if doc_id not in state.docs:
            raise HTTPException(status_code=404, detail=f"unknown document {doc_id!r}")
        use_blind = state.blind_mode if blind is None else blind
        return state.task(doc_id, use_blind)

    @app.post("/annotations")
    def post_annotation(body: AnnotationIn):
        if body.label not in SEVERITY_LABELS:
            raise HTTPException(
                status_code=422,
                detail={
                    "error": f"unknown label {body.label!r}",
                    "allowed": list(SEVERITY_LABELS),
                },
            )
        submitted_at = body.submitted_at
        if submitted_at is None:
            submitted_at = state.next_submitted_at()
        annotation = ExpertAnnotation(
            doc_id=body.doc_id,
            annotator_id=body.annotator_id,
            label=body.label,
            submitted_at=submitted_at,
        )
        try:
            outcome = state.store.append(annotation, blind_mode=body.blind_mode)
        except UnknownDocumentError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return {"status": outcome, "doc_id": body.doc_id}

    @app.get("/progress")
    def progress():
        labeled = sum(1 for doc_id in state.order if state.store.get(doc_id) is not None)
        fused = len(state.fused)
        total = len(state.order)
        return {
            "total": total,
            "labeled": labeled,
            "fused": fused,
            "pending": total - labeled,
        }

    @app.post("/fuse")
    def run_fusion():
        counts: dict[str, int] = {}
        for doc_id in state.order:
            annotation = state.store.get(doc_id)
            if annotation is None:
                continue
            doc = state.docs[doc_id]
            try:
                zs = state.zeroshot_vote(doc)
            except ZeroShotError as exc:
                raise HTTPException(status_code=502, detail=str(exc)) from exc
            expert_vote = LabelVote(
                doc_id=doc_id,
                source="expert",
                label=annotation.label,
                created_at=annotation.submitted_at,
            )
            fused = labeling.fuse(
                state.keyword_vote(doc), zs, expert_vote, weights=state.config.fusion_weights
            )
            state.fused[doc_id] = fused
            counts[fused.agreement] = counts.get(fused.agreement, 0) + 1
        return {"fused": len(state.fused), "by_agreement": dict(sorted(counts.items()))}

    @app.get("/export/labels")
    def export_labels():
        return PlainTextResponse(state.store.export_csv(), media_type="text/csv")

    @app.post("/zeroshot")
    def zeroshot_proxy(body: dict):
        text = body.get("text")
        if not isinstance(text, str) or not text:
            raise HTTPException(status_code=422, detail="body must carry a non-empty 'text'")
        labels = tuple(body.get("candidate_labels") or SEVERITY_LABELS)
        try:
            scores = state.client.classify(text, labels)
        except ZeroShotError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        ordered = list(labels)
        return {"labels": ordered, "scores": [scores[lbl] for lbl in ordered]}

    @app.get("/bands")
    def bands():
        return {
            "bands": [
                {"upper_bound": bound, "label": label} for bound, label in state.bands.bands
            ]
        }

    @app.get("/", response_class=HTMLResponse)
    def index():
        ui = Path(__file__).parent / "data" / "annotator.html"
        if ui.exists():
            return HTMLResponse(ui.read_text("utf-8"))
        return HTMLResponse("<h1>sevlab annotation service</h1>")

    return app


def _load_docs(config: PipelineConfig) -> list[CleanDocument]:
    """Load clean documents: a preprocessed file if given, else the corpus."""
    corpus_path = Path(config.corpus)
    text = corpus_path.read_text("utf-8").lstrip()
    if text.startswith("{") and '"token_count"' in text.split("\n", 1)[0]:
        return read_documents(corpus_path)
    from .pipeline import _ingest, _preprocess

    return _preprocess(config, _ingest(config))
