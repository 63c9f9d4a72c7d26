"""End-to-end pipeline: ingest through trained models and reports.

All randomness flows from the single config seed through named derived
streams, and no wall-clock values enter machine outputs, so a rerun with
the same config and seed writes byte-identical machine reports. Any
stage failure aborts with the stage name and a machine-readable cause.
"""

from __future__ import annotations

import hashlib
import json
import os
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from . import bdi, evaluation, figures, labeling, models
from .corpus import CleanDocument, RawPost, StopList, ingest_corpus, load_stoplist, preprocess
from .dataset import DatasetSplits, LabeledVector, SplitSpec, export_dataset, shuffle_split, smote_oversample
from .features import SparseVector, fit_tfidf, save_tfidf, transform
from .labeling import FusedLabel, LabelVote
from .store import read_annotation_csv
from .zeroshot import ENDPOINT_ENV, TOKEN_ENV, ZeroShotClient

__all__ = [
    "PipelineConfig",
    "PipelineStageError",
    "PendingAnnotations",
    "run_pipeline",
    "load_config",
    "write_votes",
    "read_votes",
    "write_vectors",
    "read_vectors",
]

DEFAULT_MODEL_KINDS = ("naive_bayes", "random_forest", "linear_svm", "gradient_boosting")


class PipelineStageError(RuntimeError):
    """A stage failed; carries the stage name and the underlying cause."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause

    def as_json(self) -> str:
        return json.dumps(
            {"stage": self.stage, "error": type(self.cause).__name__, "detail": str(self.cause)}
        )


class PendingAnnotations(RuntimeError):
    """Expert labels are missing; the run stops before fusion."""

    def __init__(self, doc_ids: list[str]):
        super().__init__(f"pending: {len(doc_ids)}")
        self.doc_ids = doc_ids
        self.count = len(doc_ids)


@dataclass
class PipelineConfig:
    """Everything a run needs; paths are resolved against the config file."""

    seed: int
    corpus: Path
    expert_labels: Path | None = None
    questionnaire: dict[str, Path | None] = field(default_factory=lambda: {"en": None})
    stopwords: dict[str, Path | None] = field(default_factory=lambda: {"en": None})
    bands: Path | None = None
    zeroshot_endpoint: str = "stub://default"
    zeroshot_cache: Path | None = None
    fusion_weights: tuple[float, float, float] | None = None
    merge: dict[str, str] | None = None
    split: dict[str, dict[str, tuple[int, int]]] = field(default_factory=dict)
    smote_k: int = 5
    model_specs: list[dict] = field(
        default_factory=lambda: [{"kind": kind, "hyperparameters": {}} for kind in DEFAULT_MODEL_KINDS]
    )
    out: Path = Path("out")
    blind_mode: bool = True
    store: Path | None = None
    port: int = 8766

    def config_hash(self) -> str:
        """Hash of every result-affecting field (output location excluded)."""
        payload = {
            "seed": self.seed,
            "corpus": str(self.corpus),
            "expert_labels": str(self.expert_labels) if self.expert_labels else None,
            "questionnaire": {k: str(v) if v else None for k, v in sorted(self.questionnaire.items())},
            "stopwords": {k: str(v) if v else None for k, v in sorted(self.stopwords.items())},
            "bands": str(self.bands) if self.bands else None,
            "zeroshot_endpoint": self.zeroshot_endpoint,
            "fusion_weights": list(self.fusion_weights) if self.fusion_weights else None,
            "merge": self.merge,
            "split": {
                lang: {cls: list(vt) for cls, vt in sorted(spec.items())}
                for lang, spec in sorted(self.split.items())
            },
            "smote_k": self.smote_k,
            "models": self.model_specs,
            "blind_mode": self.blind_mode,
        }
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_config(path: str | Path, seed: int | None = None, out: str | Path | None = None) -> PipelineConfig:
    """Read a JSON config file; optional seed/out overrides win."""
    path = Path(path)
    base = path.parent
    raw = json.loads(path.read_text("utf-8"))

    def resolve(value):
        return (base / value).resolve() if value else None

    config = PipelineConfig(
        seed=int(raw["seed"]) if seed is None else int(seed),
        corpus=resolve(raw["corpus"]),
        expert_labels=resolve(raw.get("expert_labels")),
        questionnaire={k: resolve(v) for k, v in raw.get("questionnaire", {"en": None}).items()},
        stopwords={k: resolve(v) for k, v in raw.get("stopwords", {"en": None}).items()},
        bands=resolve(raw.get("bands")),
        zeroshot_endpoint=raw.get("zeroshot", {}).get("endpoint")
        or os.environ.get(ENDPOINT_ENV, "stub://default"),
        zeroshot_cache=resolve(raw.get("zeroshot", {}).get("cache")),
        fusion_weights=tuple(raw["fusion_weights"]) if raw.get("fusion_weights") else None,
        merge=raw.get("merge"),
        split={
            lang: {cls: (int(vt[0]), int(vt[1])) for cls, vt in spec.items()}
            for lang, spec in raw.get("split", {}).items()
        },
        smote_k=int(raw.get("smote_k", 5)),
        model_specs=raw.get("models")
        or [{"kind": kind, "hyperparameters": {}} for kind in DEFAULT_MODEL_KINDS],
        out=Path(out) if out is not None else (base / raw.get("out", "out")),
        blind_mode=bool(raw.get("blind_mode", True)),
        store=resolve(raw.get("store")),
        port=int(raw.get("port", 8766)),
    )
    for p, what in ((config.corpus, "corpus"), (config.expert_labels, "expert_labels")):
        if p is not None and not Path(p).exists():
            raise FileNotFoundError(f"config {what} path does not exist: {p}")
    return config


def derived_seed(seed: int, *names: str) -> int:
    """Stable per-stage seed: master seed mixed with named stream labels."""
    mix = seed & (2**64 - 1)
    for name in names:
        mix = (mix * 1000003 + zlib.crc32(name.encode("utf-8"))) & (2**64 - 1)
    return mix


# -- shared file formats --------------------------------------------------


def write_votes(votes: list[LabelVote], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for vote in votes:
            fh.write(
                json.dumps(
                    {
                        "doc_id": vote.doc_id,
                        "source": vote.source,
                        "label": vote.label,
                        "confidence": vote.confidence,
                        "created_at": vote.created_at,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_votes(path: str | Path) -> list[LabelVote]:
    votes = []
    for line in Path(path).read_text("utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        votes.append(
            LabelVote(
                doc_id=rec["doc_id"],
                source=rec["source"],
                label=rec["label"],
                confidence=rec.get("confidence"),
                created_at=rec.get("created_at", 0),
            )
        )
    return votes


def write_vectors(vectors: list[LabeledVector], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for lv in vectors:
            fh.write(
                json.dumps(
                    {
                        "doc_id": lv.doc_id,
                        "label": lv.label,
                        "synthetic": lv.synthetic,
                        "indices": [i for i, _ in lv.vector.entries],
                        "weights": [w for _, w in lv.vector.entries],
                    }
                )
                + "\n"
            )


def read_vectors(path: str | Path) -> list[LabeledVector]:
    out = []
    for line in Path(path).read_text("utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        out.append(
            LabeledVector(
                vector=SparseVector(tuple(zip(rec["indices"], rec["weights"]))),
                label=rec["label"],
                doc_id=rec["doc_id"],
                synthetic=rec["synthetic"],
            )
        )
    return out


# -- pipeline stages -------------------------------------------------------


def _stage(name: str):
    """Decorator: wrap stage failures with the stage name."""

    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except (PendingAnnotations, PipelineStageError):
                raise
            except Exception as exc:
                raise PipelineStageError(name, exc) from exc

        return inner

    return wrap


@_stage("ingest")
def _ingest(config: PipelineConfig) -> list[RawPost]:
    return ingest_corpus(config.corpus)


@_stage("preprocess")
def _preprocess(config: PipelineConfig, posts: list[RawPost]) -> list[CleanDocument]:
    stoplists: dict[str, StopList] = {}
    docs = []
    for post in posts:
        if post.language not in stoplists:
            path = config.stopwords.get(post.language)
            if post.language not in config.stopwords:
                raise ValueError(f"no stop list configured for language {post.language!r}")
            stoplists[post.language] = load_stoplist(post.language, path)
        docs.append(preprocess(post, stoplists[post.language]))
    return docs


@_stage("lexicon")
def _lexicons(config: PipelineConfig, languages: list[str]):
    stoplists = {
        lang: load_stoplist(lang, config.stopwords.get(lang)) for lang in languages
    }
    lexicons = {}
    for lang in languages:
        if lang not in config.questionnaire:
            raise ValueError(f"no questionnaire configured for language {lang!r}")
        _, items = bdi.load_questionnaire(config.questionnaire.get(lang))
        lexicons[lang] = bdi.build_lexicon(items, stoplists[lang])
    bands = bdi.load_bands(config.bands) if config.bands else bdi.default_bands()
    return lexicons, bands


def zeroshot_client(config: PipelineConfig) -> ZeroShotClient:
    """Client for the configured endpoint; the bearer token comes from env."""
    return ZeroShotClient(
        endpoint=config.zeroshot_endpoint,
        token=os.environ.get(TOKEN_ENV),
        cache_path=config.zeroshot_cache,
    )


@_stage("votes")
def _votes(config: PipelineConfig, docs, lexicons, bands):
    client = zeroshot_client(config)
    expert_by_doc = {}
    if config.expert_labels:
        for annotation in read_annotation_csv(config.expert_labels):
            expert_by_doc[annotation.doc_id] = annotation

    keyword_votes: dict[str, LabelVote] = {}
    zeroshot_votes: dict[str, LabelVote] = {}
    expert_votes: dict[str, LabelVote] = {}
    missing = []
    for doc in docs:
        keyword_votes[doc.id] = labeling.keyword_label(doc, lexicons[doc.language], bands)
        zeroshot_votes[doc.id] = labeling.zeroshot_label(doc, client)
        annotation = expert_by_doc.get(doc.id)
        if annotation is None:
            missing.append(doc.id)
        else:
            expert_votes[doc.id] = LabelVote(
                doc_id=doc.id,
                source="expert",
                label=annotation.label,
                created_at=annotation.submitted_at,
            )
    if missing:
        raise PendingAnnotations(missing)
    return keyword_votes, zeroshot_votes, expert_votes


@_stage("fuse")
def _fuse(config: PipelineConfig, docs, keyword_votes, zeroshot_votes, expert_votes):
    merge = labeling.MergeMap(dict(config.merge)) if config.merge else labeling.default_merge_map()
    fused: dict[str, FusedLabel] = {}
    coarse: dict[str, str] = {}
    for doc in docs:
        f = labeling.fuse(
            keyword_votes[doc.id],
            zeroshot_votes[doc.id],
            expert_votes[doc.id],
            weights=config.fusion_weights,
        )
        fused[doc.id] = f
        coarse[doc.id] = labeling.merge_rare(f.label, merge)
    return fused, coarse


@_stage("split")
def _split(config: PipelineConfig, lang: str, population) -> DatasetSplits:
    if lang not in config.split:
        raise ValueError(f"no split spec configured for language {lang!r}")
    spec = SplitSpec(counts=config.split[lang], seed=derived_seed(config.seed, "split", lang))
    return shuffle_split(population, spec, language=lang)


@_stage("vectorize")
def _vectorize(docs_by_id, splits: DatasetSplits):
    train_docs = [docs_by_id[doc_id] for doc_id, _ in splits.train]
    model = fit_tfidf(train_docs)

    def vectors(rows):
        return [
            LabeledVector(vector=transform(model, docs_by_id[doc_id]), label=label, doc_id=doc_id)
            for doc_id, label in rows
        ]

    return model, vectors(splits.train), vectors(splits.validation), vectors(splits.test)


@_stage("smote")
def _smote(config: PipelineConfig, lang: str, train_vectors):
    return smote_oversample(
        train_vectors, k=config.smote_k, seed=derived_seed(config.seed, "smote", lang)
    )


@_stage("train")
def _train(config: PipelineConfig, balanced):
    X = [lv.vector for lv in balanced]
    y = [lv.label for lv in balanced]
    trained = {}
    for spec_dict in config.model_specs:
        spec = models.ModelSpec(
            kind=spec_dict["kind"],
            hyperparameters=spec_dict.get("hyperparameters", {}),
            seed=config.seed,
        )
        trained[spec.kind] = models.train(X, y, spec)
    return trained


@_stage("evaluate")
def _evaluate(lang: str, trained, eval_vectors, split_name: str):
    classes = None
    reports = []
    matrices = {}
    for kind, model in trained.items():
        if classes is None:
            classes = model.classes
        y_true = [lv.label for lv in eval_vectors]
        y_pred = model.predict_batch([lv.vector for lv in eval_vectors])
        cm = evaluation.confusion(y_true, y_pred, model.classes)
        matrices[kind] = cm
        reports.append(evaluation.metrics(cm, model=kind, language=lang))
    return reports, matrices


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute every stage and write reports, figures, and the manifest."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    posts = _ingest(config)
    docs = _preprocess(config, posts)
    docs_by_id = {doc.id: doc for doc in docs}
    languages = sorted({doc.language for doc in docs})
    lexicons, bands = _lexicons(config, languages)
    keyword_votes, zeroshot_votes, expert_votes = _votes(config, docs, lexicons, bands)
    fused, coarse = _fuse(config, docs, keyword_votes, zeroshot_votes, expert_votes)

    with open(out / "fused.jsonl", "w", encoding="utf-8") as fh:
        for doc in docs:
            f = fused[doc.id]
            fh.write(
                json.dumps(
                    {
                        "doc_id": doc.id,
                        "language": doc.language,
                        "label": f.label,
                        "coarse_label": coarse[doc.id],
                        "agreement": f.agreement,
                        "votes": {v.source: v.label for v in f.votes},
                    },
                    sort_keys=True,
                )
                + "\n"
            )

    agreement_counts: dict[str, int] = {}
    for f in fused.values():
        agreement_counts[f.agreement] = agreement_counts.get(f.agreement, 0) + 1

    manifest: dict = {
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "blind_mode": config.blind_mode,
        "documents": len(docs),
        "languages": languages,
        "agreement": dict(sorted(agreement_counts.items())),
        "per_language": {},
        "files": ["fused.jsonl"],
    }

    for lang in languages:
        population = [(doc.id, coarse[doc.id]) for doc in docs if doc.language == lang]
        splits = _split(config, lang, population)
        dataset_dir = out / f"dataset_{lang}"
        export_dataset(splits, docs_by_id, dataset_dir)

        tfidf_model, train_vec, val_vec, test_vec = _vectorize(docs_by_id, splits)
        save_tfidf(tfidf_model, dataset_dir / "tfidf.model")
        balanced = _smote(config, lang, train_vec)
        write_vectors(balanced, dataset_dir / "train_vectors.jsonl")

        trained = _train(config, balanced)
        model_dir = out / f"models_{lang}"
        model_dir.mkdir(parents=True, exist_ok=True)
        for kind, model in trained.items():
            models.save_model(model, model_dir / f"{kind}.model")

        lang_info = {
            "split_seed": derived_seed(config.seed, "split", lang),
            "smote_seed": derived_seed(config.seed, "smote", lang),
            "smote_k": config.smote_k,
            "population": len(population),
            "train": len(splits.train),
            "validation": len(splits.validation),
            "test": len(splits.test),
            "train_after_smote": len(balanced),
            "models": sorted(trained),
        }
        for split_name, vectors in (("val", val_vec), ("test", test_vec)):
            reports, matrices = _evaluate(lang, trained, vectors, split_name)
            machine_path = out / f"metrics_{split_name}_{lang}.jsonl"
            machine_path.write_text(
                evaluation.render_report(reports, format="machine"), encoding="utf-8"
            )
            text_path = out / f"report_{split_name}_{lang}.txt"
            text_path.write_text(
                evaluation.render_report(reports, format="text"), encoding="utf-8"
            )
            figure_paths = figures.render_figures(
                reports, matrices, out / "figures", prefix=f"{lang}_{split_name}_"
            )
            manifest["files"].extend(
                [machine_path.name, text_path.name]
                + [f"figures/{p.name}" for p in figure_paths]
            )
        manifest["per_language"][lang] = lang_info

    manifest["files"].sort()
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
