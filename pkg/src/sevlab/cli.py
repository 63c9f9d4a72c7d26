"""Command-line interface.

Subcommands mirror the pipeline stages and share file formats, so a full
run can be reproduced step by step:

    ingest -> label-keyword / label-zeroshot / annotate-import ->
    fuse -> split -> smote -> train -> evaluate -> report

`run` executes everything in one go; `serve` hosts the annotation
service. Global flags: --config, --seed, --out.
"""

from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

import click

from . import bdi, evaluation, figures, labeling, models, pipeline
from .corpus import CleanDocument, read_documents, write_documents
from .dataset import LabeledVector, SplitSpec, export_dataset, shuffle_split, smote_oversample
from .features import fit_tfidf, load_tfidf, save_tfidf, transform
from .labeling import LabelVote
from .pipeline import (
    PendingAnnotations,
    PipelineStageError,
    derived_seed,
    load_config,
    read_vectors,
    read_votes,
    write_vectors,
    write_votes,
)
from .store import AnnotationStore, read_annotation_csv
from .zeroshot import ZeroShotClient


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), help="Pipeline config JSON.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", type=click.Path(), default=None, help="Override the output directory.")
@click.pass_context
def main(ctx, config_path, seed, out):
    """Severity-labeling toolkit: weak-supervision labeling, balanced
    datasets, and classical baselines over long-form posts."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["seed"] = seed
    ctx.obj["out"] = out


def _require_config(ctx) -> pipeline.PipelineConfig:
    if not ctx.obj.get("config_path"):
        raise click.UsageError("this command needs --config")
    return load_config(ctx.obj["config_path"], seed=ctx.obj["seed"], out=ctx.obj["out"])


def _out_dir(config) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _clean_docs(config, out: Path) -> list[CleanDocument]:
    docs_path = out / "clean_docs.jsonl"
    if docs_path.exists():
        return read_documents(docs_path)
    posts = pipeline._ingest(config)
    docs = pipeline._preprocess(config, posts)
    write_documents(docs, docs_path)
    return docs


@main.command()
@click.pass_context
def ingest(ctx):
    """Read the corpus, normalize it, and write clean_docs.jsonl."""
    config = _require_config(ctx)
    out = _out_dir(config)
    posts = pipeline._ingest(config)
    docs = pipeline._preprocess(config, posts)
    write_documents(docs, out / "clean_docs.jsonl")
    empty = sum(1 for d in docs if d.token_count == 0)
    click.echo(f"ingested {len(posts)} posts -> {out / 'clean_docs.jsonl'} ({empty} empty)")


@main.command()
@click.pass_context
def lexicon(ctx):
    """Build keyword lexicons and export them as TSV."""
    config = _require_config(ctx)
    out = _out_dir(config)
    languages = sorted(config.questionnaire)
    lexicons, _ = pipeline._lexicons(config, languages)
    for lang, lex in lexicons.items():
        path = out / f"lexicon_{lang}.tsv"
        bdi.write_lexicon(lex, path)
        click.echo(f"{lang}: {len(lex.entries)} entries -> {path}")


@main.command("label-keyword")
@click.pass_context
def label_keyword(ctx):
    """Produce keyword votes for every document."""
    config = _require_config(ctx)
    out = _out_dir(config)
    docs = _clean_docs(config, out)
    languages = sorted({d.language for d in docs})
    lexicons, bands = pipeline._lexicons(config, languages)
    votes = [labeling.keyword_label(d, lexicons[d.language], bands) for d in docs]
    write_votes(votes, out / "votes_keyword.jsonl")
    click.echo(f"wrote {len(votes)} keyword votes -> {out / 'votes_keyword.jsonl'}")


@main.command("label-zeroshot")
@click.pass_context
def label_zeroshot(ctx):
    """Produce zero-shot votes for every document (cached)."""
    config = _require_config(ctx)
    out = _out_dir(config)
    docs = _clean_docs(config, out)
    client = ZeroShotClient(endpoint=config.zeroshot_endpoint, cache_path=config.zeroshot_cache)
    votes = [labeling.zeroshot_label(d, client) for d in docs]
    write_votes(votes, out / "votes_zeroshot.jsonl")
    click.echo(f"wrote {len(votes)} zero-shot votes -> {out / 'votes_zeroshot.jsonl'}")


@main.command("annotate-import")
@click.argument("csv_path", type=click.Path(exists=True))
@click.pass_context
def annotate_import(ctx, csv_path):
    """Import expert annotations from CSV into the durable store."""
    config = _require_config(ctx)
    store_dir = config.store or (_out_dir(config) / "store")
    docs = _clean_docs(config, _out_dir(config))
    store = AnnotationStore(store_dir, known_docs={d.id for d in docs})
    count = store.import_csv(csv_path)
    store.write_snapshot()
    store.close()
    click.echo(f"imported {count} annotations into {store_dir} ({len(store)} effective)")


@main.command()
@click.pass_context
def fuse(ctx):
    """Fuse keyword, zero-shot, and expert votes into final labels."""
    config = _require_config(ctx)
    out = _out_dir(config)
    docs = _clean_docs(config, out)
    keyword_votes = {v.doc_id: v for v in read_votes(out / "votes_keyword.jsonl")}
    zeroshot_votes = {v.doc_id: v for v in read_votes(out / "votes_zeroshot.jsonl")}
    if not config.expert_labels:
        raise click.UsageError("config has no expert_labels path")
    expert = {}
    for a in read_annotation_csv(config.expert_labels):
        expert[a.doc_id] = LabelVote(
            doc_id=a.doc_id, source="expert", label=a.label, created_at=a.submitted_at
        )
    merge = labeling.MergeMap(dict(config.merge)) if config.merge else labeling.default_merge_map()
    missing = [d.id for d in docs if d.id not in expert]
    if missing:
        click.echo(f"pending: {len(missing)}")
        sys.exit(2)
    counts: dict[str, int] = {}
    with open(out / "fused.jsonl", "w", encoding="utf-8") as fh:
        for d in docs:
            f = labeling.fuse(
                keyword_votes[d.id], zeroshot_votes[d.id], expert[d.id],
                weights=config.fusion_weights,
            )
            counts[f.agreement] = counts.get(f.agreement, 0) + 1
            fh.write(json.dumps({
                "doc_id": d.id,
                "language": d.language,
                "label": f.label,
                "coarse_label": labeling.merge_rare(f.label, merge),
                "agreement": f.agreement,
                "votes": {v.source: v.label for v in f.votes},
            }, sort_keys=True) + "\n")
    click.echo(f"fused {len(docs)} documents {dict(sorted(counts.items()))}")


def _read_fused(out: Path) -> list[dict]:
    path = out / "fused.jsonl"
    if not path.exists():
        raise click.UsageError(f"{path} not found; run `sevlab fuse` first")
    return [json.loads(line) for line in path.read_text("utf-8").splitlines() if line.strip()]


@main.command()
@click.pass_context
def split(ctx):
    """Stratified train/validation/test split per language."""
    config = _require_config(ctx)
    out = _out_dir(config)
    docs = {d.id: d for d in _clean_docs(config, out)}
    fused = _read_fused(out)
    for lang in sorted(config.split):
        population = [(r["doc_id"], r["coarse_label"]) for r in fused if r["language"] == lang]
        spec = SplitSpec(counts=config.split[lang], seed=derived_seed(config.seed, "split", lang))
        splits = shuffle_split(population, spec, language=lang)
        manifest = export_dataset(splits, docs, out / f"dataset_{lang}")
        summary = {name: info["total"] for name, info in manifest["splits"].items()}
        click.echo(f"{lang}: {summary} -> {out / f'dataset_{lang}'}")


def _split_docs(path: Path) -> list[tuple[CleanDocument, str]]:
    rows = []
    for line in path.read_text("utf-8").splitlines():
        if not line.strip():
            continue
        r = json.loads(line)
        doc = CleanDocument(
            id=r["id"], language=r["language"], text=r["text"],
            token_count=len(r["text"].split()),
        )
        rows.append((doc, r["label"]))
    return rows


@main.command()
@click.pass_context
def smote(ctx):
    """Fit TF-IDF on the training split and balance it with SMOTE."""
    config = _require_config(ctx)
    out = _out_dir(config)
    for lang in sorted(config.split):
        dataset_dir = out / f"dataset_{lang}"
        rows = _split_docs(dataset_dir / "train.jsonl")
        tfidf = fit_tfidf([doc for doc, _ in rows])
        save_tfidf(tfidf, dataset_dir / "tfidf.model")
        train_vectors = [
            LabeledVector(vector=transform(tfidf, doc), label=label, doc_id=doc.id)
            for doc, label in rows
        ]
        balanced = smote_oversample(
            train_vectors, k=config.smote_k, seed=derived_seed(config.seed, "smote", lang)
        )
        write_vectors(balanced, dataset_dir / "train_vectors.jsonl")
        click.echo(
            f"{lang}: {len(train_vectors)} train vectors -> {len(balanced)} after SMOTE "
            f"(k={config.smote_k})"
        )


@main.command()
@click.pass_context
def train(ctx):
    """Train the configured classifiers on the balanced training set."""
    config = _require_config(ctx)
    out = _out_dir(config)
    for lang in sorted(config.split):
        balanced = read_vectors(out / f"dataset_{lang}" / "train_vectors.jsonl")
        trained = pipeline._train(config, balanced)
        model_dir = out / f"models_{lang}"
        model_dir.mkdir(parents=True, exist_ok=True)
        for kind, model in trained.items():
            models.save_model(model, model_dir / f"{kind}.model")
        click.echo(f"{lang}: trained {sorted(trained)} -> {model_dir}")


@main.command()
@click.pass_context
def evaluate(ctx):
    """Evaluate saved models on validation and test splits."""
    config = _require_config(ctx)
    out = _out_dir(config)
    for lang in sorted(config.split):
        dataset_dir = out / f"dataset_{lang}"
        tfidf = load_tfidf(dataset_dir / "tfidf.model")
        model_dir = out / f"models_{lang}"
        trained = {
            p.stem: models.load_model(p) for p in sorted(model_dir.glob("*.model"))
        }
        for split_name, file_name in (("val", "validation.jsonl"), ("test", "test.jsonl")):
            rows = _split_docs(dataset_dir / file_name)
            y_true = [label for _, label in rows]
            reports, matrices = [], {}
            for kind, model in trained.items():
                y_pred = model.predict_batch([transform(tfidf, doc) for doc, _ in rows])
                cm = evaluation.confusion(y_true, y_pred, model.classes)
                matrices[kind] = cm
                reports.append(evaluation.metrics(cm, model=kind, language=lang))
            (out / f"metrics_{split_name}_{lang}.jsonl").write_text(
                evaluation.render_report(reports, format="machine"), encoding="utf-8"
            )
            (out / f"report_{split_name}_{lang}.txt").write_text(
                evaluation.render_report(reports, format="text"), encoding="utf-8"
            )
            figures.render_figures(reports, matrices, out / "figures", prefix=f"{lang}_{split_name}_")
            click.echo(f"{lang}/{split_name}: evaluated {sorted(trained)}")


@main.command()
@click.option("--check", is_flag=True, help="Validate the bundled published-metrics table.")
@click.option("--reference", type=click.Path(exists=True), default=None,
              help="Validate a custom reference-metrics CSV instead.")
@click.option("--tolerance", type=float, default=0.02, show_default=True)
@click.pass_context
def report(ctx, check, reference, tolerance):
    """Re-render text reports and figures; optionally run the
    arithmetic-consistency validator over a published-metrics table."""
    if check or reference:
        if reference:
            table = evaluation.load_reference_table(reference)
        else:
            with resources.as_file(
                resources.files("sevlab.data").joinpath("reference_metrics.csv")
            ) as path:
                table = evaluation.load_reference_table(path)
        rows = [(r["precision"], r["recall"], r["f1"]) for r in table]
        flags = evaluation.validate_report_consistency(rows, tolerance=tolerance)
        flagged = [r for r, f in zip(table, flags) if f]
        click.echo(
            f"checked {len(rows)} rows at tolerance {tolerance}: "
            f"{len(rows) - len(flagged)} consistent, {len(flagged)} flagged"
        )
        for r in flagged:
            click.echo(
                f"  FLAGGED {r['language']}/{r['model']}/{r['class']}: "
                f"P={r['precision']:.2f} R={r['recall']:.2f} F1={r['f1']:.2f}"
            )
        return
    config = _require_config(ctx)
    out = _out_dir(config)
    rendered = 0
    for machine_path in sorted(out.glob("metrics_*.jsonl")):
        reports = _reports_from_machine(machine_path)
        if not reports:
            continue
        name = machine_path.stem.replace("metrics_", "report_")
        (out / f"{name}.txt").write_text(
            evaluation.render_report(reports, format="text"), encoding="utf-8"
        )
        figures.f1_bars(reports, machine_path.stem, out / "figures" / f"{machine_path.stem}_f1.png")
        rendered += 1
    click.echo(f"re-rendered {rendered} report(s) in {out}")


def _reports_from_machine(path: Path) -> list[evaluation.EvalReport]:
    """Rebuild EvalReports from a machine-format JSONL file."""
    per_model: dict[str, dict] = {}
    for line in path.read_text("utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        slot = per_model.setdefault(
            rec["model"], {"classes": [], "precision": {}, "recall": {}, "f1": {},
                          "accuracy": 0.0, "samples": 0, "language": rec.get("language", "")}
        )
        if "class" in rec:
            slot["classes"].append(rec["class"])
            slot["precision"][rec["class"]] = rec["precision"]
            slot["recall"][rec["class"]] = rec["recall"]
            slot["f1"][rec["class"]] = rec["f1"]
        elif "accuracy" in rec:
            slot["accuracy"] = rec["accuracy"]
            slot["samples"] = rec.get("samples", 0)
    out = []
    for model, slot in per_model.items():
        out.append(
            evaluation.EvalReport(
                model=model,
                language=slot["language"],
                classes=tuple(slot["classes"]),
                precision=slot["precision"],
                recall=slot["recall"],
                f1=slot["f1"],
                accuracy=slot["accuracy"],
                sample_count=slot["samples"],
            )
        )
    return out


@main.command()
@click.pass_context
def run(ctx):
    """Run the full pipeline and write reports plus the run manifest."""
    config = _require_config(ctx)
    try:
        manifest = pipeline.run_pipeline(config)
    except PendingAnnotations as exc:
        click.echo(f"pending: {exc.count}")
        sys.exit(2)
    except PipelineStageError as exc:
        click.echo(exc.as_json(), err=True)
        sys.exit(1)
    click.echo(
        f"run complete: {manifest['documents']} documents, "
        f"languages {manifest['languages']}, out {config.out}"
    )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=None, help="Override the config port.")
@click.pass_context
def serve(ctx, host, port):
    """Host the annotation service (task queue, annotations, fusion)."""
    import uvicorn

    from .service import create_app

    config = _require_config(ctx)
    app = create_app(config)
    uvicorn.run(app, host=host, port=port if port is not None else config.port, log_level="warning")


if __name__ == "__main__":
    main()
