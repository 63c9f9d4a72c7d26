"""Generate the bundled demo corpus.

Builds a 200-post synthetic corpus with disjoint per-class vocabularies:
each severity class carries a fixed set of lexicon keywords whose
per-item scores sum into the intended band, plus class-specific filler
words that match nothing. Keyword votes therefore equal the intended
label by construction, expert labels (also written here) agree, and the
fused dataset is linearly separable by vocabulary.

Run from the repository root:  python scripts/make_fixture.py
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from sevlab.bdi import build_lexicon, default_bands, load_questionnaire, map_score_to_band, score_text
from sevlab.corpus import RawPost, load_stoplist, preprocess
from sevlab.labeling import merge_rare

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "sevlab" / "data" / "fixture"
SEED = 20240101

# fine label -> (doc count, marker score multiset)
PLAN = {
    "Normal": (55, []),
    "Mild": (45, [3, 3, 3, 3, 1]),          # 13
    "Borderline": (8, [3, 3, 3, 3, 3, 3]),  # 18
    "Moderate": (50, [3] * 8 + [1]),        # 25
    "Severe": (30, [3] * 11 + [2]),         # 35
    "Extreme": (12, [3] * 14),              # 42
}

FILLERS = {
    "Normal": """garden bicycle weekend hiking recipe painting guitar library puzzle
        jogging baking camping lakeside picnic chess sunrise pottery birdwatch
        marathon orchard""".split(),
    "Mild": """ledger commute spreadsheet meeting deadline printer hallway stapler
        lunchroom elevator parking notebook whiteboard badge keyboard monitor
        stairwell cubicle folder binder""".split(),
    "Borderline": """violin trumpet cello oboe clarinet bassoon harp piccolo viola
        mandolin banjo accordion ukulele drumkit xylophone tambourine flute
        saxophone organ harmonica""".split(),
    "Moderate": """volcano glacier canyon tundra savanna archipelago peninsula
        estuary fjord plateau lagoon delta moraine geyser atoll basalt
        sediment quartz limestone granite""".split(),
    "Severe": """asteroid nebula quasar pulsar comet meteor galaxy supernova
        satellite telescope observatory eclipse equinox solstice aurora
        constellation gravity orbit cosmos stardust""".split(),
    "Extreme": """algebra calculus topology geometry matrix vector tensor integral
        derivative polynomial theorem lemma axiom corollary fraction
        exponent logarithm prime modulus infinity""".split(),
}

STOP_FILLER = ["i", "the", "and", "was", "so", "at", "my", "it", "of", "a"]
URLS = ["http://example.org/thread/11", "https://example.net/post?id=7", "www.example.com/entry/3"]


def unique_tokens_by_score(lexicon):
    """(item, score) -> tokens appearing in exactly one item of the lexicon."""
    owner: dict[str, list[tuple[int, int]]] = {}
    for e in lexicon.entries:
        owner.setdefault(e.keyword, []).append((e.item_index, e.score))
    unique: dict[tuple[int, int], list[str]] = {}
    for token, places in owner.items():
        if len(places) == 1:
            item, score = places[0]
            unique.setdefault((item, score), []).append(token)
    for tokens in unique.values():
        tokens.sort()
    return unique


def allocate_markers(lexicon):
    """Pick per-class marker keywords: one item each, unique tokens, exact sums."""
    unique = unique_tokens_by_score(lexicon)
    pool = {key: list(tokens) for key, tokens in unique.items()}
    markers: dict[str, list[tuple[str, int, int]]] = {}
    order = sorted(PLAN, key=lambda c: -len(PLAN[c][1]))  # biggest demand first
    for cls in order:
        _, scores = PLAN[cls]
        chosen: list[tuple[str, int, int]] = []
        used_items: set[int] = set()
        for score in sorted(scores, reverse=True):
            candidates = [
                (item, tokens)
                for (item, s), tokens in pool.items()
                if s == score and tokens and item not in used_items
            ]
            if not candidates:
                raise SystemExit(f"no unique keyword left for class {cls} score {score}")
            candidates.sort(key=lambda pair: (-len(pair[1]), pair[0]))
            item, tokens = candidates[0]
            token = tokens.pop(0)
            chosen.append((token, item, score))
            used_items.add(item)
        markers[cls] = chosen
    return markers


def decorate(token: str, rng) -> str:
    roll = rng.random()
    if roll < 0.12:
        token = token.upper()
    elif roll < 0.25:
        token = token.capitalize()
    if rng.random() < 0.18:
        token += rng.choice([".", ",", "!", "?", "..."])
    return token


def main() -> None:
    rng = np.random.default_rng(SEED)
    stops = load_stoplist("en")
    _, items = load_questionnaire()
    lexicon = build_lexicon(items, stops)
    bands = default_bands()
    lexicon_tokens = {e.keyword for e in lexicon.entries}

    for cls, words in FILLERS.items():
        assert len(words) == 20, (cls, len(words))
        clash = set(words) & (lexicon_tokens | stops.words)
        assert not clash, (cls, clash)
    all_fillers = [w for words in FILLERS.values() for w in words]
    assert len(all_fillers) == len(set(all_fillers)), "filler pools overlap"

    markers = allocate_markers(lexicon)
    for cls, chosen in markers.items():
        total = sum(score for _, _, score in chosen)
        assert map_score_to_band(total, bands) == cls, (cls, total)
        print(f"{cls}: total {total} via {[(t, i, s) for t, i, s in chosen]}")

    # interleave classes through the file deterministically
    labels = [cls for cls, (count, _) in PLAN.items() for _ in range(count)]
    order = rng.permutation(len(labels))
    labels = [labels[i] for i in order]

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    posts = []
    annotations = []
    for n, cls in enumerate(labels, start=1):
        doc_id = f"d{n:03d}"
        marker_tokens = [t for t, _, _ in markers[cls]]
        filler_count = int(rng.integers(5, 10))
        fillers = [FILLERS[cls][i] for i in rng.choice(20, size=filler_count, replace=False)]
        stop_count = int(rng.integers(2, 5))
        stopwords = [STOP_FILLER[i] for i in rng.choice(len(STOP_FILLER), size=stop_count, replace=False)]
        tokens = marker_tokens + fillers + stopwords
        if rng.random() < 0.15:
            tokens.append(URLS[int(rng.integers(len(URLS)))])
        tokens = [tokens[i] for i in rng.permutation(len(tokens))]
        body = " ".join(decorate(tok, rng) if not tok.startswith(("http", "www")) else tok for tok in tokens)
        title = None
        if rng.random() < 0.2:
            title_words = [FILLERS[cls][i] for i in rng.choice(20, size=int(rng.integers(2, 5)), replace=False)]
            title = " ".join(title_words).capitalize()
        post = RawPost(
            id=doc_id,
            source="support-forum",
            body=body,
            language="en",
            title=title,
            created_at=1_700_000_000 + n,
        )
        doc = preprocess(post, stops)
        got = score_text(doc, lexicon).total
        want = sum(s for _, _, s in markers[cls])
        assert got == want, (doc_id, cls, got, want, doc.text)
        assert map_score_to_band(got, bands) == cls
        posts.append(post)
        annotations.append((doc_id, "psy-1", cls, 1000 + n))

    with open(OUT_DIR / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for post in posts:
            record = {
                "id": post.id,
                "source": post.source,
                "created_at": post.created_at,
                "body": post.body,
                "language": post.language,
            }
            if post.title:
                record["title"] = post.title
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    with open(OUT_DIR / "expert_labels.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "annotator_id", "label", "submitted_at"])
        writer.writerows(annotations)

    coarse_counts: dict[str, int] = {}
    for _, _, cls, _ in annotations:
        coarse = merge_rare(cls)
        coarse_counts[coarse] = coarse_counts.get(coarse, 0) + 1
    print("coarse counts:", coarse_counts)

    config = {
        "seed": 42,
        "corpus": "corpus.jsonl",
        "expert_labels": "expert_labels.csv",
        "zeroshot": {"endpoint": "stub://fixture"},
        "split": {"en": {cls: [5, 5] for cls in coarse_counts}},
        "smote_k": 5,
        "out": "out",
    }
    with open(OUT_DIR / "config.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(posts)} posts -> {OUT_DIR}")


if __name__ == "__main__":
    main()
