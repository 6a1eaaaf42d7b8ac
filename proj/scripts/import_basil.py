#!/usr/bin/env python3
"""Convert a BASIL release into the canonical corpus format (JSON lines).

The public BASIL data ships as one JSON document per article. Key spellings
drifted between releases (dashes vs. underscores), so lookups below accept
both. Usage:

    python3 scripts/import_basil.py --input path/to/articles/ --out basil.jsonl

--input accepts a directory of per-article JSON files or a single JSON file
holding a list of articles. The importer prints label totals so the result
can be eyeballed against the published statistics.
"""

import argparse
import json
import sys
from pathlib import Path

SOURCE_MAP = {
    "fox": "fox-news",
    "foxnews": "fox-news",
    "fox news": "fox-news",
    "nyt": "nyt",
    "nytimes": "nyt",
    "new york times": "nyt",
    "hpo": "huffpost",
    "huffpost": "huffpost",
    "huffington post": "huffpost",
}

STANCE_MAP = {"left": "left", "center": "center", "centre": "center", "right": "right"}


def get_any(obj, *names, default=None):
    """Field lookup tolerating dash/underscore/case variants."""
    variants = {}
    for key, value in obj.items():
        variants[key.lower().replace("-", "_")] = value
    for name in names:
        needle = name.lower().replace("-", "_")
        if needle in variants:
            return variants[needle]
    return default


def sentence_bias(annotations):
    lexical = False
    informational = False
    for ann in annotations or []:
        bias = str(get_any(ann, "bias", default="")).lower()
        if bias.startswith("lex"):
            lexical = True
        elif bias.startswith("inf"):
            informational = True
    return lexical, informational


def convert_article(raw, origin):
    source_raw = str(get_any(raw, "source", "media", default="")).strip().lower()
    source = SOURCE_MAP.get(source_raw, "other")

    event = get_any(raw, "triplet_uuid", "triplet-uuid", "main_event", "main-event")
    if event is None:
        raise ValueError(f"{origin}: no event identifier (triplet-uuid or main-event)")

    art_ann = get_any(raw, "article_level_annotations", "article-level-annotations",
                      default={}) or {}
    stance = get_any(art_ann, "relative_stance", "relative-stance", "stance")
    if stance is None:
        stance = get_any(raw, "relative_stance", "relative-stance", "stance")
    if stance is None:
        raise ValueError(f"{origin}: no article-level stance annotation")
    stance = str(stance).strip().lower()
    if stance not in STANCE_MAP:
        raise ValueError(f"{origin}: unrecognized stance '{stance}'")

    body = get_any(raw, "body", "sentences", "body_paragraphs", "body-paragraphs")
    if not body:
        raise ValueError(f"{origin}: no sentence list")

    sentences = []
    for i, entry in enumerate(body):
        if isinstance(entry, str):
            text, annotations = entry, []
            index = i
        else:
            text = get_any(entry, "sentence", "text", default="")
            annotations = get_any(entry, "annotations", default=[])
            index = get_any(entry, "sentence_index", "sentence-index", default=i)
        lexical, informational = sentence_bias(annotations)
        sentences.append((int(index), {
            "text": text,
            "lexical_bias": lexical,
            "informational_bias": informational,
        }))
    sentences.sort(key=lambda pair: pair[0])

    article_id = get_any(raw, "uuid", "id", default=None) or Path(origin).stem
    return {
        "id": str(article_id),
        "source": source,
        "event_id": str(event),
        "raw_label": STANCE_MAP[stance],
        "sentences": [s for _, s in sentences],
    }


def load_raw_articles(input_path):
    path = Path(input_path)
    if path.is_dir():
        files = sorted(p for p in path.rglob("*.json"))
        if not files:
            sys.exit(f"error: no .json files under {path}")
        for p in files:
            with open(p, encoding="utf-8") as fh:
                yield json.load(fh), str(p)
    else:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, list):
            data = [data]
        for i, raw in enumerate(data):
            yield raw, f"{path}[{i}]"


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--input", required=True,
                        help="BASIL article directory or combined JSON file")
    parser.add_argument("--out", required=True, help="canonical corpus file to write")
    args = parser.parse_args()

    articles = []
    for raw, origin in load_raw_articles(args.input):
        try:
            articles.append(convert_article(raw, origin))
        except ValueError as err:
            sys.exit(f"error: {err}")

    seen = set()
    for art in articles:
        if art["id"] in seen:
            sys.exit(f"error: duplicate article id '{art['id']}'")
        seen.add(art["id"])

    with open(args.out, "w", encoding="utf-8") as fh:
        for art in articles:
            fh.write(json.dumps(art, ensure_ascii=False) + "\n")

    sentences = sum(len(a["sentences"]) for a in articles)
    lexical = sum(s["lexical_bias"] for a in articles for s in a["sentences"])
    informational = sum(s["informational_bias"] for a in articles for s in a["sentences"])
    any_bias = sum(s["lexical_bias"] or s["informational_bias"]
                   for a in articles for s in a["sentences"])
    biased = sum(a["raw_label"] != "center" for a in articles)
    events = len({a["event_id"] for a in articles})
    print(f"articles: {len(articles)} ({biased} bias / {len(articles) - biased} neutral), "
          f"events: {events}")
    print(f"sentences: {sentences}, lexical: {lexical}, informational: {informational}, "
          f"any: {any_bias}")


if __name__ == "__main__":
    main()
