#!/usr/bin/env python3
"""Regenerates the fixture files under data/. Output is deterministic."""

import json
import random
import sys
from pathlib import Path

# (lemma, gloss, score or None, children)
ADJECTIVES = ("quality", "a property of something", 0.0, [
    ("pleasant", "giving pleasure", 0.5, [
        ("lovely", "lovingly attractive", 0.8, []),
        ("cute", "attractive in a childlike way", 0.8, []),
        ("beautiful", "delighting the senses", 0.7, []),
        ("happy", "feeling or showing joy", 0.8, []),
        ("funny", "arousing amusement", 0.6, []),
        ("innocent", "free from guile", 0.4, []),
        ("brave", "possessing courage", 0.6, []),
        ("sweet", "pleasing to the mind", 0.6, []),
    ]),
    ("unpleasant", "disagreeable", -0.5, [
        ("sad", "experiencing sorrow", -0.7, []),
        ("angry", "feeling anger", -0.8, []),
        ("scary", "provoking fear", -0.6, []),
        ("ugly", "displeasing to the senses", -0.6, []),
        ("lonely", "lacking companions", -0.5, []),
        ("creepy", "causing unease", -0.7, []),
    ]),
    ("plain", "neutral description", 0.0, [
        ("old", "of long duration", None, []),
        ("big", "above average in size", None, []),
        ("small", "below average in size", None, []),
        ("wet", "covered with liquid", -0.1, []),
    ]),
])

VERBS = ("act", "perform an action", 0.0, [
    ("express", "give expression to", 0.0, [
        ("smile", "change one's face to show pleasure", 0.7, []),
        ("laugh", "produce laughter", 0.8, []),
        ("shout", "utter in a loud voice", -0.5, []),
        ("frown", "look angry or sullen", -0.6, []),
        ("cry", "shed tears", -0.7, []),
        ("hug", "squeeze tightly in the arms", 0.7, []),
        ("kiss", "touch with the lips", 0.6, []),
    ]),
    ("move", "change location", 0.0, [
        ("fall", "descend under gravity", -0.4, []),
        ("dance", "move in a pattern to music", 0.6, []),
        ("run", "move fast on foot", None, []),
        ("jump", "spring off the ground", 0.2, []),
        ("fight", "be in conflict", -0.7, []),
        ("break", "come apart", -0.5, []),
    ]),
])

NOUNS = ("entity", "that which exists", 0.0, [
    ("person", "a human being", 0.0, [
        ("girl", "a young woman", None, []),
        ("boy", "a young man", None, []),
        ("baby", "a very young child", 0.2, []),
        ("man", "an adult male", None, []),
        ("woman", "an adult female", None, []),
        ("crowd", "a large number of people", None, []),
    ]),
    ("animal", "a living organism", 0.0, [
        ("dog", "a domestic canine", None, []),
        ("cat", "a domestic feline", None, []),
        ("bird", "a feathered vertebrate", 0.1, []),
    ]),
    ("object", "a physical thing", 0.0, [
        ("cup", "a small open container", None, []),
        ("car", "a motor vehicle", None, []),
        ("flower", "a blossoming plant", 0.3, []),
        ("face", "the front of the head", None, []),
        ("gun", "a weapon that fires projectiles", -0.5, []),
        ("rain", "water falling in drops", -0.2, []),
    ]),
    ("event", "something that happens", 0.0, [
        ("party", "a social gathering", 0.5, []),
        ("storm", "violent weather", -0.5, []),
    ]),
])

TAGS = {"adjective": "a", "verb": "v", "noun": "n"}


def synset_id(lemma, pos):
    return f"{lemma}.{TAGS[pos]}.01"


def flatten(node, pos, parent, out):
    lemma, gloss, score, children = node
    out.append({
        "id": synset_id(lemma, pos),
        "lemma": lemma,
        "sense": 1,
        "pos": pos,
        "gloss": gloss,
        "score": score,
        "parent": parent,
    })
    for child in children:
        flatten(child, pos, synset_id(lemma, pos), out)


def lexicon():
    records = []
    for tree, pos in ((ADJECTIVES, "adjective"), (VERBS, "verb"), (NOUNS, "noun")):
        flatten(tree, pos, None, records)
    return records


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")


def random_pairs(rng, modifiers, nouns):
    n = rng.randint(1, 5)
    return [{"modifier": rng.choice(modifiers), "noun": rng.choice(nouns)} for _ in range(n)]


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = lexicon()
    write_jsonl(out / "lexicon.jsonl", records)

    roots = {r["id"] for r in records if r["parent"] is None}
    modifiers = [r["id"] for r in records if r["pos"] != "noun" and r["id"] not in roots]
    nouns = [r["id"] for r in records if r["pos"] == "noun" and r["id"] not in roots]

    rng = random.Random(2015)
    labels = ["positive"] * 1124 + ["negative"] * 146 + ["neutral"] * 599
    rng.shuffle(labels)
    instances = []
    for i, label in enumerate(labels):
        instances.append({
            "gif_id": f"ratio-{i:05d}",
            "pairs": random_pairs(rng, modifiers, nouns),
            "label": label,
        })
    write_jsonl(out / "paper_ratio.gso.jsonl", instances)

    instances = []
    for i in range(24):
        instances.append({
            "gif_id": f"timed-{i:03d}",
            "pairs": random_pairs(rng, modifiers, nouns),
            "label": ["positive", "negative", "neutral"][i % 3],
            "duration_s": 17.82,
        })
    write_jsonl(out / "constant_duration.gso.jsonl", instances)

    tasks = [{"gif_id": f"gif-{i:04d}", "gif_uri": f"https://media.example/gif-{i:04d}.gif"}
             for i in range(12)]
    write_jsonl(out / "tasks.jsonl", tasks)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data")
