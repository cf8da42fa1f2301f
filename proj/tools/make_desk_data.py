#!/usr/bin/env python3
"""Generates the bundled desk-scale data set under data/desk/.

The text comes from a small synthetic grammar with regular English-like
morphology (plural -s, verb -s/-ed/-ing, adjective -er/-est/-ly), three topic
clusters and a country/capital relation, so every evaluation in the toolkit
has something to find. Output is deterministic for a given --seed.
"""

import argparse
import os
import random

ANIMALS = ["cat", "dog", "horse", "cow", "sheep", "wolf", "fox", "bear",
           "lion", "tiger", "rabbit", "mouse", "bird", "duck", "goat", "pig"]
TOOLS = ["hammer", "knife", "drill", "spoon", "fork", "plate", "cup",
         "bowl", "pan", "kettle"]
PEOPLE = ["teacher", "farmer", "doctor", "baker", "singer", "painter",
          "writer", "driver"]

TOPICS = {
    "animal": {
        "nouns": ANIMALS,
        "verbs": ["chase", "hunt", "jump", "climb", "sniff", "follow"],
        "places": ["forest", "field", "mountain", "meadow"],
    },
    "kitchen": {
        "nouns": TOOLS,
        "verbs": ["wash", "heat", "mix", "fill", "polish", "stack"],
        "places": ["kitchen", "sink", "cupboard", "oven"],
    },
    "people": {
        "nouns": PEOPLE,
        "verbs": ["help", "call", "visit", "paint", "watch", "thank"],
        "places": ["city", "village", "school", "market"],
    },
}

ADJECTIVES = ["small", "tall", "short", "old", "young", "quick", "slow",
              "dark", "bright", "warm", "cold", "kind", "soft", "loud"]

CAPITALS = [("france", "paris"), ("germany", "berlin"), ("italy", "rome"),
            ("spain", "madrid"), ("japan", "tokyo"), ("china", "beijing"),
            ("russia", "moscow"), ("egypt", "cairo"), ("greece", "athens"),
            ("peru", "lima"), ("canada", "ottawa"), ("kenya", "nairobi")]


def verb_forms(v):
    stem = v[:-1] if v.endswith("e") else v
    third = v + ("es" if v.endswith(("sh", "x", "ch")) else "s")
    past = v + "d" if v.endswith("e") else v + "ed"
    return {"base": v, "3sg": third, "past": past, "ing": stem + "ing"}


def plural(n):
    if n in ("sheep",):
        return n
    if n == "mouse":
        return "mice"
    if n == "wolf":
        return "wolves"
    if n.endswith(("x", "sh", "ch")):
        return n + "es"
    return n + "s"


def sentence(rng):
    """Returns a list of (token, pos, chunk) triples."""
    kind = rng.random()
    topic = TOPICS[rng.choice(list(TOPICS))]
    n1 = rng.choice(topic["nouns"])
    n2 = rng.choice(topic["nouns"])
    vf = verb_forms(rng.choice(topic["verbs"]))
    adj = rng.choice(ADJECTIVES)
    place = rng.choice(topic["places"])
    country, capital = rng.choice(CAPITALS)

    if kind < 0.16:
        return [("the", "DT", "B-NP"), (adj, "JJ", "I-NP"), (n1, "NN", "I-NP"),
                (vf["3sg"], "VBZ", "B-VP"), ("the", "DT", "B-NP"),
                (n2, "NN", "I-NP")]
    if kind < 0.30:
        return [("the", "DT", "B-NP"), (plural(n1), "NNS", "I-NP"),
                (vf["past"], "VBD", "B-VP"), ("the", "DT", "B-NP"),
                (adj, "JJ", "I-NP"), (plural(n2), "NNS", "I-NP")]
    if kind < 0.44:
        return [("the", "DT", "B-NP"), (n1, "NN", "I-NP"), ("is", "VBZ", "B-VP"),
                (vf["ing"], "VBG", "I-VP"), ("in", "IN", "B-PP"),
                ("the", "DT", "B-NP"), (place, "NN", "I-NP")]
    if kind < 0.54:
        return [(capital, "NNP", "B-NP"), ("is", "VBZ", "B-VP"),
                ("the", "DT", "B-NP"), ("capital", "NN", "I-NP"),
                ("of", "IN", "B-PP"), (country, "NNP", "B-NP")]
    if kind < 0.62:
        return [("people", "NNS", "B-NP"), ("in", "IN", "B-PP"),
                (country, "NNP", "B-NP"), ("live", "VBP", "B-VP"),
                ("in", "IN", "B-PP"), (capital, "NNP", "B-NP")]
    if kind < 0.72:
        return [("a", "DT", "B-NP"), (n1, "NN", "I-NP"), ("is", "VBZ", "B-VP"),
                (adj + "er", "JJR", "B-ADJP"), ("than", "IN", "B-PP"),
                ("a", "DT", "B-NP"), (n2, "NN", "I-NP")]
    if kind < 0.82:
        return [("the", "DT", "B-NP"), (adj + "est", "JJS", "I-NP"),
                (n1, "NN", "I-NP"), (vf["past"], "VBD", "B-VP"),
                ("near", "IN", "B-PP"), ("the", "DT", "B-NP"),
                (place, "NN", "I-NP")]
    if kind < 0.91:
        return [("the", "DT", "B-NP"), (plural(n1), "NNS", "I-NP"),
                (vf["base"], "VBP", "B-VP"), (adj + "ly", "RB", "B-ADVP"),
                ("in", "IN", "B-PP"), ("the", "DT", "B-NP"),
                (place, "NN", "I-NP")]
    return [("yesterday", "RB", "B-ADVP"), ("the", "DT", "B-NP"),
            (n1, "NN", "I-NP"), ("from", "IN", "B-PP"), (capital, "NNP", "B-NP"),
            (vf["past"], "VBD", "B-VP"), ("a", "DT", "B-NP"), (n2, "NN", "I-NP")]


def lexicon_entries():
    entries = []
    for topic in TOPICS.values():
        for n in topic["nouns"]:
            entries.append((n, [n]))
            p = plural(n)
            if p != n:
                if p.startswith(n):
                    entries.append((p, [n, p[len(n):]]))
                else:
                    entries.append((p, [p]))
        for v in topic["verbs"]:
            f = verb_forms(v)
            stem = f["ing"][:-3]
            entries.append((v, [v]))
            entries.append((f["3sg"], [v, f["3sg"][len(v):]]))
            entries.append((f["past"], [stem, "ed"]))
            entries.append((f["ing"], [stem, "ing"]))
        for pl in topic["places"]:
            entries.append((pl, [pl]))
    for a in ADJECTIVES:
        entries.append((a, [a]))
        entries.append((a + "er", [a, "er"]))
        entries.append((a + "est", [a, "est"]))
        entries.append((a + "ly", [a, "ly"]))
    return entries


SIMILARITY = [
    ("cat", "dog", 8.6), ("horse", "cow", 7.9), ("wolf", "fox", 8.1),
    ("lion", "tiger", 8.8), ("rabbit", "mouse", 6.9), ("duck", "bird", 7.7),
    ("knife", "fork", 8.0), ("cup", "bowl", 7.5), ("spoon", "plate", 6.8),
    ("hammer", "drill", 6.4), ("teacher", "doctor", 6.1), ("baker", "farmer", 5.9),
    ("singer", "painter", 6.3), ("writer", "painter", 6.6),
    ("cat", "hammer", 0.6), ("dog", "kettle", 0.5), ("lion", "spoon", 0.4),
    ("teacher", "fork", 0.8), ("pig", "doctor", 1.1), ("cup", "singer", 0.7),
    ("paris", "berlin", 7.0), ("france", "germany", 7.2), ("rome", "madrid", 6.9),
    ("paris", "hammer", 0.3), ("walk", "walked", 5.0),
    ("forest", "meadow", 6.7), ("kitchen", "oven", 6.5), ("city", "village", 7.3),
    ("unicorn", "dragon", 7.5), ("cat", "griffin", 3.0),
]

ANALOGIES = {
    "capital-common-countries": [
        ("paris", "france", "berlin", "germany"),
        ("rome", "italy", "madrid", "spain"),
        ("tokyo", "japan", "beijing", "china"),
        ("moscow", "russia", "cairo", "egypt"),
        ("athens", "greece", "lima", "peru"),
        ("ottawa", "canada", "nairobi", "kenya"),
        ("london", "england", "paris", "france"),
    ],
    "gram7-past-tense": [
        ("chasing", "chased", "hunting", "hunted"),
        ("washing", "washed", "heating", "heated"),
        ("helping", "helped", "calling", "called"),
        ("visiting", "visited", "painting", "painted"),
        ("jumping", "jumped", "climbing", "climbed"),
    ],
    "gram8-plural": [
        ("cat", "cats", "dog", "dogs"),
        ("knife", "knifes", "cup", "cups"),
        ("teacher", "teachers", "doctor", "doctors"),
        ("horse", "horses", "goat", "goats"),
        ("unicorn", "unicorns", "dragon", "dragons"),
    ],
    "gram2-comparative": [
        ("small", "smaller", "tall", "taller"),
        ("old", "older", "young", "younger"),
        ("quick", "quicker", "slow", "slower"),
    ],
}

BATS_PLURAL = [("cat", "cats"), ("dog", "dogs"), ("horse", "horses"),
               ("teacher", "teachers"), ("cup", "cups"), ("fox", "foxes"),
               ("mouse", "mice/mouses"), ("sheep", "sheep/sheeps")]


def conll_lines(rng, n):
    out = []
    for _ in range(n):
        for tok, pos, chunk in sentence(rng):
            out.append(f"{tok} {pos} {chunk}")
        out.append("")
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "desk"))
    ap.add_argument("--seed", type=int, default=2019)
    ap.add_argument("--bytes", type=int, default=1_000_000)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    rng = random.Random(args.seed)

    size = 0
    with open(os.path.join(args.out, "corpus.txt"), "w", encoding="utf-8") as f:
        while size < args.bytes:
            line = " ".join(t for t, _, _ in sentence(rng)) + "\n"
            f.write(line)
            size += len(line.encode("utf-8"))

    with open(os.path.join(args.out, "lexicon.tsv"), "w", encoding="utf-8") as f:
        for word, morphs in lexicon_entries():
            f.write(word + "\t" + " ".join(morphs) + "\n")

    with open(os.path.join(args.out, "similarity.tsv"), "w", encoding="utf-8") as f:
        f.write("word1\tword2\tPOS\tscore\n")
        for a, b, s in SIMILARITY:
            f.write(f"{a}\t{b}\tN\t{s}\n")

    with open(os.path.join(args.out, "analogy.txt"), "w", encoding="utf-8") as f:
        for cat, rows in ANALOGIES.items():
            f.write(f": {cat}\n")
            for row in rows:
                f.write(" ".join(row) + "\n")

    os.makedirs(os.path.join(args.out, "bats"), exist_ok=True)
    with open(os.path.join(args.out, "bats", "I01_noun_plural.txt"), "w", encoding="utf-8") as f:
        for a, b in BATS_PLURAL:
            f.write(f"{a}\t{b}\n")

    with open(os.path.join(args.out, "train.conll"), "w", encoding="utf-8") as f:
        f.write("\n".join(conll_lines(rng, 600)) + "\n")
    with open(os.path.join(args.out, "test.conll"), "w", encoding="utf-8") as f:
        f.write("\n".join(conll_lines(rng, 200)) + "\n")


if __name__ == "__main__":
    main()
