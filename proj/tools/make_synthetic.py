#!/usr/bin/env python3
"""Writes the synthetic 8-language family under data/synthetic8.

Daughters descend from a fixed binary tree; every clade carries its own
unconditioned sound changes, so the generating tree is the unique most
parsimonious one.
"""
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "synthetic8"
GOLD = "(((Aka,Bor),(Cen,Dur)),((Eno,Fal),(Gim,Hes)));"
LANGS = ["Aka", "Bor", "Cen", "Dur", "Eno", "Fal", "Gim", "Hes"]
NULL = "∅"

# clade, proto, reflex, expert path (ancestral clades first)
CHANGES = [
    ("Aka Bor Cen Dur", "p", "f", ["p", "ɸ", "f"]),
    ("Aka Bor Cen Dur", "k", "tʃ", ["k", "c", "tʃ"]),
    ("Eno Fal Gim Hes", "t", "d", ["t", "d"]),
    ("Eno Fal Gim Hes", "s", "h", ["s", "h"]),
    ("Aka Bor", "b", "β", ["b", "β"]),
    ("Aka Bor", "e", "i", ["e", "i"]),
    ("Cen Dur", "d", "ð", ["d", "ð"]),
    ("Cen Dur", "o", "u", ["o", "u"]),
    ("Eno Fal", "g", "ɣ", ["g", "ɣ"]),
    ("Eno Fal", "a", "ɛ", ["a", "ɛ"]),
    ("Gim Hes", "n", "ŋ", ["n", "ŋ"]),
    ("Gim Hes", "l", "ɾ", ["l", "ɾ"]),
    ("Gim Hes", "r", NULL, ["r", NULL]),
]
MISSING = {(1, "Dur"), (9, "Hes")}  # (correspondence id, language)


def reflex(lang, proto):
    out = proto
    for clade, src, dst, _ in CHANGES:
        if lang in clade.split() and out == src:
            out = dst
    return out


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "gold.nwk").write_text(GOLD + "\n", encoding="utf-8")

    rows = ["id\tproto\t" + "\t".join(LANGS)]
    paths = []
    for i, (_, src, _, path) in enumerate(CHANGES, start=1):
        cells = []
        for lang in LANGS:
            cells.append("-" if (i, lang) in MISSING else reflex(lang, src))
        rows.append(f"{i}\t{src}\t" + "\t".join(cells))
        paths.append(f"{i}\t{src}\t{path[-1]}\t{'>'.join(path)}\t{len(path) - 1:.6f}")
    rows.append(f"{len(CHANGES) + 1}\tm\t" + "\t".join("m" for _ in LANGS))
    (OUT / "correspondences.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    (OUT / "expert_paths.tsv").write_text("\n".join(paths) + "\n", encoding="utf-8")

    rng = random.Random(411)
    onsets = ["p", "k", "t", "s", "b", "d", "g", "n", "l", "r", "m"]
    vowels = ["a", "e", "o", "i", "u"]
    lines = ["cogid\tlanguage\tsegments"]
    for w in range(1, 41):
        word = []
        for _ in range(rng.choice([2, 2, 3])):
            word += [rng.choice(onsets), rng.choice(vowels)]
        cogid = f"c{w:02d}"
        lines.append(f"{cogid}\tPROTO\t{' '.join(word)}")
        for lang in LANGS:
            if rng.random() < 0.1:
                continue  # lexical replacement
            segs = [reflex(lang, s) for s in word]
            segs = [s for s in segs if s != NULL]
            lines.append(f"{cogid}\t{lang}\t{' '.join(segs)}")
    (OUT / "cognates.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
