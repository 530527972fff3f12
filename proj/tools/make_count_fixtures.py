#!/usr/bin/env python3
"""Writes the class-count fixture files used by the dataset tests.

Usage: make_count_fixtures.py OUT_DIR
"""
import random
import sys
from pathlib import Path

WORDS = ["आज", "मौसम", "अच्छा", "है", "क्या", "बात", "हम", "तुम", "चलो", "घर", "खाना",
         "पानी", "दिन", "रात", "शहर", "गांव", "नमस्ते", "धन्यवाद", "कल", "फिर"]


def sentence(rng: random.Random, n: int) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(n))


def write(path: Path, rows) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write("tweet_id\ttext\ttask_1\ttask_2\n")
        for r in rows:
            f.write("\t".join(r) + "\n")


def main(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(2021)

    labels = ["HOF"] * 669 + ["NOT"] * 1205
    rng.shuffle(labels)
    write(out / "binary_counts.tsv",
          [(f"b{i:05d}", sentence(rng, rng.randint(8, 18)), lab, "")
           for i, lab in enumerate(labels)])

    fine = ["NONE"] * 3161 + ["OFFN"] * 654 + ["HATE"] * 566 + ["PRFN"] * 213
    rng.shuffle(fine)
    write(out / "fine_counts.tsv",
          [(f"f{i:05d}", sentence(rng, rng.randint(18, 34)),
            "NOT" if lab == "NONE" else "HOF", lab)
           for i, lab in enumerate(fine)])


if __name__ == "__main__":
    main(Path(sys.argv[1]))
