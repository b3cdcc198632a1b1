#!/usr/bin/env python3
"""Deterministic generator for the 200x200 mining corpora.

Entities come from a 12-symbol vocabulary so SAS values spread across the
threshold range; tokens are the entities plus filler words. These corpora
back the mining monotonicity/determinism checks (raising p shrinks the pair
set; worker counts and reruns are byte-identical; rd reproduces under a
fixed seed), which need no expected output beyond the properties themselves.
"""

import json
import random
from pathlib import Path

HERE = Path(__file__).parent
ENTITY_VOCAB = [f"e{i}" for i in range(12)]
FILLER = ["the", "a", "it", "was", "and", "but", "so", "very", "felt", "quite"]


def make(style, count, rng):
    rows = []
    for i in range(count):
        entities = rng.sample(ENTITY_VOCAB, rng.randint(1, 4))
        tokens = entities + rng.choices(FILLER, k=rng.randint(3, 8))
        rng.shuffle(tokens)
        rows.append({
            "id": f"{style}-{i:03}",
            "style": style,
            "text": " ".join(tokens),
            "tokens": tokens,
            "entities": entities,
        })
    return rows


def main():
    rng = random.Random(200200)
    for style, name in (("neg", "src"), ("pos", "tgt")):
        rows = make(style, 200, rng)
        with open(HERE / f"input/{name}.jsonl", "w") as f:
            for r in rows:
                f.write(json.dumps(r) + "\n")
    print("wrote 200 + 200 sentences")


if __name__ == "__main__":
    main()
