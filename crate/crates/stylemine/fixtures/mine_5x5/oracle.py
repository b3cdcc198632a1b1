#!/usr/bin/env python3
"""Exhaustive pairwise simulation of semb-sas mining on the 5x5 corpora.

Re-derives the expected parallel groups from first principles:
  1. cosine(src, tgt) for every pair, straight from dot/(|a||b|);
  2. top-k candidates per source, ties broken by ascending target id;
  3. SAS per candidate from the direct formula, keep those >= p;
  4. expert = max SAS, tie-broken by cosine then ascending id;
  5. sources with no surviving candidate are dropped.
"""

import json
import math
from pathlib import Path

HERE = Path(__file__).parent

SRC = [
    ("neg-0", "the food was bad", ["food"], [1.0, 0.1, 0.0]),
    ("neg-1", "the staff was rude to us", ["staff"], [0.1, 1.0, 0.0]),
    ("neg-2", "prices were awful and service slow", ["price", "service"], [0.0, 0.2, 1.0]),
    ("neg-3", "the patio felt cramped", ["patio"], [0.7, 0.7, 0.1]),
    ("neg-4", "parking was a nightmare downtown", ["park"], [0.3, 0.0, 0.9]),
]
TGT = [
    ("pos-0", "the food was great", ["food"], [0.9, 0.2, 0.1]),
    ("pos-1", "lovely staff and delicious food", ["staff", "food"], [0.4, 0.9, 0.0]),
    ("pos-2", "prices are fair for the service", ["price", "service"], [0.1, 0.3, 1.0]),
    ("pos-3", "the patio was sunny and food arrived fast", ["patio", "food"], [0.8, 0.6, 0.2]),
    ("pos-4", "we loved the downtown views", ["view", "river"], [0.2, 0.1, 0.8]),
]
PARAMS = {"strategy": "semb-sas", "k": 2, "p": 0.05, "beta": 1.0,
          "norm_mode": "tokens", "seed": 0}


def cosine(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    return dot / (na * nb)


def sas(src_entities, tgt_entities, tgt_len, beta):
    sset, tset = set(src_entities), set(tgt_entities)
    overlap = len(sset & tset)
    precision = overlap / len(tset) if tset else 0.0
    recall = overlap / len(sset) if sset else 0.0
    b2 = beta * beta
    denom = b2 * precision + recall
    f = (1 + b2) * precision * recall / denom if denom != 0.0 else 0.0
    return f / max(tgt_len, 1)


def main():
    for name, rows, style in (("src", SRC, "neg"), ("tgt", TGT, "pos")):
        with open(HERE / f"input/{name}.jsonl", "w") as f:
            for sid, text, entities, _ in rows:
                f.write(json.dumps({
                    "id": sid, "style": style, "text": text,
                    "tokens": text.split(), "entities": entities,
                }) + "\n")
    with open(HERE / "input/embeddings.jsonl", "w") as f:
        for sid, _, _, vec in SRC + TGT:
            f.write(json.dumps({"id": sid, "vector": vec}) + "\n")
    with open(HERE / "input/params.json", "w") as f:
        json.dump(PARAMS, f, indent=1)

    groups = []
    dropped = 0
    for sid, _, src_entities, src_vec in SRC:
        scored = []
        for tid, text, tgt_entities, tgt_vec in TGT:
            scored.append((tid, cosine(src_vec, tgt_vec), tgt_entities, len(text.split())))
        scored.sort(key=lambda row: (-row[1], row[0]))
        top = scored[:PARAMS["k"]]
        candidates = []
        for tid, cos, tgt_entities, tgt_len in top:
            score = sas(src_entities, tgt_entities, tgt_len, PARAMS["beta"])
            if score >= PARAMS["p"]:
                candidates.append({"target_id": tid, "cosine": cos, "sas": score})
        if not candidates:
            dropped += 1
            continue
        expert = sorted(candidates,
                        key=lambda c: (-c["sas"], -c["cosine"], c["target_id"]))[0]
        groups.append({
            "source_id": sid,
            "candidates": candidates,
            "expert_id": expert["target_id"],
            "amateur_ids": [c["target_id"] for c in candidates
                            if c["target_id"] != expert["target_id"]],
        })
    groups.sort(key=lambda g: g["source_id"])

    with open(HERE / "expected/groups.jsonl", "w") as f:
        for g in groups:
            f.write(json.dumps(g) + "\n")
    with open(HERE / "expected/dropped.json", "w") as f:
        json.dump({"dropped_sources": dropped}, f)
    print(f"wrote {len(groups)} groups, dropped {dropped}")


if __name__ == "__main__":
    main()
