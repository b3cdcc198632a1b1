#!/usr/bin/env python3
"""Spreadsheet-style oracle for the dataset statistics report.

Generates 20 source / 15 target sentences with seeded-random entities and a
groups file of ~50 pairs, then computes every report column with plain
arithmetic: totals and means over distinct participating sentences, mean
entity overlap and mean SAS over pairs.
"""

import json
import random
from pathlib import Path

HERE = Path(__file__).parent
ENTITY_VOCAB = [f"e{i}" for i in range(12)]
FILLER = ["the", "a", "was", "and", "quite", "so", "very", "rather"]
PARAMS = {"strategy": "semb-sas", "k": 3, "p": 0.0, "beta": 1.0,
          "norm_mode": "tokens", "seed": 0}


def make_sentences(rng, style, count):
    rows = []
    for i in range(count):
        entities = rng.sample(ENTITY_VOCAB, rng.randint(1, 3))
        tokens = entities + rng.choices(FILLER, k=rng.randint(2, 7))
        rng.shuffle(tokens)
        rows.append({
            "id": f"{style}-{i}",
            "style": style,
            "text": " ".join(tokens),
            "tokens": tokens,
            "entities": entities,
        })
    return rows


def sas(src_entities, tgt_entities, tgt_len, beta):
    sset, tset = set(src_entities), set(tgt_entities)
    overlap = len(sset & tset)
    precision = overlap / len(tset) if tset else 0.0
    recall = overlap / len(sset) if sset else 0.0
    b2 = beta * beta
    denom = b2 * precision + recall
    f = (1 + b2) * precision * recall / denom if denom != 0.0 else 0.0
    return overlap, f / max(tgt_len, 1)


def main():
    rng = random.Random(1337)
    src = make_sentences(rng, "neg", 20)
    tgt = make_sentences(rng, "pos", 15)
    by_id = {r["id"]: r for r in src + tgt}

    groups = []
    for s in src:
        chosen = rng.sample(tgt, rng.randint(2, 3))
        candidates = []
        for t in chosen:
            _, score = sas(s["entities"], t["entities"], len(t["tokens"]), PARAMS["beta"])
            candidates.append({
                "target_id": t["id"],
                "cosine": round(rng.uniform(0.2, 0.99), 6),
                "sas": score,
            })
        candidates.sort(key=lambda c: (-c["cosine"], c["target_id"]))
        expert = sorted(candidates,
                        key=lambda c: (-c["sas"], -c["cosine"], c["target_id"]))[0]
        groups.append({
            "source_id": s["id"],
            "candidates": candidates,
            "expert_id": expert["target_id"],
            "amateur_ids": [c["target_id"] for c in candidates
                            if c["target_id"] != expert["target_id"]],
            "params": PARAMS,
        })

    for name, rows in (("src", src), ("tgt", tgt)):
        with open(HERE / f"input/{name}.jsonl", "w") as f:
            for r in rows:
                f.write(json.dumps(r) + "\n")
    with open(HERE / "input/groups.jsonl", "w") as f:
        for g in groups:
            f.write(json.dumps(g) + "\n")

    pair_count = 0
    overlap_sum = 0.0
    sas_sum = 0.0
    src_ids, tgt_ids = set(), set()
    for g in groups:
        src_ids.add(g["source_id"])
        s = by_id[g["source_id"]]
        for c in g["candidates"]:
            t = by_id[c["target_id"]]
            tgt_ids.add(t["id"])
            overlap, _ = sas(s["entities"], t["entities"], len(t["tokens"]), PARAMS["beta"])
            overlap_sum += overlap
            sas_sum += c["sas"]
            pair_count += 1

    def side(ids):
        n = len(ids)
        entities = sum(len(by_id[i]["entities"]) for i in ids)
        tokens = sum(len(by_id[i]["tokens"]) for i in ids)
        return {
            "distinct_sentences": n,
            "entities": entities,
            "avg_sent_len": tokens / n if n else 0.0,
            "avg_entities_per_sent": entities / n if n else 0.0,
        }

    report = {
        "pair_count": pair_count,
        "source": side(src_ids),
        "target": side(tgt_ids),
        "avg_overlap": overlap_sum / pair_count if pair_count else 0.0,
        "avg_sas": sas_sum / pair_count if pair_count else 0.0,
        "norm_mode": "tokens",
    }
    with open(HERE / "expected/stats.json", "w") as f:
        json.dump(report, f, indent=1)
    print(f"wrote {pair_count} pairs over {len(groups)} groups")


if __name__ == "__main__":
    main()
