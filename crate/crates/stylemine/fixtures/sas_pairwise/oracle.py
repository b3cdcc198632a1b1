#!/usr/bin/env python3
"""Direct-formula oracle for the scene alignment score.

Generates random entity-profile pairs across beta values and norm modes,
then evaluates the score straight from its definition:

    overlap   = |set(src) & set(tgt)|
    precision = overlap / |set(tgt)|          (0 if the target set is empty)
    recall    = overlap / |set(src)|          (0 if the source set is empty)
    f_beta    = (1 + b^2) P R / (b^2 P + R)   (0 if the denominator is 0)
    sas       = f_beta / norm_len

norm_len is the target token count (mode "tokens"), the target entity count
(mode "entities"), or 1 (mode "none"); empty denominators clamp to 1.
"""

import json
import random
from pathlib import Path

HERE = Path(__file__).parent
ALPHABET = [f"e{i}" for i in range(10)]


def sas_case(src, tgt, tgt_len, beta, norm_mode):
    sset, tset = set(src), set(tgt)
    overlap = len(sset & tset)
    precision = overlap / len(tset) if tset else 0.0
    recall = overlap / len(sset) if sset else 0.0
    b2 = beta * beta
    denom = b2 * precision + recall
    f_beta = (1 + b2) * precision * recall / denom if denom != 0.0 else 0.0
    if norm_mode == "tokens":
        norm_len = max(tgt_len, 1)
    elif norm_mode == "entities":
        norm_len = max(len(tset), 1)
    else:
        norm_len = 1
    return {
        "overlap": overlap,
        "precision": precision,
        "recall": recall,
        "f_beta": f_beta,
        "norm_len": norm_len,
        "sas": f_beta / norm_len,
    }


def distinct_sample(rng, n):
    return rng.sample(ALPHABET, n)


def main():
    rng = random.Random(20240917)
    cases = []
    # Degenerate corners first.
    cases.append({"src_entities": [], "tgt_entities": [], "tgt_len": 5,
                  "beta": 1.0, "norm_mode": "tokens"})
    cases.append({"src_entities": ["e1"], "tgt_entities": [], "tgt_len": 5,
                  "beta": 2.0, "norm_mode": "entities"})
    cases.append({"src_entities": [], "tgt_entities": ["e1", "e2"], "tgt_len": 3,
                  "beta": 0.5, "norm_mode": "none"})
    cases.append({"src_entities": ["e0"], "tgt_entities": ["e1"], "tgt_len": 4,
                  "beta": 1.0, "norm_mode": "tokens"})
    for beta in (0.5, 1.0, 2.0):
        for norm_mode in ("tokens", "entities", "none"):
            for _ in range(8):
                cases.append({
                    "src_entities": distinct_sample(rng, rng.randint(1, 6)),
                    "tgt_entities": distinct_sample(rng, rng.randint(1, 6)),
                    "tgt_len": rng.randint(1, 12),
                    "beta": beta,
                    "norm_mode": norm_mode,
                })

    with open(HERE / "input/cases.jsonl", "w") as f:
        for c in cases:
            f.write(json.dumps(c) + "\n")
    with open(HERE / "expected/expected.jsonl", "w") as f:
        for c in cases:
            out = sas_case(c["src_entities"], c["tgt_entities"], c["tgt_len"],
                           c["beta"], c["norm_mode"])
            f.write(json.dumps(out) + "\n")
    print(f"wrote {len(cases)} cases")


if __name__ == "__main__":
    main()
