#!/usr/bin/env python3
"""Exhaustive-enumeration oracle for the 0/1 knapsack.

Every instance has n <= 15 items, so all 2^n subsets are scanned. The best
subset maximizes total value; ties prefer lower total weight, then the
lexicographically smallest index list.
"""

import json
import random
from pathlib import Path

HERE = Path(__file__).parent


def enumerate_best(values, weights, budget):
    n = len(values)
    best = None  # (-value, weight, indices)
    for mask in range(1 << n):
        v = w = 0
        idx = []
        for i in range(n):
            if mask >> i & 1:
                v += values[i]
                w += weights[i]
                idx.append(i)
        if w > budget:
            continue
        key = (-v, w, idx)
        if best is None or key < best:
            best = key
    return {"selected": best[2], "total_value": -best[0], "total_weight": best[1]}


def main():
    rng = random.Random(424242)
    instances = [
        {"values": [3, 4, 5], "weights": [2, 3, 4], "budget": 5},
        {"values": [7], "weights": [3], "budget": 0},
        {"values": [9], "weights": [10], "budget": 4},
        {"values": [5, 5], "weights": [3, 2], "budget": 3},
        {"values": [5, 5], "weights": [2, 2], "budget": 2},
        {"values": [4, 0, 0], "weights": [2, 1, 1], "budget": 5},
    ]
    for _ in range(19):
        n = rng.randint(1, 15)
        weights = [rng.randint(1, 50) for _ in range(n)]
        values = [rng.randint(0, 50) for _ in range(n)]
        budget = rng.randint(0, sum(weights))
        instances.append({"values": values, "weights": weights, "budget": budget})

    with open(HERE / "input/instances.jsonl", "w") as f:
        for inst in instances:
            f.write(json.dumps(inst) + "\n")
    with open(HERE / "expected/expected.jsonl", "w") as f:
        for inst in instances:
            f.write(json.dumps(enumerate_best(**inst)) + "\n")
    print(f"wrote {len(instances)} instances")


if __name__ == "__main__":
    main()
