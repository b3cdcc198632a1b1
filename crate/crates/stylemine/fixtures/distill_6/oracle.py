#!/usr/bin/env python3
"""Step-by-step simulation of the iterative distillation procedure.

Independent implementation of the selection loop over a 6-sentence article:
saliency = LCS(sentence, title + selected-so-far), cost = token count,
budget = floor(lambda * total cost), capacity per round = the running
W_distill estimate (clamped to the remaining budget; the fixture is designed
so the clamp never binds), knapsack solved by exhaustive enumeration with
the (value desc, weight asc, lex asc) tie-break. The full per-round trace is
committed alongside the final plan.
"""

import json
import math
from pathlib import Path

HERE = Path(__file__).parent

TITLE = "senate passes budget bill"
SENTENCES = [
    "senate passes budget bill today",
    "the budget bill passes",
    "critics slam the new budget",
    "weather sunny tomorrow",
    "senate debate continues today",
    "bill includes senate amendments",
]
LAMBDA = 0.5

# Lower-cased, suffix-stripped token forms of the texts above, kept explicit
# so this script shares no code with the implementation under test.
LEMMAS = {
    TITLE: ["senate", "pass", "budget", "bill"],
    SENTENCES[0]: ["senate", "pass", "budget", "bill", "today"],
    SENTENCES[1]: ["the", "budget", "bill", "pass"],
    SENTENCES[2]: ["critic", "slam", "the", "new", "budget"],
    SENTENCES[3]: ["weather", "sunny", "tomorrow"],
    SENTENCES[4]: ["senate", "debate", "continue", "today"],
    SENTENCES[5]: ["bill", "include", "senate", "amendment"],
}


def lcs(a, b):
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            table[i + 1][j + 1] = table[i][j] + 1 if x == y else max(
                table[i][j + 1], table[i + 1][j])
    return table[len(a)][len(b)]


def knapsack_enum(values, weights, budget):
    n = len(values)
    best = None
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
    return best[2], -best[0], best[1]


def main():
    with open(HERE / "input/article.json", "w") as f:
        json.dump({"title": TITLE, "sentences": SENTENCES, "lambda": LAMBDA}, f, indent=1)

    title = LEMMAS[TITLE]
    sents = [LEMMAS[s] for s in SENTENCES]
    costs = [len(s) for s in sents]
    budget = math.floor(LAMBDA * sum(costs))

    selected = []  # selection order
    selected_cost = 0
    total_value = 0
    w_distill = len(title)
    trace = []
    rounds = 0

    while w_distill <= budget:
        reference = list(title)
        for i in selected:
            reference.extend(sents[i])
        unsel = [i for i in range(len(sents)) if i not in selected]
        items = [{"sentence_id": f"s{i}", "saliency": lcs(sents[i], reference),
                  "cost": costs[i]} for i in unsel]
        capacity = min(w_distill, budget - selected_cost)
        assert capacity == w_distill, "fixture must keep the clamp inactive"
        picked_local, value, weight = knapsack_enum(
            [it["saliency"] for it in items], [it["cost"] for it in items], capacity)
        if not picked_local:
            break
        picked = [unsel[j] for j in picked_local]
        selected.extend(picked)
        selected_cost += weight
        total_value += value
        w_distill = len(title) + selected_cost
        rounds += 1
        trace.append({
            "round": rounds,
            "capacity": capacity,
            "items": items,
            "picked_ids": [f"s{i}" for i in picked],
            "selected_cost_after": selected_cost,
            "w_distill_after": w_distill,
        })

    plan = {
        "selected_ids": [f"s{i}" for i in sorted(selected)],
        "total_value": total_value,
        "total_cost": selected_cost,
        "budget": budget,
        "rounds": rounds,
    }
    with open(HERE / "expected/plan.json", "w") as f:
        json.dump(plan, f, indent=1)
    with open(HERE / "expected/trace.jsonl", "w") as f:
        for r in trace:
            f.write(json.dumps(r) + "\n")
    print(f"plan: {plan}")


if __name__ == "__main__":
    main()
