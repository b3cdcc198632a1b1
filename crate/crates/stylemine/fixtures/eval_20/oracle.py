#!/usr/bin/env python3
"""Standalone reference scorer for the evaluation report.

Implements the metric definitions directly over 20 generated records:

BLEU-n (n = 1..4): corpus-aggregated clipped n-gram matches over totals,
max-reference clipping, brevity penalty exp(1 - r/c) when c < r with r the
closest reference length (ties to the shorter), no smoothing; levels with no
candidate n-grams anywhere are excluded from the headline mean.

i-PINC: lowercase everything, drop tokens shared with the source from the
candidate and references, then for each n with surviving reference n-grams
take the best reference's covered fraction of distinct n-grams; average the
valid n, 0 when nothing survives.

ACC = fraction of records labeled correct; GM = sqrt(ACC * BLEU).
"""

import json
import math
import random
from collections import Counter
from pathlib import Path

HERE = Path(__file__).parent
MAX_N = 4


def ngrams(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def bleu_corpus(records):
    matched = [0] * MAX_N
    total = [0] * MAX_N
    c_len = 0
    r_len = 0
    for rec in records:
        cand = rec["candidate"]
        refs = rec["references"]
        c_len += len(cand)
        r_len += min((len(r) for r in refs),
                     key=lambda rl: (abs(rl - len(cand)), rl))
        for n in range(1, MAX_N + 1):
            cand_counts = Counter(ngrams(cand, n))
            max_ref = Counter()
            for r in refs:
                for gram, count in Counter(ngrams(r, n)).items():
                    max_ref[gram] = max(max_ref[gram], count)
            matched[n - 1] += sum(min(count, max_ref[gram])
                                  for gram, count in cand_counts.items())
            total[n - 1] += max(len(cand) - n + 1, 0)
    bp = 1.0 if c_len >= r_len else math.exp(1.0 - r_len / c_len)
    bleu_n = [0.0] * MAX_N
    valid = 0
    total_score = 0.0
    for n in range(MAX_N):
        if total[n] > 0:
            if matched[n] > 0:
                bleu_n[n] = bp * matched[n] / total[n]
            valid += 1
            total_score += bleu_n[n]
    return bleu_n, total_score / valid if valid else 0.0


def i_pinc(source, candidate, references):
    src = {t.lower() for t in source}
    strip = lambda toks: [t.lower() for t in toks if t.lower() not in src]
    cand = strip(candidate)
    if not cand:
        return 0.0
    refs = [strip(r) for r in references]
    total = 0.0
    valid = 0
    for n in range(1, MAX_N + 1):
        cand_set = set(ngrams(cand, n))
        best = None
        for r in refs:
            ref_set = set(ngrams(r, n))
            if not ref_set:
                continue
            ratio = len(ref_set & cand_set) / len(ref_set)
            best = ratio if best is None else max(best, ratio)
        if best is not None:
            total += best
            valid += 1
    return total / valid if valid else 0.0


def make_records():
    rng = random.Random(97)
    vocab = [f"w{i}" for i in range(30)]
    records = []
    for i in range(20):
        source = rng.sample(vocab, rng.randint(3, 7))
        n_refs = rng.choice([1, 2, 4])
        references = []
        base = rng.sample(vocab, rng.randint(4, 9))
        for _ in range(n_refs):
            ref = list(base)
            for _ in range(rng.randint(0, 2)):
                ref[rng.randrange(len(ref))] = rng.choice(vocab)
            references.append(ref)
        candidate = list(references[0])
        for _ in range(rng.randint(0, 3)):
            candidate[rng.randrange(len(candidate))] = rng.choice(vocab)
        if rng.random() < 0.25:
            candidate = candidate[:max(2, len(candidate) - 2)]
        records.append({
            "source": source,
            "candidate": candidate,
            "references": references,
            "style_correct": rng.random() < 0.75,
        })
    return records


def main():
    records = make_records()
    with open(HERE / "input/records.jsonl", "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")

    bleu_n, bleu_avg = bleu_corpus(records)
    pincs = [i_pinc(r["source"], r["candidate"], r["references"]) for r in records]
    acc = sum(1 for r in records if r["style_correct"]) / len(records)
    report = {
        "bleu_n": bleu_n,
        "bleu_avg": bleu_avg,
        "i_pinc": sum(pincs) / len(pincs),
        "acc": acc,
        "gm": math.sqrt(acc * bleu_avg),
        "count": len(records),
    }
    with open(HERE / "expected/report.json", "w") as f:
        json.dump(report, f, indent=1)
    print(json.dumps(report, indent=1))


if __name__ == "__main__":
    main()
