#!/usr/bin/env python3
"""Constructed corpus whose evaluation prints a fixed reference row.

100 records, each with a 5-token candidate and one 5-token reference, built
from overlap templates so the corpus-aggregated clipped matches come out to
exactly m = (350, 170, 51, 14) over totals (500, 400, 300, 200):

    template A  ref = candidate              -> (5, 4, 3, 2)   x 5
    template E  ref = [a b c d *]            -> (4, 3, 2, 1)   x 4
    template F  ref = [a b c * e]            -> (4, 2, 1, 0)   x 28
    template D  ref = [a b * d e]            -> (4, 2, 0, 0)   x 41
    template C  ref = reversed candidate     -> (5, 0, 0, 0)   x 6
    template C1 ref = [a * * * *]            -> (1, 0, 0, 0)   x 3
    template B  ref = fresh tokens           -> (0, 0, 0, 0)   x 13

Candidate and reference totals are both 500 tokens, so the brevity penalty
is 1 and BLEU-n = m_n / T_n = (0.7, 0.425, 0.17, 0.07), averaging 0.34125
(prints 34.1). 97 of 100 records are labeled correct, ACC = 0.97 (prints
97.0), and GM = sqrt(0.97 * 0.34125) = 0.57534 (prints 57.5) - the
reference row this fixture pins down. The expected report is computed by the same
standalone scorer as the eval_20 fixture.
"""

import json
import math
from collections import Counter
from pathlib import Path

HERE = Path(__file__).parent
MAX_N = 4

TEMPLATES = (
    ("A", 5), ("E", 4), ("F", 28), ("D", 41), ("C", 6), ("C1", 3), ("B", 13),
)


def build_records():
    records = []
    r = 0
    for template, count in TEMPLATES:
        for _ in range(count):
            cand = [f"c{r}t{j}" for j in range(5)]
            fresh = [f"f{r}t{j}" for j in range(5)]
            if template == "A":
                ref = list(cand)
            elif template == "E":
                ref = [cand[0], cand[1], cand[2], cand[3], fresh[0]]
            elif template == "F":
                ref = [cand[0], cand[1], cand[2], fresh[0], cand[4]]
            elif template == "D":
                ref = [cand[0], cand[1], fresh[0], cand[3], cand[4]]
            elif template == "C":
                ref = list(reversed(cand))
            elif template == "C1":
                ref = [cand[0]] + fresh[:4]
            else:
                ref = fresh
            records.append({
                "source": [f"s{r}a", f"s{r}b"],
                "candidate": cand,
                "references": [ref],
                "style_correct": r < 97,
            })
            r += 1
    return records


def ngrams(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def score(records):
    matched = [0] * MAX_N
    total = [0] * MAX_N
    c_len = r_len = 0
    for rec in records:
        cand, refs = rec["candidate"], rec["references"]
        c_len += len(cand)
        r_len += min((len(x) for x in refs),
                     key=lambda rl: (abs(rl - len(cand)), rl))
        for n in range(1, MAX_N + 1):
            cand_counts = Counter(ngrams(cand, n))
            max_ref = Counter()
            for x in refs:
                for gram, count in Counter(ngrams(x, n)).items():
                    max_ref[gram] = max(max_ref[gram], count)
            matched[n - 1] += sum(min(c, max_ref[g]) for g, c in cand_counts.items())
            total[n - 1] += max(len(cand) - n + 1, 0)
    bp = 1.0 if c_len >= r_len else math.exp(1.0 - r_len / c_len)
    bleu_n = [bp * m / t if m > 0 and t > 0 else 0.0 for m, t in zip(matched, total)]
    valid = [n for n in range(MAX_N) if total[n] > 0]
    bleu_avg = sum(bleu_n[n] for n in valid) / len(valid)

    def i_pinc(source, candidate, references):
        src = {t.lower() for t in source}
        strip = lambda toks: [t.lower() for t in toks if t.lower() not in src]
        cand = strip(candidate)
        if not cand:
            return 0.0
        acc = 0.0
        valid_n = 0
        for n in range(1, MAX_N + 1):
            cand_set = set(ngrams(cand, n))
            best = None
            for x in references:
                ref_set = set(ngrams(strip(x), n))
                if not ref_set:
                    continue
                ratio = len(ref_set & cand_set) / len(ref_set)
                best = ratio if best is None else max(best, ratio)
            if best is not None:
                acc += best
                valid_n += 1
        return acc / valid_n if valid_n else 0.0

    pincs = [i_pinc(r["source"], r["candidate"], r["references"]) for r in records]
    acc = sum(1 for r in records if r["style_correct"]) / len(records)
    assert matched == [350, 170, 51, 14], matched
    assert total == [500, 400, 300, 200], total
    assert round(acc * 100, 1) == 97.0
    assert round(bleu_avg * 100, 1) == 34.1
    assert round(math.sqrt(acc * bleu_avg) * 100, 1) == 57.5
    return {
        "bleu_n": bleu_n,
        "bleu_avg": bleu_avg,
        "i_pinc": sum(pincs) / len(pincs),
        "acc": acc,
        "gm": math.sqrt(acc * bleu_avg),
        "count": len(records),
    }


def main():
    records = build_records()
    with open(HERE / "input/records.jsonl", "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")
    report = score(records)
    with open(HERE / "expected/report.json", "w") as f:
        json.dump(report, f, indent=1)
    print(json.dumps(report, indent=1))


if __name__ == "__main__":
    main()
