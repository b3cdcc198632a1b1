#!/usr/bin/env python3
"""Direct-formula oracle for the geometric mean of accuracy and BLEU.

The first two rows are fixed reference points: (0.970, 0.341) must
round to 57.5 and (0.856, 0.212) to 42.6 on the x100 scale.
"""

import json
import math
from pathlib import Path

HERE = Path(__file__).parent

CASES = [
    {"acc": 0.970, "bleu": 0.341},
    {"acc": 0.856, "bleu": 0.212},
    {"acc": 0.0, "bleu": 0.9},
    {"acc": 1.0, "bleu": 1.0},
    {"acc": 0.42, "bleu": 0.42},
    {"acc": 0.731, "bleu": 0.298},
]


def main():
    with open(HERE / "input/cases.jsonl", "w") as f:
        for c in CASES:
            f.write(json.dumps(c) + "\n")
    with open(HERE / "expected/expected.jsonl", "w") as f:
        for c in CASES:
            f.write(json.dumps({"gm": math.sqrt(c["acc"] * c["bleu"])}) + "\n")
    print(f"wrote {len(CASES)} cases")


if __name__ == "__main__":
    main()
