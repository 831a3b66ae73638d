#!/usr/bin/env python3
"""Checks identifier-heuristic thresholds against data/identifier_labels.csv.

Recomputes every feature independently of the C++ engine, reports the
confusion matrix for the given thresholds, and grid-searches the thresholds
to show which settings make the fewest mistakes on the labeled set.

  python3 tools/calibrate_identifier.py [--labels FILE] [--min-length 8] ...
"""

import argparse
import collections
import csv
import itertools
import math
import pathlib


def entropy(value):
    if len(value) <= 1:
        return 0.0
    counts = collections.Counter(value.encode())
    n = len(value)
    return -sum(c / n * math.log2(c / n) for c in counts.values())


def score(value, lifespan_days, p):
    if len(value) < 4:
        return 0.0
    s = 0.0
    if len(value) >= p["min_length"]:
        s += p["weight_length"]
    if entropy(value) >= p["min_entropy"]:
        s += p["weight_entropy"]
    if lifespan_days is not None and lifespan_days >= p["min_lifespan_days"]:
        s += p["weight_lifespan"]
    return min(s, 1.0)


def load(path):
    rows = []
    with open(path, newline="") as f:
        for r in csv.DictReader(f):
            days = r["lifespan_days"]
            rows.append((r["name"], r["value"], int(days) if days else None,
                         r["label"] == "identifier"))
    return rows


def confusion(rows, p):
    out = collections.Counter()
    mistakes = []
    for name, value, days, truth in rows:
        predicted = score(value, days, p) >= p["threshold"]
        out[(truth, predicted)] += 1
        if truth != predicted:
            mistakes.append(name)
    return out, mistakes


def main():
    ap = argparse.ArgumentParser()
    root = pathlib.Path(__file__).resolve().parent.parent
    ap.add_argument("--labels", default=root / "data" / "identifier_labels.csv")
    ap.add_argument("--min-length", type=int, default=8)
    ap.add_argument("--min-entropy", type=float, default=2.5)
    ap.add_argument("--min-lifespan-days", type=int, default=30)
    ap.add_argument("--threshold", type=float, default=0.5)
    args = ap.parse_args()
    rows = load(args.labels)
    params = {"min_length": args.min_length, "min_entropy": args.min_entropy,
              "min_lifespan_days": args.min_lifespan_days, "threshold": args.threshold,
              "weight_length": 0.3, "weight_entropy": 0.4, "weight_lifespan": 0.3}
    c, mistakes = confusion(rows, params)
    print(f"labels: {len(rows)}  tp={c[(True, True)]} fn={c[(True, False)]} "
          f"fp={c[(False, True)]} tn={c[(False, False)]}")
    print("misclassified:", ", ".join(mistakes) or "none")

    best = []
    for ml, me, md, th in itertools.product([6, 8, 10, 12], [2.0, 2.5, 3.0, 3.5],
                                            [7, 30, 90], [0.5, 0.6, 0.7]):
        p = dict(params, min_length=ml, min_entropy=me, min_lifespan_days=md, threshold=th)
        _, m = confusion(rows, p)
        best.append((len(m), ml, me, md, th))
    best.sort()
    print("fewest mistakes (errors, min_length, min_entropy, min_lifespan_days, threshold):")
    for b in best[:5]:
        print("  ", b)
    # Defaults are acceptable when no grid setting does strictly better.
    return 0 if len(mistakes) <= best[0][0] else 1


if __name__ == "__main__":
    raise SystemExit(main())
