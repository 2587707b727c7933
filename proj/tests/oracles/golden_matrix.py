#!/usr/bin/env python3
"""Batch-mean decision matrix from a demonstration log.

Independent of the C++ code: every trial's reward is the mean of its coverages padded to
T_max with the last value, and a cell's score is the plain mean of its rewards.

    golden_matrix.py --write demos.jsonl out.json   # produce the golden file
    golden_matrix.py --check demos.jsonl golden.json
"""
import argparse
import json
import sys
from collections import defaultdict


def batch_matrix(path, t_max=5):
    rewards = defaultdict(list)
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            k, l = rec["csst"]
            ncovs = list(rec["ncov_per_step"])
            ncovs += [ncovs[-1]] * (t_max - len(ncovs))
            rewards[(k, l)].append(sum(ncovs) / t_max)
    cells = [
        {"k": k, "l": l, "u": sum(rs) / len(rs), "M": len(rs)}
        for (k, l), rs in sorted(rewards.items())
    ]
    return {"schema_version": 1, "label": "init", "T_max": t_max, "cells": cells}


def main():
    ap = argparse.ArgumentParser()
    mode = ap.add_mutually_exclusive_group(required=True)
    mode.add_argument("--write", action="store_true")
    mode.add_argument("--check", action="store_true")
    ap.add_argument("demos")
    ap.add_argument("matrix")
    args = ap.parse_args()

    ours = batch_matrix(args.demos)
    if args.write:
        with open(args.matrix, "w") as fh:
            json.dump(ours, fh, indent=2)
            fh.write("\n")
        return 0

    with open(args.matrix) as fh:
        theirs = json.load(fh)
    ok = theirs["T_max"] == ours["T_max"] and len(theirs["cells"]) == len(ours["cells"])
    for a, b in zip(ours["cells"], theirs["cells"]):
        if (a["k"], a["l"], a["M"]) != (b["k"], b["l"], b["M"]) or abs(a["u"] - b["u"]) > 1e-12:
            print(f"mismatch at ({a['k']},{a['l']}): {a} vs {b}")
            ok = False
    print("golden matrix agrees" if ok else "golden matrix differs")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
