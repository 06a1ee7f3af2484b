#!/usr/bin/env python3
"""Convert a numeric matrix (one row per timestamp) into the target CSV format.

Output header is dim_0,...,dim_{D-1}, plus a trailing label column when a
label file (one 0/1 per line) is given. Loaders for specific benchmark
archives are out of scope; reshape them into a plain matrix first.
"""

import argparse
import csv
import sys


def read_matrix(path, delimiter):
    rows = []
    with open(path, newline="") as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(delimiter) if delimiter else line.split()
            try:
                rows.append([float(v) for v in fields])
            except ValueError:
                sys.exit(f"{path}:{line_no}: non-numeric field")
    if not rows:
        sys.exit(f"{path}: no rows")
    width = len(rows[0])
    for i, r in enumerate(rows, 1):
        if len(r) != width:
            sys.exit(f"{path}: row {i} has {len(r)} fields, expected {width}")
    return rows


def read_labels(path):
    with open(path) as f:
        return [int(float(v)) != 0 for v in f.read().split()]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("matrix")
    ap.add_argument("output")
    ap.add_argument("--labels")
    ap.add_argument("--delimiter", default=None, help="field separator (default: whitespace)")
    args = ap.parse_args()

    rows = read_matrix(args.matrix, args.delimiter)
    labels = read_labels(args.labels) if args.labels else None
    if labels is not None and len(labels) != len(rows):
        sys.exit(f"{len(labels)} labels for {len(rows)} rows")

    header = [f"dim_{d}" for d in range(len(rows[0]))]
    if labels is not None:
        header.append("label")
    with open(args.output, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for i, r in enumerate(rows):
            w.writerow([repr(v) for v in r] + ([int(labels[i])] if labels is not None else []))


if __name__ == "__main__":
    main()
