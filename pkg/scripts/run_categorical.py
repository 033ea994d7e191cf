"""Grouped categorical experiment: K=6, 400/400 samples, 600 weights, 20 runs.

Extra arguments are passed through, e.g. ``--runs 100``.
"""
import sys

from pda.cli import dispatch

if __name__ == "__main__":
    base = ["simulate-categorical", "--K", "6", "--runs", "20", "--weights", "600", "--seed", "2013",
            "--out", "results/categorical"]
    sys.exit(dispatch(base + sys.argv[1:]))
