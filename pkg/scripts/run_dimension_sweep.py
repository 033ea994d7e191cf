"""Normalised gap for the 100,128 dyads of 448 points, d = 2..5."""
import sys

from pda.cli import dispatch

if __name__ == "__main__":
    base = ["gap", "--d-list", "2,3,4,5", "--sweep-N", "448", "--realizations", "200", "--seed", "4",
            "--out", "results/gap_dimension"]
    sys.exit(dispatch(base + sys.argv[1:]))
