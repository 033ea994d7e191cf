"""Scalarisation gap of d=2 dyads for n from 1e4 to 1e6, 100 realizations."""
import sys

from pda.cli import dispatch

if __name__ == "__main__":
    base = ["gap", "--d", "2", "--n-grid", "10000,31623,100000,316228,1000000", "--realizations", "100",
            "--seed", "3", "--out", "results/gap_n"]
    sys.exit(dispatch(base + sys.argv[1:]))
