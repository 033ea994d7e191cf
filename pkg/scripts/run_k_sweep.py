"""PDA against best-weight LOF for K = 2..8, five runs each."""
import sys

from pda.cli import dispatch

if __name__ == "__main__":
    base = ["simulate-categorical", "--K-list", "2,3,4,5,6,7,8", "--runs", "5", "--seed", "7",
            "--out", "results/k_sweep"]
    sys.exit(dispatch(base + sys.argv[1:]))
