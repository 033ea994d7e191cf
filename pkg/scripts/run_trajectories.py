"""Speed/shape trajectory experiment on the synthetic scene, 20 runs.

For recorded data use ``pda trajectories --input tracks.csv --labels labels.csv``.
"""
import sys

from pda.cli import dispatch

if __name__ == "__main__":
    base = ["trajectories", "--synthetic", "--runs", "20", "--seed", "11", "--out", "results/trajectories"]
    sys.exit(dispatch(base + sys.argv[1:]))
