"""Training-time scaling of both sorters; writes one directory per sorter."""
import sys

from pda.cli import dispatch

GRIDS = {"jensen": "200,400,800,1600,3000", "deb": "40,80,160,320"}

if __name__ == "__main__":
    code = 0
    for sorter, grid in GRIDS.items():
        base = ["bench", "--sorter", sorter, "--n-grid", grid, "--k-grid", "2", "--seed", "0",
                "--out", f"results/bench_{sorter}"]
        code = code or dispatch(base + sys.argv[1:])
    sys.exit(code)
