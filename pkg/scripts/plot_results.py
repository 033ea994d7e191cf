"""Quick-look figures from the CSVs under results/ (needs matplotlib)."""
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def main(root="results"):
    root = Path(root)
    figs = []
    if (root / "gap_n/gap_n.csv").exists():
        r = rows(root / "gap_n/gap_n.csv")
        fig, ax = plt.subplots()
        ax.errorbar([float(x["n"]) for x in r], [float(x["mean_gap"]) for x in r],
                    yerr=[float(x["se"]) for x in r], marker="o")
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("mean K_n - L_n")
        figs.append((fig, "gap_n.png"))
    if (root / "gap_dimension/gap_dimension.csv").exists():
        r = rows(root / "gap_dimension/gap_dimension.csv")
        d = [int(x["d"]) for x in r]
        fig, ax = plt.subplots()
        ax.errorbar(d, [float(x["mean_ratio"]) for x in r], yerr=[float(x["se"]) for x in r], marker="o")
        ax.plot(d, [float(x["lower_bound"]) for x in r], "k:")
        ax.plot(d, [float(x["upper_bound"]) for x in r], "k:")
        ax.set_xlabel("d")
        ax.set_ylabel("(K_n - L_n) / c_n,d")
        figs.append((fig, "gap_dimension.png"))
    for name in ("bench_jensen", "bench_deb"):
        if (root / name / "bench.csv").exists():
            r = rows(root / name / "bench.csv")
            fig, ax = plt.subplots()
            ax.loglog([int(x["N"]) for x in r], [float(x["normalized"]) for x in r], marker="o")
            ax.set_xlabel("N")
            ax.set_ylabel("normalised time")
            figs.append((fig, f"{name}.png"))
    for fig, name in figs:
        fig.savefig(root / name, dpi=120)
        print(root / name)


if __name__ == "__main__":
    main(*sys.argv[1:])
