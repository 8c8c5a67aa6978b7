#!/usr/bin/env python3
"""Plot comparison curves and selection/termination maps written by `caps`.

    plot_curves.py curves OUT_DIR/comparison.csv -o curves.png
    plot_curves.py map OUT_DIR/caps/runs/run_000/maps/episode_005000/termination_o0_beta.csv -o beta.png
"""
import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def plot_curves(path, out):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    episodes = np.array([int(r["episode"]) for r in rows])
    algs = [k[: -len("_mean")] for k in rows[0] if k.endswith("_mean")]
    fig, ax = plt.subplots(figsize=(7, 4))
    for alg in algs:
        mean = np.array([float(r[alg + "_mean"]) for r in rows])
        err = np.array([float(r[alg + "_stderr"]) for r in rows])
        ax.plot(episodes, mean, label=alg)
        ax.fill_between(episodes, mean - err, mean + err, alpha=0.25)
    ax.set_xlabel("episode")
    ax.set_ylabel("average discounted return")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def plot_map(path, out):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))[1:]
    grid = np.array([[float(v) if v else np.nan for v in r[1:]] for r in rows])
    fig, ax = plt.subplots(figsize=(5, 5))
    im = ax.imshow(np.ma.masked_invalid(grid), cmap="viridis", interpolation="nearest")
    fig.colorbar(im, ax=ax)
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("kind", choices=["curves", "map"])
    ap.add_argument("csv")
    ap.add_argument("-o", "--out", required=True)
    args = ap.parse_args()
    (plot_curves if args.kind == "curves" else plot_map)(args.csv, args.out)


if __name__ == "__main__":
    main()
