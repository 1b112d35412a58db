#!/usr/bin/env python3
"""Silhouette score of root-operator classes in exported problem vectors.

usage: silhouette.py EMB.json [EMB.json ...]

Each file is the output of `amwp export-emb`. Prints one score per file,
plus an optional 2-D t-SNE projection with --tsne OUT.png.
"""

import argparse
import json

import numpy as np
from sklearn.metrics import silhouette_score


def load(path):
    with open(path) as f:
        rows = json.load(f)
    x = np.array([r["problem_vec"] for r in rows], dtype=float)
    y = np.array([r["root_operator"] for r in rows])
    return x, y


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("files", nargs="+")
    ap.add_argument("--tsne", help="write a t-SNE scatter of the first file here")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for path in args.files:
        x, y = load(path)
        print(f"{path}\t{silhouette_score(x, y):.4f}")

    if args.tsne:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        from sklearn.manifold import TSNE

        x, y = load(args.files[0])
        z = TSNE(n_components=2, random_state=args.seed, perplexity=min(30, len(x) - 1)).fit_transform(x)
        for op in sorted(set(y)):
            m = y == op
            plt.scatter(z[m, 0], z[m, 1], s=10, label=op)
        plt.legend()
        plt.savefig(args.tsne, dpi=150)


if __name__ == "__main__":
    main()
