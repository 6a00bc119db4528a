#!/usr/bin/env python3
"""End-to-end benchmark on synthetic Gaussian blobs.

Generates two unit-covariance blobs in `--dim` dimensions with means at
+/- (separation/2) on every axis, runs the full pipeline (standardize,
PCA, grid search, final SVM) with the default grids, and prints the
test-split metrics plus timing. Artifacts (features, manifest, model,
search CSV, report) land in --out-dir for inspection with the CLI.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from fooddetect.cli import main as cli_main
from fooddetect.tensorio import (
    DatasetManifest,
    FeatureMatrix,
    ManifestEntry,
    write_feature_file,
    write_manifest,
)


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="benchmark_out")
    parser.add_argument("--dim", type=int, default=50)
    parser.add_argument("--train", type=int, default=600)
    parser.add_argument("--test", type=int, default=200)
    parser.add_argument("--separation", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=20240717)
    parser.add_argument("--grid-c", default="1e-4:1e2:14")
    parser.add_argument("--grid-gamma", default="1e-8:1e-2:14")
    parser.add_argument("--no-pca", action="store_true")
    return parser.parse_args()


def build_dataset(args, out_dir: Path):
    rng = np.random.default_rng(args.seed)
    shift = (args.separation / 2.0) * np.ones(args.dim)

    def blob(n):
        pos = rng.normal(size=(n // 2, args.dim)) + shift
        neg = rng.normal(size=(n - n // 2, args.dim)) - shift
        labels = np.concatenate([np.ones(n // 2), -np.ones(n - n // 2)])
        return np.vstack([pos, neg]), labels

    x_train, y_train = blob(args.train)
    x_test, y_test = blob(args.test)
    values = np.vstack([x_train, x_test])
    labels = np.concatenate([y_train, y_test])
    ids = tuple(f"s{i:05d}" for i in range(values.shape[0]))
    write_feature_file(FeatureMatrix(values=values, ids=ids), out_dir / "features.fvb")
    entries = tuple(
        ManifestEntry(
            ids[i],
            "synthetic",
            "food" if labels[i] > 0 else "nonfood",
            "train" if i < args.train else "test",
        )
        for i in range(values.shape[0])
    )
    write_manifest(DatasetManifest(entries), out_dir / "manifest.csv")


def run():
    args = parse_args()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    build_dataset(args, out_dir)

    fit_args = [
        "fit",
        "--features", str(out_dir / "features.fvb"),
        "--manifest", str(out_dir / "manifest.csv"),
        "--out-model", str(out_dir / "model.txt"),
        "--search-csv", str(out_dir / "search.csv"),
        "--grid-c", args.grid_c,
        "--grid-gamma", args.grid_gamma,
        "--seed", str(args.seed),
    ]
    if args.no_pca:
        fit_args.append("--no-pca")
    start = time.perf_counter()
    code = cli_main(fit_args)
    elapsed = time.perf_counter() - start
    if code != 0:
        raise SystemExit(code)
    print(f"fit wall time: {elapsed:.1f}s")
    code = cli_main(
        [
            "evaluate",
            "--model", str(out_dir / "model.txt"),
            "--features", str(out_dir / "features.fvb"),
            "--manifest", str(out_dir / "manifest.csv"),
            "--split", "test",
            "--out-prefix", str(out_dir / "test_report"),
        ]
    )
    raise SystemExit(code)


if __name__ == "__main__":
    run()
