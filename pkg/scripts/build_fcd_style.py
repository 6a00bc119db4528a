#!/usr/bin/env python3
"""Curate a dataset manifest by per-category color-histogram diversity.

Reads a manifest of PPM images, groups entries by category (the parent
directory of each path), scores every image by the squared distance of
its color histogram to its category's mean histogram, and writes a new
manifest keeping only the `--keep` most diverse images per category
(250 by default, the whole category when it is smaller).
"""

import argparse
import os
from pathlib import Path

from fooddetect.histfeat import color_histogram, load_image, select_by_variance
from fooddetect.tensorio import DatasetManifest, read_manifest, write_manifest


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("manifest_in")
    parser.add_argument("manifest_out")
    parser.add_argument("--keep", type=int, default=250, help="images kept per category")
    parser.add_argument("--bins", type=int, default=8)
    return parser.parse_args()


def run():
    args = parse_args()
    manifest = read_manifest(args.manifest_in)
    base = Path(args.manifest_in).resolve().parent

    categories = {}
    for entry in manifest.entries:
        category = os.path.dirname(entry.path) or "."
        categories.setdefault(category, []).append(entry)

    kept_ids = set()
    for category, entries in sorted(categories.items()):
        scored = []
        for entry in entries:
            path = entry.path if os.path.isabs(entry.path) else str(base / entry.path)
            hist = color_histogram(load_image(path), bins=args.bins)
            scored.append((entry.id, hist))
        chosen = select_by_variance(scored, args.keep)
        kept_ids.update(chosen)
        print(f"{category}: kept {len(chosen)} of {len(entries)}")

    filtered = DatasetManifest(
        tuple(e for e in manifest.entries if e.id in kept_ids)
    )
    write_manifest(filtered, args.manifest_out)
    print(f"wrote {len(filtered)} entries -> {args.manifest_out}")


if __name__ == "__main__":
    run()
