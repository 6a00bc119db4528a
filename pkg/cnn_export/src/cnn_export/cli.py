"""Standalone exporter: manifest in, FVB1 embeddings out."""

from __future__ import annotations

import argparse
import sys

from .export import ConfigError, ExportConfig, ImageError, export_features
from .fvb import ManifestError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cnn-export", description=__doc__)
    parser.add_argument("--manifest", required=True, help="dataset manifest CSV")
    parser.add_argument("--out", required=True, help="output FVB1 feature file")
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument(
        "--model",
        default="googlenet",
        help="extractor id: googlenet (1024-d, needs local weights) or stub-<dim>",
    )
    parser.add_argument(
        "--on-error",
        choices=("abort", "skip"),
        default="abort",
        help="unreadable images abort the export or are logged and dropped",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = ExportConfig(
        manifest=args.manifest,
        out=args.out,
        model=args.model,
        batch=args.batch,
        on_error=args.on_error,
    )
    try:
        count = export_features(cfg)
    except (ConfigError, ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ImageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"exported {count} rows -> {args.out}")
    return 0


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
