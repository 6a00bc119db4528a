"""Command-line front end: split, extract, fit, evaluate, predict, report.

Exit codes are a stable scripting contract: 0 success, 1 validation or
contract error, 2 I/O or corruption.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import os
import sys

import numpy as np

from . import histfeat, metrics, modelsearch, pipeline, splits, tensorio
from .errors import PipelineError, ValidationError
from .svm import SvmSettings


class _Parser(argparse.ArgumentParser):
    # route usage errors through the exit-code contract (1, not argparse's 2)
    def error(self, message):
        raise ValidationError(message)


def _parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"grid range must be lo:hi:n, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValidationError(f"grid range must be lo:hi:n, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fooddetect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="assign train/val/test splits to a manifest")
    p.add_argument("manifest_in")
    p.add_argument("manifest_out")
    p.add_argument("--protocol", choices=splits.PROTOCOLS, default="fcd")
    p.add_argument("--test-frac", type=float, default=0.2)
    p.add_argument("--val-frac", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=modelsearch.DEFAULT_SEED)
    p.add_argument("--force", action="store_true", help="reassign existing splits")

    p = sub.add_parser("extract", help="histogram features for every manifest image")
    p.add_argument("manifest")
    p.add_argument("out_features")
    p.add_argument("--bins", type=int, default=histfeat.DEFAULT_BINS)

    p = sub.add_parser("fit", help="grid-search and train the full pipeline")
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-model", required=True)
    p.add_argument("--search-csv", default=None)
    p.add_argument("--seed", type=int, default=modelsearch.DEFAULT_SEED)
    p.add_argument("--grid-c", default="1e-4:1e2:14", metavar="LO:HI:N")
    p.add_argument("--grid-gamma", default="1e-8:1e-2:14", metavar="LO:HI:N")
    p.add_argument("--folds", type=int, default=modelsearch.DEFAULT_FOLDS)
    p.add_argument("--coef0", type=float, default=0.0)
    p.add_argument("--no-pca", action="store_true", help="skip the PCA stage")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-iter", type=int, default=10_000_000)
    p.add_argument("--cache-mb", type=float, default=512.0)

    p = sub.add_parser("evaluate", help="score a model on one manifest split")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", choices=tensorio.SPLITS, default="test")
    p.add_argument("--out-prefix", default=None, help="write CSV and id lists here")

    p = sub.add_parser("predict", help="label rows of a feature file")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="pretty-print a search or evaluation CSV")
    p.add_argument("csv_path")

    return parser


def cmd_split(args) -> int:
    man = tensorio.read_manifest(args.manifest_in)
    spec = splits.SplitSpec(
        protocol=args.protocol,
        test_fraction=args.test_frac,
        val_fraction=args.val_frac,
        seed=args.seed,
    )
    out = splits.assign_splits(man, spec, force=args.force)
    tensorio.write_manifest(out, args.manifest_out)
    counts = {"train": 0, "val": 0, "test": 0}
    for e in out.entries:
        counts[e.split] += 1
    print(
        f"split {len(out)} samples: train={counts['train']} "
        f"val={counts['val']} test={counts['test']}"
    )
    return 0


def cmd_extract(args) -> int:
    man = tensorio.read_manifest(args.manifest)
    base = os.path.dirname(os.path.abspath(args.manifest))
    rows = []
    for e in man.entries:
        path = e.path if os.path.isabs(e.path) else os.path.join(base, e.path)
        img = histfeat.load_image(path)
        rows.append(histfeat.histogram_features(img, bins=args.bins))
    values = np.stack(rows) if rows else np.empty((0, args.bins**3))
    fm = tensorio.FeatureMatrix(values=values, ids=man.ids())
    tensorio.write_feature_file(fm, args.out_features)
    print(f"extracted {fm.n} rows of dimension {fm.d} -> {args.out_features}")
    return 0


def cmd_fit(args) -> int:
    features = tensorio.read_feature_file(args.features)
    manifest = tensorio.read_manifest(args.manifest)
    with open(args.manifest, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    c_lo, c_hi, c_n = _parse_range(args.grid_c)
    g_lo, g_hi, g_n = _parse_range(args.grid_gamma)
    grid = modelsearch.SearchGrid(
        modelsearch.log_grid(c_lo, c_hi, c_n), modelsearch.log_grid(g_lo, g_hi, g_n)
    )
    settings = SvmSettings(
        tol=args.tol, max_iter=args.max_iter, coef0=args.coef0, cache_mb=args.cache_mb
    )
    model, result = pipeline.fit_pipeline(
        features,
        manifest,
        grid,
        seed=args.seed,
        settings=settings,
        use_pca=not args.no_pca,
        folds_k=args.folds,
        grid_c_spec=args.grid_c,
        grid_gamma_spec=args.grid_gamma,
        manifest_digest=digest,
    )
    pipeline.save_model(model, args.out_model)
    if args.search_csv:
        modelsearch.write_search_csv(result, args.search_csv)
    k_note = f"k={model.pca.k}" if model.pca is not None else "pca=off"
    print(
        f"fit complete: {k_note} best_c={result.best_c:.17g} "
        f"best_gamma={result.best_gamma:.17g} -> {args.out_model}"
    )
    if not model.svm.meta.converged:
        print("warning: final SVM hit the iteration cap before converging")
    return 0


def cmd_evaluate(args) -> int:
    model = pipeline.load_model(args.model)
    features = tensorio.read_feature_file(args.features)
    manifest = tensorio.read_manifest(args.manifest)
    report = pipeline.evaluate_pipeline(model, features, manifest, args.split)
    c = report.confusion
    print(
        f"{args.split}: n={c.total} acc={metrics.format_percent(report.acc)} "
        f"tpr={metrics.format_percent(report.tpr)} tnr={metrics.format_percent(report.tnr)}"
    )
    if args.out_prefix:
        with open(args.out_prefix + ".csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(metrics.report_csv_lines(report)) + "\n")
        with open(args.out_prefix + ".fp_ids.txt", "w", encoding="utf-8", newline="") as fh:
            fh.writelines(f"{sample_id}\n" for sample_id in report.fp_ids)
        with open(args.out_prefix + ".fn_ids.txt", "w", encoding="utf-8", newline="") as fh:
            fh.writelines(f"{sample_id}\n" for sample_id in report.fn_ids)
    return 0


def cmd_predict(args) -> int:
    model = pipeline.load_model(args.model)
    features = tensorio.read_feature_file(args.features)
    rows = pipeline.predict_pipeline(model, features)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label", "decision_value"])
        for sample_id, label, dec in rows:
            writer.writerow([sample_id, label, format(dec, ".17g")])
    print(f"predicted {len(rows)} rows -> {args.out}")
    return 0


def cmd_report(args) -> int:
    with open(args.csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{args.csv_path}: empty CSV") from None
        rows = list(reader)
    if header == ["c", "gamma", "fold", "accuracy"]:
        _report_search(rows)
    elif header == ["metric", "value"]:
        _report_eval(rows)
    else:
        raise ValidationError(
            f"{args.csv_path}: unrecognized header {header}; expected a search "
            "CSV (c,gamma,fold,accuracy) or an evaluation CSV (metric,value)"
        )
    return 0


def _report_search(rows: list[list[str]]) -> None:
    cells: dict[tuple[str, str], list[float]] = {}
    best = None
    for c, gamma, fold, acc in rows:
        if fold == "best":
            best = (c, gamma, float(acc))
        else:
            cells.setdefault((c, gamma), []).append(float(acc))
    print(f"{len(cells)} cells searched")
    ranked = sorted(
        cells.items(), key=lambda kv: (-(sum(kv[1]) / len(kv[1])), float(kv[0][0]), float(kv[0][1]))
    )
    print("top cells by mean CV accuracy:")
    for (c, gamma), accs in ranked[:5]:
        mean = sum(accs) / len(accs)
        print(f"  C={float(c):g} gamma={float(gamma):g} mean={100*mean:.2f}%")
    if best is not None:
        print(f"selected: C={float(best[0]):g} gamma={float(best[1]):g} mean={100*best[2]:.2f}%")


def _report_eval(rows: list[list[str]]) -> None:
    values = dict(rows)
    for key in ("tp", "fp", "tn", "fn"):
        if key in values:
            print(f"{key}: {values[key]}")
    for key in ("acc", "tpr", "tnr"):
        if key in values:
            v = values[key]
            shown = "undefined" if v == "undefined" else f"{100*float(v):.2f}%"
            print(f"{key}: {shown}")


_COMMANDS = {
    "split": cmd_split,
    "extract": cmd_extract,
    "fit": cmd_fit,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
