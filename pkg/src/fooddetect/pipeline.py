"""The serialized pipeline: standardizer -> (optional PCA) -> SVM.

Model files are a sectioned text format with every number printed as a
17-significant-digit decimal (exact float64 round-trip) and a trailing
CRC32 guarding the whole body. Dimension-chain consistency is validated
at load time, not first use.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .errors import (
    CorruptionError,
    FormatError,
    ModelCompatibilityError,
    ValidationError,
    VersionError,
)
from .metrics import EvalReport, confusion
from .modelsearch import (
    SearchGrid,
    SearchResult,
    grid_search,
    stratified_kfold,
    train_final,
)
from .pca import PcaModel, fit_pca, project
from .standardize import StandardizerModel, apply_standardizer, fit_standardizer
from .svm import KernelParams, SvmModel, SvmSettings, TrainingMeta, decision_values
from .tensorio import DatasetManifest, FeatureMatrix, align

MODEL_HEADER = "fooddetect-model v1"


@dataclass(frozen=True)
class Provenance:
    seed: int
    grid_c: str
    grid_gamma: str
    best_c: float
    best_gamma: float
    manifest_digest: str


@dataclass(frozen=True)
class PipelineModel:
    standardizer: StandardizerModel
    pca: PcaModel | None
    svm: SvmModel
    provenance: Provenance

    def __post_init__(self):
        if self.pca is not None:
            if self.standardizer.d != self.pca.d:
                raise ModelCompatibilityError(
                    f"standardizer d={self.standardizer.d} vs PCA d={self.pca.d}"
                )
            expected = self.pca.k
        else:
            expected = self.standardizer.d
        if self.svm.dim != expected:
            raise ModelCompatibilityError(
                f"SVM expects dimension {self.svm.dim}, chain provides {expected}"
            )

    def transform(self, m: FeatureMatrix) -> FeatureMatrix:
        if m.d != self.standardizer.d:
            raise ModelCompatibilityError(
                f"model takes raw dimension {self.standardizer.d}, features have {m.d}"
            )
        out = apply_standardizer(self.standardizer, m)
        if self.pca is not None:
            out = project(self.pca, out)
        return out


def fit_pipeline(
    features: FeatureMatrix,
    manifest: DatasetManifest,
    grid: SearchGrid,
    seed: int,
    settings: SvmSettings = SvmSettings(),
    use_pca: bool = True,
    folds_k: int = 3,
    grid_c_spec: str = "",
    grid_gamma_spec: str = "",
    manifest_digest: str = "",
) -> tuple[PipelineModel, SearchResult]:
    """Standardize -> PCA -> grid search (k-fold CV on train) -> final retrain."""
    train_fm, y = align(features, manifest, "train")
    if train_fm.n == 0:
        raise ValidationError("manifest assigns no rows to the train split")
    standardizer = fit_standardizer(train_fm)
    standardized = apply_standardizer(standardizer, train_fm)
    if use_pca:
        pca_model = fit_pca(standardized)
        reduced = project(pca_model, standardized)
    else:
        pca_model = None
        reduced = standardized
    folds = stratified_kfold(y, folds_k, seed)
    result = grid_search(reduced.values, y, grid, folds, settings)
    final = train_final(reduced.values, y, (result.best_c, result.best_gamma), settings)
    model = PipelineModel(
        standardizer=standardizer,
        pca=pca_model,
        svm=final,
        provenance=Provenance(
            seed=seed,
            grid_c=grid_c_spec,
            grid_gamma=grid_gamma_spec,
            best_c=result.best_c,
            best_gamma=result.best_gamma,
            manifest_digest=manifest_digest,
        ),
    )
    return model, result


def evaluate_pipeline(
    model: PipelineModel, features: FeatureMatrix, manifest: DatasetManifest, split: str
) -> EvalReport:
    subset, truth = align(features, manifest, split)
    if subset.n == 0:
        return confusion(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), ())
    reduced = model.transform(subset)
    dec = decision_values(model.svm, reduced.values)
    pred = np.where(dec >= 0.0, 1, -1)
    return confusion(pred, truth, subset.ids)


def predict_pipeline(
    model: PipelineModel, features: FeatureMatrix
) -> list[tuple[str, str, float]]:
    """(id, label token, decision value) per row, input order preserved."""
    if features.n == 0:
        return []
    reduced = model.transform(features)
    dec = decision_values(model.svm, reduced.values)
    out = []
    for i, sample_id in enumerate(features.ids):
        label = "food" if dec[i] >= 0.0 else "nonfood"
        out.append((sample_id, label, float(dec[i])))
    return out


# -- model file ----------------------------------------------------------


def _f(v: float) -> str:
    return format(float(v), ".17g")


def _vec(v: np.ndarray) -> str:
    return " ".join(_f(x) for x in v)


def save_model(model: PipelineModel, path) -> None:
    lines: list[str] = [MODEL_HEADER]
    s = model.standardizer
    lines.append("[standardizer]")
    lines.append(f"d {s.d}")
    lines.append(f"mean {_vec(s.mean)}")
    lines.append(f"scale {_vec(s.scale)}")
    lines.append("[pca]")
    if model.pca is None:
        lines.append("none")
    else:
        p = model.pca
        lines.append(f"d {p.d}")
        lines.append(f"k {p.k}")
        lines.append(f"eigenvalues {_vec(p.eigenvalues)}")
        for row in p.components:
            lines.append(f"component {_vec(row)}")
    m = model.svm
    lines.append("[svm]")
    lines.append(f"gamma {_f(m.params.gamma)}")
    lines.append(f"coef0 {_f(m.params.coef0)}")
    lines.append(f"c {_f(m.c)}")
    lines.append(f"bias {_f(m.bias)}")
    lines.append(f"dim {m.dim}")
    lines.append(f"n_sv {m.support_vectors.shape[0]}")
    for i in range(m.support_vectors.shape[0]):
        lines.append(f"sv {_f(m.dual_coefs[i])} {_vec(m.support_vectors[i])}")
    lines.append(f"iterations {m.meta.iterations}")
    lines.append(f"kkt_violation {_f(m.meta.kkt_violation)}")
    lines.append(f"converged {int(m.meta.converged)}")
    lines.append(f"dual_objective {_f(m.meta.dual_objective)}")
    pr = model.provenance
    lines.append("[provenance]")
    lines.append(f"seed {pr.seed}")
    lines.append(f"grid_c {pr.grid_c}")
    lines.append(f"grid_gamma {pr.grid_gamma}")
    lines.append(f"best_c {_f(pr.best_c)}")
    lines.append(f"best_gamma {_f(pr.best_gamma)}")
    lines.append(f"manifest_digest {pr.manifest_digest}")
    lines.append("[crc32]")
    body = ("\n".join(lines) + "\n").encode("utf-8")
    crc = zlib.crc32(body) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(f"{crc:08x}\n".encode("ascii"))


class _Cursor:
    def __init__(self, lines: list[str], path):
        self.lines = lines
        self.pos = 0
        self.path = path

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise CorruptionError(f"{self.path}: unexpected end of model file")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect(self, literal: str) -> None:
        line = self.next()
        if line != literal:
            raise CorruptionError(f"{self.path}: expected {literal!r}, found {line!r}")

    def kv(self, key: str) -> str:
        line = self.next()
        head, _, rest = line.partition(" ")
        if head != key:
            raise CorruptionError(f"{self.path}: expected key {key!r}, found {head!r}")
        return rest

    def peek(self) -> str:
        if self.pos >= len(self.lines):
            raise CorruptionError(f"{self.path}: unexpected end of model file")
        return self.lines[self.pos]


def _floats(text: str, path) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split()], dtype=np.float64)
    except ValueError:
        raise CorruptionError(f"{path}: malformed numeric field") from None


def load_model(path) -> PipelineModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: not a text model file") from None
    if not text.startswith("fooddetect-model"):
        raise FormatError(f"{path}: missing model header")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 2:
        raise CorruptionError(f"{path}: model file too short")
    crc_line = lines[-1]
    body = ("\n".join(lines[:-1]) + "\n").encode("utf-8")
    try:
        stored = int(crc_line, 16)
    except ValueError:
        raise CorruptionError(f"{path}: malformed checksum line {crc_line!r}") from None
    actual = zlib.crc32(body) & 0xFFFFFFFF
    if stored != actual:
        raise CorruptionError(
            f"{path}: checksum mismatch (stored {stored:08x}, computed {actual:08x})"
        )

    cur = _Cursor(lines[:-1], path)
    header = cur.next()
    if header != MODEL_HEADER:
        raise VersionError(f"{path}: unsupported model version {header!r}")

    try:
        return _parse_sections(cur, path)
    except ValueError:
        raise CorruptionError(f"{path}: malformed numeric field") from None


def _parse_sections(cur: _Cursor, path) -> PipelineModel:
    cur.expect("[standardizer]")
    std_d = int(cur.kv("d"))
    mean = _floats(cur.kv("mean"), path)
    scale = _floats(cur.kv("scale"), path)
    if mean.shape != (std_d,) or scale.shape != (std_d,):
        raise CorruptionError(f"{path}: standardizer vectors disagree with d={std_d}")
    standardizer = StandardizerModel(mean=mean, scale=scale)

    cur.expect("[pca]")
    if cur.peek() == "none":
        cur.next()
        pca_model = None
    else:
        pca_d = int(cur.kv("d"))
        pca_k = int(cur.kv("k"))
        eigenvalues = _floats(cur.kv("eigenvalues"), path)
        components = np.empty((pca_k, pca_d))
        for i in range(pca_k):
            row = _floats(cur.kv("component"), path)
            if row.shape != (pca_d,):
                raise CorruptionError(f"{path}: component row {i} has wrong length")
            components[i] = row
        pca_model = PcaModel(d=pca_d, k=pca_k, components=components, eigenvalues=eigenvalues)

    cur.expect("[svm]")
    gamma = float(cur.kv("gamma"))
    coef0 = float(cur.kv("coef0"))
    c = float(cur.kv("c"))
    bias = float(cur.kv("bias"))
    dim = int(cur.kv("dim"))
    n_sv = int(cur.kv("n_sv"))
    support = np.empty((n_sv, dim))
    duals = np.empty(n_sv)
    for i in range(n_sv):
        row = _floats(cur.kv("sv"), path)
        if row.shape != (dim + 1,):
            raise CorruptionError(f"{path}: support vector {i} has wrong length")
        duals[i] = row[0]
        support[i] = row[1:]
    meta = TrainingMeta(
        iterations=int(cur.kv("iterations")),
        kkt_violation=float(cur.kv("kkt_violation")),
        converged=bool(int(cur.kv("converged"))),
        dual_objective=float(cur.kv("dual_objective")),
    )
    svm_model = SvmModel(
        params=KernelParams(gamma=gamma, coef0=coef0),
        c=c,
        support_vectors=support,
        dual_coefs=duals,
        bias=bias,
        meta=meta,
    )

    cur.expect("[provenance]")
    provenance = Provenance(
        seed=int(cur.kv("seed")),
        grid_c=cur.kv("grid_c"),
        grid_gamma=cur.kv("grid_gamma"),
        best_c=float(cur.kv("best_c")),
        best_gamma=float(cur.kv("best_gamma")),
        manifest_digest=cur.kv("manifest_digest"),
    )
    cur.expect("[crc32]")
    return PipelineModel(
        standardizer=standardizer, pca=pca_model, svm=svm_model, provenance=provenance
    )
