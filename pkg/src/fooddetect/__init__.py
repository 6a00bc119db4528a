"""Food/non-food detection pipeline: standardized feature vectors reduced by
PCA under the Kaiser criterion and classified by a sigmoid-kernel SVM tuned
with 3-fold cross-validated grid search."""

from .errors import (
    AlignmentError,
    ConvergenceError,
    CorruptionError,
    DomainError,
    FormatError,
    InsufficientDataError,
    ModelCompatibilityError,
    PipelineError,
    SearchError,
    ShapeError,
    ValidationError,
    VersionError,
)
from .histfeat import (
    ColorHistogram,
    RgbImage,
    color_histogram,
    histogram_features,
    load_image,
    select_by_variance,
    variance_scores,
)
from .metrics import Confusion, EvalReport, confusion, weighted_merge
from .modelsearch import (
    FoldAssignment,
    SearchGrid,
    SearchResult,
    grid_search,
    log_grid,
    stratified_kfold,
    train_final,
)
from .pca import PcaModel, covariance, fit_pca, project, sym_eigen
from .pipeline import (
    PipelineModel,
    Provenance,
    evaluate_pipeline,
    fit_pipeline,
    load_model,
    predict_pipeline,
    save_model,
)
from .splits import SplitSpec, assign_splits
from .standardize import StandardizerModel, apply_standardizer, fit_standardizer
from .svm import (
    KernelParams,
    SvmModel,
    SvmSettings,
    decision,
    decision_values,
    predict,
    sigmoid_kernel,
    smo_train,
)
from .tensorio import (
    FOOD,
    NONFOOD,
    DatasetManifest,
    FeatureMatrix,
    ManifestEntry,
    align,
    read_feature_file,
    read_manifest,
    write_feature_file,
    write_manifest,
)

__version__ = "0.1.0"
