"""Image identification via wavelet scattering features, principal component
reduction, and one-vs-all support vector machines, with minimum-distance
verification metrics (FAR/FRR/EER)."""

from .dataset import (
    DatasetManifest,
    GrayImage,
    ManifestEntry,
    load_image,
    load_manifest,
    split_half,
)
from .errors import ManifestError, TrainingError, ValidationError
from .evaluate import (
    EvalReport,
    ScoreSet,
    accuracy,
    accuracy_vs_components,
    compute_eer,
    far_frr_curve,
    min_distance_scores,
)
from .filterbank import FilterBank, MorletParams, build_filter_bank, convolve
from .pca import PcaModel, choose_k, fit_pca, project, retained_variance
from .scattering import (
    FeatureVector,
    ScatteringPath,
    ScatteringResult,
    path_count,
    pool_features,
    scatter,
)
from .svm import (
    LINEAR_KERNEL,
    BinarySvmModel,
    Kernel,
    MulticlassSvmModel,
    decision_value,
    predict,
    train_binary,
    train_multiclass,
)

__version__ = "0.1.0"

__all__ = [
    "DatasetManifest",
    "GrayImage",
    "ManifestEntry",
    "load_image",
    "load_manifest",
    "split_half",
    "ManifestError",
    "TrainingError",
    "ValidationError",
    "EvalReport",
    "ScoreSet",
    "accuracy",
    "accuracy_vs_components",
    "compute_eer",
    "far_frr_curve",
    "min_distance_scores",
    "FilterBank",
    "MorletParams",
    "build_filter_bank",
    "convolve",
    "PcaModel",
    "choose_k",
    "fit_pca",
    "project",
    "retained_variance",
    "FeatureVector",
    "ScatteringPath",
    "ScatteringResult",
    "path_count",
    "pool_features",
    "scatter",
    "LINEAR_KERNEL",
    "BinarySvmModel",
    "Kernel",
    "MulticlassSvmModel",
    "decision_value",
    "predict",
    "train_binary",
    "train_multiclass",
    "__version__",
]
