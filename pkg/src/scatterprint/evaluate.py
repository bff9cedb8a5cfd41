"""Identification and verification metrics: accuracy, minimum-distance
scores, FAR/FRR curves, and the equal error rate.

Verification scores come from nearest-template Euclidean distances: each
probe contributes one genuine score (distance to its own subject's nearest
gallery template) and one impostor score (nearest template of any other
subject).  A threshold ``t`` accepts distances ``<= t``, so FAR is the
fraction of impostor scores at or below ``t`` and FRR the fraction of genuine
scores above it.  The EER sweep evaluates every distinct score value plus the
midpoints between consecutive values, returns the threshold minimizing
``|FAR - FRR|`` (smallest threshold on ties), and reports ``(FAR + FRR) / 2``
there, since the empirical step curves rarely cross exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .pca import fit_pca, project, truncate
from .svm import LINEAR_KERNEL, MulticlassSvmModel, predict, train_multiclass

__all__ = [
    "ScoreSet",
    "EvalReport",
    "accuracy",
    "confusion_counts",
    "min_distance_scores",
    "candidate_thresholds",
    "far_frr_curve",
    "compute_eer",
    "accuracy_vs_components",
    "build_report",
]


@dataclass
class ScoreSet:
    """Genuine (same-subject) and impostor (cross-subject) distances."""

    genuine: np.ndarray
    impostor: np.ndarray


@dataclass
class EvalReport:
    accuracy: float
    curve: list
    eer: float
    eer_threshold: float
    confusion: np.ndarray
    mean_match_ms: float = 0.0


def accuracy(model: MulticlassSvmModel, x, labels) -> float:
    """Fraction of test points whose predicted label matches."""
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    if x.shape[0] == 0:
        raise ValidationError("cannot score an empty test set")
    return float(np.mean(predict(model, x) == labels))


def confusion_counts(labels, predicted, n_classes: int) -> np.ndarray:
    """(true, predicted) count matrix over canonical labels 0..n_classes-1."""
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(np.asarray(labels), np.asarray(predicted)):
        counts[int(t), int(p)] += 1
    return counts


def _pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    sq = (
        (a * a).sum(axis=1)[:, None]
        + (b * b).sum(axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.clip(sq, 0.0, None, out=sq)
    return np.sqrt(sq)


def min_distance_scores(gallery_x, gallery_labels, probe_x, probe_labels) -> ScoreSet:
    """Nearest-template distances per probe: one genuine and one impostor score.

    Every probe label must have at least one gallery template.
    """
    gallery_x = np.asarray(gallery_x, dtype=np.float64)
    probe_x = np.asarray(probe_x, dtype=np.float64)
    gallery_labels = np.asarray(gallery_labels)
    probe_labels = np.asarray(probe_labels)
    if gallery_x.shape[0] == 0 or probe_x.shape[0] == 0:
        raise ValidationError("gallery and probe sets must be nonempty")
    missing = sorted(set(probe_labels.tolist()) - set(gallery_labels.tolist()))
    if missing:
        raise ValidationError(
            "probe labels absent from the gallery: " + ", ".join(map(str, missing))
        )
    distances = _pairwise_distances(probe_x, gallery_x)
    same = probe_labels[:, None] == gallery_labels[None, :]
    genuine = np.where(same, distances, np.inf).min(axis=1)
    impostor = np.where(~same, distances, np.inf).min(axis=1)
    finite = np.isfinite(impostor)
    if not finite.all():
        raise ValidationError("need at least 2 subjects for impostor comparisons")
    return ScoreSet(genuine=genuine, impostor=impostor)


def candidate_thresholds(scores: ScoreSet) -> np.ndarray:
    """All distinct score values plus midpoints between consecutive values."""
    values = np.unique(np.concatenate([scores.genuine, scores.impostor]))
    if values.shape[0] == 1:
        return values
    mids = (values[:-1] + values[1:]) / 2.0
    return np.sort(np.concatenate([values, mids]))


def _rates(scores: ScoreSet, thresholds: np.ndarray):
    genuine = np.sort(np.asarray(scores.genuine, dtype=np.float64))
    impostor = np.sort(np.asarray(scores.impostor, dtype=np.float64))
    if genuine.shape[0] == 0 or impostor.shape[0] == 0:
        raise ValidationError("both genuine and impostor score lists must be nonempty")
    far = np.searchsorted(impostor, thresholds, side="right") / impostor.shape[0]
    frr = 1.0 - np.searchsorted(genuine, thresholds, side="right") / genuine.shape[0]
    return far, frr


def far_frr_curve(scores: ScoreSet, grid) -> list:
    """(threshold, FAR, FRR) for each threshold of an ascending grid."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValidationError("threshold grid must be nonempty")
    if np.any(np.diff(grid) < 0):
        raise ValidationError("threshold grid must be sorted ascending")
    far, frr = _rates(scores, grid)
    return [(float(t), float(a), float(r)) for t, a, r in zip(grid, far, frr)]


def compute_eer(scores: ScoreSet):
    """Equal error rate and its threshold from a sweep of all candidate
    thresholds; ties in |FAR - FRR| go to the smallest threshold."""
    thresholds = candidate_thresholds(scores)
    far, frr = _rates(scores, thresholds)
    idx = int(np.argmin(np.abs(far - frr)))
    eer = float((far[idx] + frr[idx]) / 2.0)
    return eer, float(thresholds[idx])


def accuracy_vs_components(
    train_x,
    train_labels,
    test_x,
    test_labels,
    k_grid,
    penalty: float = 1.0,
    kernel=LINEAR_KERNEL,
) -> list:
    """Identification accuracy for each retained-component count in ``k_grid``.

    One decomposition is fitted at the largest k and truncated per grid value,
    which is exactly equivalent to refitting at each k.
    """
    k_grid = [int(k) for k in k_grid]
    if not k_grid:
        raise ValidationError("k grid must be nonempty")
    model = fit_pca(np.asarray(train_x, dtype=np.float64), max(k_grid))
    results = []
    for k in k_grid:
        reduced = truncate(model, k)
        svm = train_multiclass(
            project(reduced, train_x), train_labels, kernel=kernel, penalty=penalty
        )
        results.append((k, accuracy(svm, project(reduced, test_x), test_labels)))
    return results


def build_report(
    svm_model: MulticlassSvmModel,
    gallery_x,
    gallery_labels,
    probe_x,
    probe_labels,
) -> EvalReport:
    """Full identification + verification report on projected features."""
    probe_x = np.asarray(probe_x, dtype=np.float64)
    start = time.perf_counter()
    predicted = predict(svm_model, probe_x)
    elapsed = time.perf_counter() - start
    acc = float(np.mean(predicted == np.asarray(probe_labels)))
    scores = min_distance_scores(gallery_x, gallery_labels, probe_x, probe_labels)
    curve = far_frr_curve(scores, candidate_thresholds(scores))
    eer, threshold = compute_eer(scores)
    confusion = confusion_counts(
        probe_labels, predicted, int(svm_model.classes.max()) + 1
    )
    return EvalReport(
        accuracy=acc,
        curve=curve,
        eer=eer,
        eer_threshold=threshold,
        confusion=confusion,
        mean_match_ms=1000.0 * elapsed / probe_x.shape[0],
    )
