"""Soft-margin support vector machines: binary dual training via sequential
minimal optimization and one-vs-all multi-class prediction.

The trainer maximizes the dual

    sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j k(x_i, x_j)
    subject to 0 <= a_i <= C  and  sum_i a_i y_i = 0

with two-variable updates on the maximal violating pair, stopping when the
largest pairwise violation drops to ``tol`` (default 1e-3) or after the update
cap.  The bias is the average of ``y_i - sum_j a_j y_j k(x_i, x_j)`` over free
support vectors (0 < a < C); when none are free it is the midpoint of the
interval the bound constraints leave feasible.  Only points with positive dual
coefficient are stored in the model.

Multi-class models hold one binary machine per class (that class positive,
the rest negative, trained in ascending label order); prediction takes the
class with the greatest decision value, breaking ties toward the smaller
label.

Model files are binary, magic ``SVM1``: little-endian int32 (class count M,
dimension d, kernel kind: 0 = linear) and float64 penalty, then M per-class
records (int32 support-vector count, float64 bias, the dual coefficients, and
the support vectors row-major).  Only linear-kernel models are serializable,
and classes must be the canonical labels 0..M-1.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._binio import atomic_write, expect_magic, read_f64, read_i32, write_f64, write_i32
from .errors import TrainingError, ValidationError

__all__ = [
    "Kernel",
    "LINEAR_KERNEL",
    "BinarySvmModel",
    "MulticlassSvmModel",
    "train_binary",
    "decision_value",
    "decision_values",
    "train_multiclass",
    "predict",
    "dual_objective",
    "save_svm",
    "load_svm",
]

SVM_MAGIC = b"SVM1"
_KERNEL_CODES = {"linear": 0}


@dataclass(frozen=True)
class Kernel:
    """Either the built-in linear kernel or a user-supplied symmetric
    positive-semidefinite function ``func(x, y) -> float``."""

    kind: str
    func: Callable | None = None

    def __post_init__(self):
        if self.kind == "linear":
            if self.func is not None:
                raise ValidationError("the linear kernel takes no custom function")
        elif self.kind == "custom":
            if self.func is None:
                raise ValidationError("a custom kernel needs a callable")
        else:
            raise ValidationError(f"unknown kernel kind {self.kind!r}")

    def gram(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Kernel matrix between the rows of ``a`` and of ``b``."""
        if self.kind == "linear":
            return a @ b.T
        return np.array([[float(self.func(x, z)) for z in b] for x in a])


LINEAR_KERNEL = Kernel("linear")


@dataclass
class BinarySvmModel:
    """Dual-form binary classifier.  ``dual_coefs[i]`` is ``a_i * y_i`` for
    support vector i, so ``a_i`` is recoverable as its absolute value."""

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    kernel: Kernel
    penalty: float


@dataclass
class MulticlassSvmModel:
    """One-vs-all ensemble: ``models[i]`` separates ``classes[i]`` from the rest."""

    classes: np.ndarray
    models: list


class _KernelRows:
    """Row access to the training kernel matrix; dense below ``dense_limit``
    training points, LRU row cache above.  Rows and diagonal are computed by
    one canonical expression in both modes, so training results are bitwise
    identical with and without caching."""

    def __init__(self, x, kernel, dense_limit=4096, cache_rows=1024):
        self.x = x
        self.kernel = kernel
        n = x.shape[0]
        if kernel.kind == "linear":
            self.diag = np.array([float(np.dot(r, r)) for r in x])
        else:
            self.diag = np.array([float(kernel.func(r, r)) for r in x])
        if n <= dense_limit:
            self.full = np.empty((n, n))
            for i in range(n):
                self.full[i] = self._compute_row(i)
            self.cache = None
        else:
            self.full = None
            self.cache = OrderedDict()
            self.cache_rows = cache_rows

    def _compute_row(self, i: int) -> np.ndarray:
        return self.kernel.gram(self.x[i : i + 1], self.x)[0]

    def row(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[i]
        hit = self.cache.get(i)
        if hit is not None:
            self.cache.move_to_end(i)
            return hit
        fresh = self._compute_row(i)
        self.cache[i] = fresh
        if len(self.cache) > self.cache_rows:
            self.cache.popitem(last=False)
        return fresh


def _smo(rows: _KernelRows, y: np.ndarray, penalty: float, tol: float, max_updates: int):
    """Maximal-violating-pair SMO.  Returns (alpha, bias, updates, violation)."""
    n = y.shape[0]
    alpha = np.zeros(n)
    # Gradient of the (minimization-form) objective 1/2 a'Qa - sum(a),
    # where Q_ij = y_i y_j K_ij; starts at -1 since alpha starts at 0.
    grad = -np.ones(n)
    diag = rows.diag
    pos = y > 0
    updates = 0
    while True:
        vio = -y * grad
        up = (pos & (alpha < penalty)) | (~pos & (alpha > 0))
        low = (~pos & (alpha < penalty)) | (pos & (alpha > 0))
        if not up.any() or not low.any():
            violation = 0.0
            break
        up_vals = np.where(up, vio, -np.inf)
        low_vals = np.where(low, vio, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        violation = float(vio[i] - vio[j])
        if violation <= tol:
            break
        if updates >= max_updates:
            raise TrainingError(
                f"no convergence after {max_updates} pair updates; "
                f"final KKT violation {violation:.3e} exceeds tolerance {tol:.1e}"
            )
        k_i = rows.row(i)
        k_j = rows.row(j)
        q_ij = y[i] * y[j] * k_i[j]
        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = diag[i] + diag[j] + 2.0 * q_ij
            if quad <= 0:
                quad = 1e-12
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
                if alpha[i] > penalty:
                    alpha[i] = penalty
                    alpha[j] = penalty - diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
                if alpha[j] > penalty:
                    alpha[j] = penalty
                    alpha[i] = penalty + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * q_ij
            if quad <= 0:
                quad = 1e-12
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > penalty:
                if alpha[i] > penalty:
                    alpha[i] = penalty
                    alpha[j] = total - penalty
                if alpha[j] > penalty:
                    alpha[j] = penalty
                    alpha[i] = total - penalty
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total
        d_i = alpha[i] - old_i
        d_j = alpha[j] - old_j
        grad += (y * y[i] * d_i) * k_i + (y * y[j] * d_j) * k_j
        updates += 1
    # Snap dual variables sitting within rounding noise of the box onto it.
    snap = 1e-10 * penalty
    alpha[alpha < snap] = 0.0
    alpha[alpha > penalty - snap] = penalty
    vio = -y * grad
    free = (alpha > 0) & (alpha < penalty)
    if free.any():
        bias = float(vio[free].mean())
    else:
        up = (pos & (alpha < penalty)) | (~pos & (alpha > 0))
        low = (~pos & (alpha < penalty)) | (pos & (alpha > 0))
        hi = vio[up].max() if up.any() else 0.0
        lo = vio[low].min() if low.any() else 0.0
        bias = float((hi + lo) / 2.0)
    return alpha, bias, updates, violation


def train_binary(
    x,
    y,
    kernel: Kernel = LINEAR_KERNEL,
    penalty: float = 1.0,
    tol: float = 1e-3,
    max_updates: int = 10_000_000,
    dense_limit: int = 4096,
) -> BinarySvmModel:
    """Train a binary soft-margin machine on labels +-1.

    Requires at least one example of each label and ``penalty > 0``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValidationError("expected (n, d) data with n labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValidationError("binary labels must be +1 or -1")
    if not ((y > 0).any() and (y < 0).any()):
        raise ValidationError("training data must contain both labels")
    if penalty <= 0:
        raise ValidationError(f"penalty must be positive, got {penalty}")
    rows = _KernelRows(x, kernel, dense_limit=dense_limit)
    alpha, bias, _, _ = _smo(rows, y, float(penalty), tol, max_updates)
    keep = alpha > 0
    return BinarySvmModel(
        support_vectors=np.ascontiguousarray(x[keep]),
        dual_coefs=alpha[keep] * y[keep],
        bias=bias,
        kernel=kernel,
        penalty=float(penalty),
    )


def decision_values(model: BinarySvmModel, x) -> np.ndarray:
    """Signed margins for a (n, d) batch of points."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.support_vectors.shape[1]:
        raise ValidationError(
            f"point length {x.shape[1]} does not match support vectors "
            f"of length {model.support_vectors.shape[1]}"
        )
    return model.kernel.gram(x, model.support_vectors) @ model.dual_coefs + model.bias


def decision_value(model: BinarySvmModel, x) -> float:
    """Signed margin of a single point (the pre-sign decision value)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValidationError("decision_value takes a single point")
    return float(decision_values(model, x[None, :])[0])


def dual_objective(model: BinarySvmModel) -> float:
    """Value of the trained dual objective (points with zero coefficient
    contribute nothing, so the stored support vectors suffice)."""
    coefs = model.dual_coefs
    gram = model.kernel.gram(model.support_vectors, model.support_vectors)
    return float(np.abs(coefs).sum() - 0.5 * coefs @ gram @ coefs)


def train_multiclass(
    x,
    labels,
    kernel: Kernel = LINEAR_KERNEL,
    penalty: float = 1.0,
    tol: float = 1e-3,
    max_updates: int = 10_000_000,
    dense_limit: int = 4096,
) -> MulticlassSvmModel:
    """Train one-vs-all binary machines, one per class in ascending label order."""
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    if x.ndim != 2 or labels.ndim != 1 or x.shape[0] != labels.shape[0]:
        raise ValidationError("expected (n, d) data with n labels")
    classes = np.unique(labels)
    if classes.shape[0] < 2:
        raise ValidationError("multi-class training needs at least 2 classes")
    rows = _KernelRows(x, kernel, dense_limit=dense_limit)
    models = []
    for cls in classes:
        y = np.where(labels == cls, 1.0, -1.0)
        alpha, bias, _, _ = _smo(rows, y, float(penalty), tol, max_updates)
        keep = alpha > 0
        models.append(
            BinarySvmModel(
                support_vectors=np.ascontiguousarray(x[keep]),
                dual_coefs=alpha[keep] * y[keep],
                bias=bias,
                kernel=kernel,
                penalty=float(penalty),
            )
        )
    return MulticlassSvmModel(classes=classes, models=models)


def _multiclass_margins(model: MulticlassSvmModel, x: np.ndarray) -> np.ndarray:
    return np.column_stack([decision_values(m, x) for m in model.models])


def predict(model: MulticlassSvmModel, x):
    """Label of the class with the greatest margin; ties go to the smaller
    label.  Accepts a single point or an (n, d) batch."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    margins = _multiclass_margins(model, np.atleast_2d(arr))
    winners = model.classes[np.argmax(margins, axis=1)]
    return winners[0] if single else winners


def save_svm(path, model: MulticlassSvmModel) -> None:
    if not model.models:
        raise ValidationError("cannot serialize a model with no classes")
    if model.models[0].kernel.kind != "linear":
        raise ValidationError("only linear-kernel models are serializable")
    m = len(model.models)
    if list(model.classes) != list(range(m)):
        raise ValidationError("serialized models require canonical labels 0..M-1")
    d = model.models[0].support_vectors.shape[1]
    penalty = model.models[0].penalty

    def writer(fh):
        fh.write(SVM_MAGIC)
        write_i32(fh, m, d, _KERNEL_CODES["linear"])
        write_f64(fh, np.array([penalty]))
        for binary in model.models:
            write_i32(fh, binary.support_vectors.shape[0])
            write_f64(fh, np.array([binary.bias]))
            write_f64(fh, binary.dual_coefs)
            write_f64(fh, binary.support_vectors)

    atomic_write(path, writer)


def load_svm(path) -> MulticlassSvmModel:
    with open(path, "rb") as fh:
        expect_magic(fh, SVM_MAGIC, path)
        m, d, kind = read_i32(fh, 3)
        if kind != _KERNEL_CODES["linear"]:
            raise OSError(f"{path}: unsupported kernel code {kind}")
        penalty = float(read_f64(fh, 1)[0])
        models = []
        for _ in range(m):
            (n_sv,) = read_i32(fh, 1)
            bias = float(read_f64(fh, 1)[0])
            coefs = read_f64(fh, n_sv)
            vectors = read_f64(fh, n_sv * d).reshape(n_sv, d)
            models.append(
                BinarySvmModel(vectors, coefs, bias, LINEAR_KERNEL, penalty)
            )
    return MulticlassSvmModel(classes=np.arange(m), models=models)
