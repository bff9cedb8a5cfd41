"""Translation-invariant scattering cascade and mean/variance pooling.

Each output map is produced by a cascade of wavelet convolution, complex
modulus, and low-pass averaging: layer 0 is the averaged image, layer 1
averages ``|image * bandpass|``, layer 2 averages the modulus of a second
band-pass pass over a layer-1 envelope, and so on.  Scale indices strictly
decrease along a path (the second filter applied is finer than the first);
paths violating that are pruned, giving ``sum_k L**k * C(J, k)`` maps through
layer ``m``.  Maps are emitted in canonical order: by layer, then
lexicographically by the flattened (scale, orientation) path.

Pooling takes the arithmetic mean and the population (1/N) variance of every
map, interleaved as (mean, variance) per map in canonical order.

Feature files are binary, magic ``SCF1``: seven little-endian int32 header
fields (scales, orientations, max layer, width, height, feature length,
record count) followed by one record per image (int32 label, -1 when
unlabeled, then float64 feature values).  A CSV form is also provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._binio import atomic_write, expect_magic, read_f64, read_i32, write_f64, write_i32
from .dataset import GrayImage
from .errors import ValidationError
from .filterbank import FilterBank

__all__ = [
    "ScatteringPath",
    "ScatteringParams",
    "ScatteringResult",
    "FeatureVector",
    "path_count",
    "scatter",
    "pool_features",
    "save_features",
    "load_features",
    "save_features_csv",
]

FEATURE_MAGIC = b"SCF1"


@dataclass(frozen=True)
class ScatteringPath:
    """Ordered (scale, orientation) pairs identifying one cascade map."""

    scales: tuple[int, ...]
    orientations: tuple[int, ...]

    def __post_init__(self):
        if len(self.scales) != len(self.orientations):
            raise ValidationError("path scales and orientations differ in length")
        for earlier, later in zip(self.scales, self.scales[1:]):
            if later >= earlier:
                raise ValidationError(
                    f"path scales must strictly decrease, got {self.scales}"
                )

    @property
    def layer(self) -> int:
        return len(self.scales)

    @property
    def sort_key(self) -> tuple:
        interleaved = tuple(
            v for pair in zip(self.scales, self.orientations) for v in pair
        )
        return (self.layer, interleaved)


@dataclass(frozen=True)
class ScatteringParams:
    n_scales: int
    n_orientations: int
    max_layer: int
    width: int
    height: int


@dataclass
class ScatteringResult:
    """Maps in canonical order, each paired with its path."""

    maps: list
    params: ScatteringParams

    def __len__(self) -> int:
        return len(self.maps)

    def __iter__(self):
        return iter(self.maps)


@dataclass
class FeatureVector:
    """Pooled per-image descriptor; ``label`` is the subject identity if known."""

    values: np.ndarray
    label: int | None = None


def path_count(n_scales: int, n_orientations: int, max_layer: int) -> int:
    """Number of maps through ``max_layer``: sum over k of L**k * C(J, k)."""
    if n_scales < 1 or n_orientations < 1:
        raise ValidationError("need at least one scale and one orientation")
    if max_layer < 0:
        raise ValidationError("max layer must be >= 0")
    if max_layer > n_scales:
        raise ValidationError(
            f"max layer {max_layer} exceeds scale count {n_scales}: "
            "no strictly decreasing scale tuple exists"
        )
    return sum(
        n_orientations ** k * math.comb(n_scales, k) for k in range(max_layer + 1)
    )


def scatter(image, bank: FilterBank, max_layer: int = 2) -> ScatteringResult:
    """Run the cascade on one image and return all maps through ``max_layer``.

    ``image`` may be a :class:`GrayImage` or a 2-D array matching the bank
    geometry.  Pure and deterministic: the same inputs give bit-identical maps.
    """
    arr = image.pixels if isinstance(image, GrayImage) else np.asarray(image, dtype=np.float64)
    if arr.shape != (bank.height, bank.width):
        raise ValidationError(
            f"image shape {arr.shape} does not match bank geometry "
            f"({bank.height}, {bank.width})"
        )
    if not 0 <= max_layer <= bank.n_scales:
        raise ValidationError(
            f"max layer must lie in [0, {bank.n_scales}], got {max_layer}"
        )
    lowpass = bank.lowpass
    maps: list = []
    # Each frontier node carries the spectrum of the current envelope and the
    # exclusive upper bound for the next scale index (decreasing along paths).
    frontier = [(ScatteringPath((), ()), np.fft.fft2(arr), bank.n_scales)]
    for layer in range(max_layer + 1):
        grown: list = []
        for path, spectrum, scale_bound in frontier:
            averaged = np.fft.ifft2(spectrum * lowpass).real
            maps.append((path, averaged))
            if layer == max_layer:
                continue
            for j in range(scale_bound):
                for t in range(bank.n_orientations):
                    envelope = np.abs(np.fft.ifft2(spectrum * bank.bandpass[(j, t)]))
                    child = ScatteringPath(path.scales + (j,), path.orientations + (t,))
                    grown.append((child, np.fft.fft2(envelope), j))
        frontier = grown
    params = ScatteringParams(
        bank.n_scales, bank.n_orientations, max_layer, bank.width, bank.height
    )
    return ScatteringResult(maps, params)


def pool_features(result: ScatteringResult, label: int | None = None) -> FeatureVector:
    """Mean and population variance of every map, interleaved in map order."""
    if not result.maps:
        raise ValidationError("cannot pool an empty scattering result")
    values = np.empty(2 * len(result.maps), dtype=np.float64)
    for i, (_, m) in enumerate(result.maps):
        values[2 * i] = m.mean()
        values[2 * i + 1] = m.var()
    return FeatureVector(values, label)


def _as_label(label) -> int:
    return -1 if label is None else int(label)


def save_features(path, features, params: ScatteringParams) -> None:
    """Write feature vectors to a binary ``SCF1`` file (atomically)."""
    features = list(features)
    if not features:
        raise ValidationError("refusing to write an empty feature file")
    length = len(features[0].values)
    if any(len(f.values) != length for f in features):
        raise ValidationError("feature vectors differ in length")

    def writer(fh):
        fh.write(FEATURE_MAGIC)
        write_i32(
            fh,
            params.n_scales,
            params.n_orientations,
            params.max_layer,
            params.width,
            params.height,
            length,
            len(features),
        )
        for f in features:
            write_i32(fh, _as_label(f.label))
            write_f64(fh, f.values)

    atomic_write(path, writer)


def load_features(path):
    """Read an ``SCF1`` file; returns (features, params)."""
    with open(path, "rb") as fh:
        expect_magic(fh, FEATURE_MAGIC, path)
        n_scales, n_orients, max_layer, width, height, length, count = read_i32(fh, 7)
        features = []
        for _ in range(count):
            (label,) = read_i32(fh, 1)
            values = read_f64(fh, length)
            features.append(FeatureVector(values, None if label < 0 else label))
    params = ScatteringParams(n_scales, n_orients, max_layer, width, height)
    return features, params


def save_features_csv(path, features, params: ScatteringParams) -> None:
    """Write feature vectors as CSV with a commented header describing layout."""
    features = list(features)
    if not features:
        raise ValidationError("refusing to write an empty feature file")
    length = len(features[0].values)
    lines = [
        f"# scattering features: scales={params.n_scales} orientations={params.n_orientations}"
        f" max_layer={params.max_layer} width={params.width} height={params.height}"
        f" length={length}",
        "# layout: (mean, variance) per map, maps in canonical path order",
        "label," + ",".join(f"f{i:04d}" for i in range(length)),
    ]
    for f in features:
        lines.append(
            str(_as_label(f.label)) + "," + ",".join(repr(float(v)) for v in f.values)
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
