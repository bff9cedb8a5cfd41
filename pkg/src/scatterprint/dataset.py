"""Dataset ingestion: image decoding, resizing, and labeled train/test manifests.

Images are decoded with Pillow, converted to luminance (ITU-R BT.601 weights
for color inputs), resized with bilinear interpolation in the decoded integer
mode, and normalized to float64 intensities in [0, 1] by dividing by the
format's maximum value.  No per-image contrast normalization is applied.

A manifest is UTF-8 text with one entry per line::

    <relative-path>\t<subject-id>\t<train|test>

Lines starting with ``#`` are comments; blank lines are ignored.  Subject ids
are arbitrary integers and are canonicalized to contiguous labels 0..M-1 in
first-appearance order.  Every subject present in the test split must also
appear in the train split.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ManifestError, ValidationError

__all__ = [
    "GrayImage",
    "ManifestEntry",
    "DatasetManifest",
    "load_image",
    "load_manifest",
    "split_half",
    "drop_subjects",
    "write_manifest",
    "write_pgm",
]

SPLITS = ("train", "test")


@dataclass(frozen=True)
class GrayImage:
    """A grayscale image: row-major float64 intensities in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise ValidationError("image must be a non-empty 2-D array")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValidationError("image intensities must lie in [0, 1]")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: int
    split: str


@dataclass(frozen=True)
class DatasetManifest:
    """Labeled train/test entries with canonical labels 0..M-1.

    ``subject_ids[label]`` is the original subject id for each canonical
    label, in first-appearance order.  ``root`` anchors the relative entry
    paths.
    """

    entries: tuple[ManifestEntry, ...]
    subject_ids: tuple[int, ...]
    root: Path = Path(".")

    @property
    def n_subjects(self) -> int:
        return len(self.subject_ids)

    def split_entries(self, split: str) -> tuple[ManifestEntry, ...]:
        if split not in SPLITS:
            raise ValidationError(f"unknown split {split!r}")
        return tuple(e for e in self.entries if e.split == split)

    def resolve(self, entry: ManifestEntry) -> Path:
        return self.root / entry.path


def load_image(path, target_w: int, target_h: int) -> GrayImage:
    """Decode ``path``, convert to luminance, resize to the target, normalize.

    Supported inputs are whatever Pillow decodes (PNG, BMP, PGM, ...).
    Color inputs are converted to 8-bit luminance before resizing.  If the
    decoded size already matches the target, the resize is skipped, so resizing
    is idempotent.
    """
    if target_w <= 0 or target_h <= 0:
        raise ValidationError(f"target dimensions must be positive, got {target_w}x{target_h}")
    with Image.open(path) as img:
        img.load()
        if img.mode in ("I;16", "I;16L", "I;16B", "I;16N"):
            img = img.convert("I")
        if img.mode == "I":
            maxval = 65535.0
        elif img.mode == "F":
            maxval = 1.0
        else:
            if img.mode != "L":
                img = img.convert("L")
            maxval = 255.0
        if img.size != (target_w, target_h):
            img = img.resize((target_w, target_h), Image.Resampling.BILINEAR)
        arr = np.asarray(img, dtype=np.float64) / maxval
    np.clip(arr, 0.0, 1.0, out=arr)
    return GrayImage(arr)


def _canonicalize(raw_labels) -> dict[int, int]:
    mapping: dict[int, int] = {}
    for raw in raw_labels:
        mapping.setdefault(raw, len(mapping))
    return mapping


def _check_split_coverage(raw_entries) -> None:
    train = {lab for _, lab, split in raw_entries if split == "train"}
    test = {lab for _, lab, split in raw_entries if split == "test"}
    orphans = sorted(test - train)
    if orphans:
        raise ValidationError(
            "subjects appear only in the test split: " + ", ".join(map(str, orphans))
        )
    train_paths = {rel for rel, _, split in raw_entries if split == "train"}
    test_paths = {rel for rel, _, split in raw_entries if split == "test"}
    leaked = sorted(train_paths & test_paths)
    if leaked:
        raise ValidationError(
            "images listed in both splits: " + ", ".join(leaked[:5])
        )


def load_manifest(path) -> DatasetManifest:
    """Parse a manifest file; labels are canonicalized and splits validated."""
    path = Path(path)
    raw_entries: list[tuple[str, int, str]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ManifestError(
                    f"expected 3 tab-separated fields, got {len(fields)}", line_no
                )
            rel, raw_label, split = fields
            if not rel.strip():
                raise ManifestError("empty image path", line_no)
            try:
                label = int(raw_label)
            except ValueError:
                raise ManifestError(f"subject id {raw_label!r} is not an integer", line_no)
            if split not in SPLITS:
                raise ManifestError(f"split must be train or test, got {split!r}", line_no)
            raw_entries.append((rel.strip(), label, split))
    _check_split_coverage(raw_entries)
    mapping = _canonicalize(lab for _, lab, _ in raw_entries)
    entries = tuple(
        ManifestEntry(rel, mapping[lab], split) for rel, lab, split in raw_entries
    )
    subject_ids = tuple(sorted(mapping, key=mapping.get))
    return DatasetManifest(entries, subject_ids, root=path.parent)


def split_half(entries, seed: int, root=Path(".")) -> DatasetManifest:
    """Assign each subject's images half to train, half to test.

    ``entries`` is a sequence of (path, subject-id) pairs.  Each subject's
    images are shuffled with a generator seeded by ``seed`` and split in half;
    an odd count puts the extra image in training.  Deterministic for a fixed
    input order and seed.
    """
    entries = [(str(p), int(lab)) for p, lab in entries]
    mapping = _canonicalize(lab for _, lab in entries)
    groups: dict[int, list[int]] = {c: [] for c in mapping.values()}
    for idx, (_, lab) in enumerate(entries):
        groups[mapping[lab]].append(idx)
    singletons = [lab for lab, c in mapping.items() if len(groups[c]) < 2]
    if singletons:
        raise ValidationError(
            "subjects with fewer than 2 images cannot be split: "
            + ", ".join(map(str, sorted(singletons)))
        )
    rng = np.random.default_rng(seed)
    split_of = [""] * len(entries)
    for canonical in sorted(groups):
        indices = groups[canonical]
        order = rng.permutation(len(indices))
        n_train = (len(indices) + 1) // 2
        for rank, pos in enumerate(order):
            split_of[indices[pos]] = "train" if rank < n_train else "test"
    manifest_entries = tuple(
        ManifestEntry(path, mapping[lab], split_of[i])
        for i, (path, lab) in enumerate(entries)
    )
    subject_ids = tuple(sorted(mapping, key=mapping.get))
    return DatasetManifest(manifest_entries, subject_ids, root=Path(root))


def drop_subjects(manifest: DatasetManifest, count: int) -> DatasetManifest:
    """Remove the first ``count`` canonical subjects (a held-out validation set)
    and re-canonicalize the remaining labels."""
    if count < 0:
        raise ValidationError("holdout count must be >= 0")
    if count == 0:
        return manifest
    if count >= manifest.n_subjects:
        raise ValidationError(
            f"holdout of {count} subjects leaves none of {manifest.n_subjects}"
        )
    kept = [e for e in manifest.entries if e.label >= count]
    entries = tuple(ManifestEntry(e.path, e.label - count, e.split) for e in kept)
    return DatasetManifest(entries, manifest.subject_ids[count:], root=manifest.root)


def write_manifest(path, manifest: DatasetManifest) -> None:
    """Write a manifest back to disk using original subject ids."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for e in manifest.entries:
            fh.write(f"{e.path}\t{manifest.subject_ids[e.label]}\t{e.split}\n")


def write_pgm(path, array) -> None:
    """Write a [0, 1] float array as an 8-bit binary PGM."""
    arr = np.asarray(array, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError("PGM output expects a 2-D array")
    data = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (arr.shape[1], arr.shape[0]))
        fh.write(data.tobytes())
