"""Pipeline configuration with CLI > config file > built-in default precedence."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ValidationError

__all__ = ["PipelineConfig", "load_config_file", "parse_resize"]


@dataclass
class PipelineConfig:
    """Everything a pipeline run needs; defaults are the tuned operating point
    (5 scales, 6 orientations, 2 layers, 80x60 input, 200 components, C=1)."""

    scales: int = 5
    orientations: int = 6
    layers: int = 2
    resize_w: int = 80
    resize_h: int = 60
    pca_k: int = 200
    svm_c: float = 1.0
    epsilon: float | None = None
    seed: int = 0
    standardize: bool = False
    holdout: int = 0
    manifest: Path | None = None
    out: Path = Path("out")
    fmt: str = "both"

    def __post_init__(self):
        if self.scales < 1 or self.orientations < 1 or self.layers < 0:
            raise ValidationError("scales/orientations must be >= 1 and layers >= 0")
        if self.resize_w < 1 or self.resize_h < 1:
            raise ValidationError("resize dimensions must be positive")
        if self.pca_k < 1:
            raise ValidationError("pca-k must be >= 1")
        if self.svm_c <= 0:
            raise ValidationError("svm-c must be positive")
        if self.epsilon is not None and not 0.0 < self.epsilon <= 1.0:
            raise ValidationError("epsilon must lie in (0, 1]")
        if self.fmt not in ("csv", "svg", "both"):
            raise ValidationError(f"format must be csv, svg, or both, got {self.fmt!r}")
        if self.holdout < 0:
            raise ValidationError("holdout must be >= 0")
        if self.manifest is not None:
            self.manifest = Path(self.manifest)
        self.out = Path(self.out)

    # Paths of the stage artifacts under the output directory.
    @property
    def train_features_path(self) -> Path:
        return self.out / "train.scf"

    @property
    def test_features_path(self) -> Path:
        return self.out / "test.scf"

    @property
    def pca_model_path(self) -> Path:
        return self.out / "model.pca1"

    @property
    def svm_model_path(self) -> Path:
        return self.out / "model.svm1"


_CONFIG_KEYS = {f.name for f in fields(PipelineConfig)}
# flag spellings accepted in config files alongside the field names
_CONFIG_ALIASES = {"orients": "orientations", "format": "fmt"}


def parse_resize(text: str) -> tuple[int, int]:
    """Parse a WIDTHxHEIGHT flag value such as ``80x60``."""
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValidationError(f"resize must look like 80x60, got {text!r}")
    try:
        w, h = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValidationError(f"resize must look like 80x60, got {text!r}")
    if w < 1 or h < 1:
        raise ValidationError("resize dimensions must be positive")
    return w, h


def load_config_file(path) -> dict:
    """Read a JSON config file; keys are the flag names (``orients``,
    ``format``, ``resize`` as WIDTHxHEIGHT, ...) or the PipelineConfig field
    names."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path}: {exc}")
    if not isinstance(raw, dict):
        raise ValidationError(f"config file {path}: expected a JSON object")
    values = {}
    for key, value in raw.items():
        key = _CONFIG_ALIASES.get(key, key)
        if key == "resize":
            values["resize_w"], values["resize_h"] = parse_resize(str(value))
        elif key in _CONFIG_KEYS:
            values[key] = value
        else:
            raise ValidationError(f"config file {path}: unknown key {key!r}")
    return values
