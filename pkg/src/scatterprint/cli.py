"""Command-line pipeline: extract features, fit models, and report metrics.

Commands
--------
``synth``     generate a deterministic ridge-texture dataset with a manifest
``extract``   scatter + pool every manifest image into train/test feature files
``fit``       fit the component model and the one-vs-all classifier
``evaluate``  identification accuracy plus verification curve, EER, timings
``sweep-k``   accuracy as a function of retained component count
``eer``       verification-only minimum-distance FAR/FRR/EER report

Flag values take precedence over the (JSON) config file, which takes
precedence over built-in defaults.  Exit codes: 0 success, 1 validation
failure, 2 I/O failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import evaluate as ev
from . import pca as pca_mod
from . import reports
from .config import PipelineConfig, load_config_file, parse_resize
from .dataset import drop_subjects, load_image, load_manifest
from .errors import TrainingError, ValidationError
from .filterbank import build_filter_bank, dump_filters
from .scattering import (
    load_features,
    pool_features,
    save_features,
    save_features_csv,
    scatter,
)
from .svm import load_svm, save_svm, train_multiclass
from .synthetic import generate_dataset

PROG = "scatterprint"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _add_common_flags(sub):
    sub.add_argument("--manifest", type=Path, default=None, help="dataset manifest file")
    sub.add_argument("--config", type=Path, default=None, help="JSON config file")
    sub.add_argument("--resize", default=None, metavar="WxH", help="input size (default 80x60)")
    sub.add_argument("--scales", type=int, default=None, help="filter-bank scale count")
    sub.add_argument("--orients", type=int, default=None, help="filter-bank orientation count")
    sub.add_argument("--layers", type=int, default=None, help="deepest cascade layer")
    sub.add_argument("--pca-k", type=int, default=None, help="retained component count")
    sub.add_argument("--svm-c", type=float, default=None, help="soft-margin penalty")
    sub.add_argument("--epsilon", type=float, default=None,
                     help="retained-variance target; overrides --pca-k when set")
    sub.add_argument("--seed", type=int, default=None, help="random seed for splits")
    sub.add_argument("--out", type=Path, default=None, help="output directory (default ./out)")
    sub.add_argument("--format", dest="fmt", choices=("csv", "svg", "both"), default=None,
                     help="report outputs to write")
    sub.add_argument("--standardize", action="store_true", default=None,
                     help="scale projected features to unit train variance "
                          "(pass consistently to fit/evaluate/eer)")
    sub.add_argument("--holdout", type=int, default=None,
                     help="drop the first N subjects before extraction")


def build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description=__doc__.split("\n\n")[0])
    subs = parser.add_subparsers(dest="command", required=True)

    synth = subs.add_parser("synth", help="generate a synthetic ridge-texture dataset")
    _add_common_flags(synth)
    synth.add_argument("--subjects", type=int, default=10)
    synth.add_argument("--images", type=int, default=10, help="images per subject")

    extract = subs.add_parser("extract", help="compute feature files from a manifest")
    _add_common_flags(extract)
    extract.add_argument("--dump-filters", type=Path, default=None, metavar="DIR",
                         help="write each filter's spatial magnitude as PGM")

    for name, text in (
        ("fit", "fit the component and classifier models"),
        ("evaluate", "write the identification/verification report"),
        ("sweep-k", "accuracy versus retained component count"),
        ("eer", "verification-only FAR/FRR/EER report"),
    ):
        sub = subs.add_parser(name, help=text)
        _add_common_flags(sub)
        if name == "sweep-k":
            sub.add_argument("--k-grid", default=None, metavar="K1,K2,...",
                             help="comma-separated component counts")
        if name == "eer":
            sub.add_argument("--raw-distance", action="store_true",
                             help="use raw features instead of projections")
    return parser


_FLAG_TO_FIELD = {
    "scales": "scales",
    "orients": "orientations",
    "layers": "layers",
    "pca_k": "pca_k",
    "svm_c": "svm_c",
    "epsilon": "epsilon",
    "seed": "seed",
    "out": "out",
    "fmt": "fmt",
    "standardize": "standardize",
    "holdout": "holdout",
    "manifest": "manifest",
}


def resolve_config(args) -> PipelineConfig:
    values = {}
    if args.config is not None:
        values.update(load_config_file(args.config))
    for flag, field in _FLAG_TO_FIELD.items():
        given = getattr(args, flag, None)
        if given is not None:
            values[field] = given
    if getattr(args, "resize", None) is not None:
        values["resize_w"], values["resize_h"] = parse_resize(args.resize)
    return PipelineConfig(**values)


def _load_split_features(cfg: PipelineConfig, split: str):
    path = cfg.train_features_path if split == "train" else cfg.test_features_path
    if not path.exists():
        raise OSError(f"missing feature file {path}; run `{PROG} extract` first")
    features, params = load_features(path)
    x = np.vstack([f.values for f in features])
    labels = np.array([-1 if f.label is None else f.label for f in features])
    return x, labels, params


def _load_models(cfg: PipelineConfig):
    for path in (cfg.pca_model_path, cfg.svm_model_path):
        if not path.exists():
            raise OSError(f"missing model file {path}; run `{PROG} fit` first")
    return pca_mod.load_pca(cfg.pca_model_path), load_svm(cfg.svm_model_path)


def _standardize_scale(model, n_train: int) -> np.ndarray:
    """Per-component standard deviation of the projected training set,
    derivable from the stored eigenvalues (projections are zero-mean)."""
    variance = model.eigenvalues[: model.n_components] / n_train
    return np.sqrt(np.maximum(variance, 1e-24))


def _project_split(cfg: PipelineConfig, model, x, n_train: int) -> np.ndarray:
    projected = pca_mod.project(model, x)
    if cfg.standardize:
        projected = projected / _standardize_scale(model, n_train)
    return projected


def cmd_synth(args, cfg: PipelineConfig) -> int:
    manifest = generate_dataset(
        cfg.out / "data",
        n_subjects=args.subjects,
        images_per_subject=args.images,
        width=cfg.resize_w,
        height=cfg.resize_h,
        seed=cfg.seed,
    )
    print(f"[synth] wrote {args.subjects * args.images} images; manifest: {manifest}")
    return 0


def cmd_extract(args, cfg: PipelineConfig) -> int:
    if cfg.manifest is None:
        raise ValidationError("extract requires --manifest")
    manifest = load_manifest(cfg.manifest)
    if not manifest.entries:
        raise ValidationError(f"manifest {cfg.manifest} has no entries")
    if cfg.holdout:
        manifest = drop_subjects(manifest, cfg.holdout)
        print(f"[extract] holding out {cfg.holdout} subjects; {manifest.n_subjects} remain")
    bank = build_filter_bank(cfg.scales, cfg.orientations, cfg.resize_w, cfg.resize_h)
    if getattr(args, "dump_filters", None) is not None:
        written = dump_filters(bank, args.dump_filters)
        print(f"[extract] dumped {len(written)} filters to {args.dump_filters}")
    cfg.out.mkdir(parents=True, exist_ok=True)
    total = len(manifest.entries)
    done = 0
    start = time.perf_counter()
    for split in ("train", "test"):
        entries = manifest.split_entries(split)
        if not entries:
            print(f"[extract] no {split} entries; skipping {split} outputs")
            continue
        features = []
        params = None
        for entry in entries:
            image = load_image(manifest.resolve(entry), cfg.resize_w, cfg.resize_h)
            result = scatter(image, bank, cfg.layers)
            params = result.params
            features.append(pool_features(result, entry.label))
            done += 1
            if done % 20 == 0 or done == total:
                print(f"[extract] {done}/{total} images", flush=True)
        scf = cfg.train_features_path if split == "train" else cfg.test_features_path
        save_features(scf, features, params)
        if cfg.fmt in ("csv", "both"):
            save_features_csv(scf.with_suffix(".csv"), features, params)
    elapsed = time.perf_counter() - start
    print(f"[extract] {total} images in {elapsed:.2f} s "
          f"({1000.0 * elapsed / total:.1f} ms/image)")
    return 0


def cmd_fit(args, cfg: PipelineConfig) -> int:
    x, labels, _ = _load_split_features(cfg, "train")
    rank_cap = min(x.shape[0] - 1, x.shape[1])
    if cfg.epsilon is not None:
        model = pca_mod.fit_pca(x, rank_cap)
        k = pca_mod.choose_k(model, cfg.epsilon)
        model = pca_mod.truncate(model, k)
        print(f"[fit] epsilon {cfg.epsilon} retains {k} components")
    else:
        model = pca_mod.fit_pca(x, cfg.pca_k)
    projected = _project_split(cfg, model, x, x.shape[0])
    svm_model = train_multiclass(projected, labels, penalty=cfg.svm_c)
    cfg.out.mkdir(parents=True, exist_ok=True)
    pca_mod.save_pca(cfg.pca_model_path, model)
    save_svm(cfg.svm_model_path, svm_model)
    sv_counts = [m.support_vectors.shape[0] for m in svm_model.models]
    print(f"[fit] {len(svm_model.classes)} classes, {model.n_components} components, "
          f"penalty {cfg.svm_c}, support vectors per class "
          f"min/median/max = {min(sv_counts)}/{int(np.median(sv_counts))}/{max(sv_counts)}")
    return 0


def cmd_evaluate(args, cfg: PipelineConfig) -> int:
    train_x, train_labels, _ = _load_split_features(cfg, "train")
    test_x, test_labels, _ = _load_split_features(cfg, "test")
    pca_model, svm_model = _load_models(cfg)
    start = time.perf_counter()
    gallery = _project_split(cfg, pca_model, train_x, train_x.shape[0])
    probes = _project_split(cfg, pca_model, test_x, train_x.shape[0])
    report = ev.build_report(svm_model, gallery, train_labels, probes, test_labels)
    elapsed = time.perf_counter() - start
    cfg.out.mkdir(parents=True, exist_ok=True)
    summary = {
        "accuracy": report.accuracy,
        "eer": report.eer,
        "eer_threshold": report.eer_threshold,
    }
    if cfg.fmt in ("csv", "both"):
        reports.write_verification_csv(cfg.out / "report.csv", report.curve, summary)
    if cfg.fmt in ("svg", "both"):
        reports.save_far_frr_svg(cfg.out / "far_frr.svg", report.curve,
                                 report.eer, report.eer_threshold)
    print(f"[evaluate] accuracy: {report.accuracy:.4f}")
    print(f"[evaluate] eer: {report.eer:.4f} at threshold {report.eer_threshold:.6g}")
    print(f"[evaluate] mean matching time per probe: {report.mean_match_ms:.3f} ms")
    print(f"[evaluate] total: {elapsed:.2f} s")
    return 0


def _parse_k_grid(text: str | None, rank_cap: int) -> list[int]:
    if text:
        try:
            grid = sorted({int(v) for v in text.split(",") if v.strip()})
        except ValueError:
            raise ValidationError(f"bad k grid {text!r}; expected comma-separated integers")
    else:
        grid = sorted({k for k in (1, 2, 5, 10, 20, 50, 100, 200) if k <= rank_cap})
    if not grid:
        raise ValidationError("k grid is empty")
    if grid[0] < 1 or grid[-1] > rank_cap:
        raise ValidationError(f"k grid must lie within [1, {rank_cap}]")
    return grid


def cmd_sweep_k(args, cfg: PipelineConfig) -> int:
    train_x, train_labels, _ = _load_split_features(cfg, "train")
    test_x, test_labels, _ = _load_split_features(cfg, "test")
    rank_cap = min(train_x.shape[0] - 1, train_x.shape[1])
    grid = _parse_k_grid(args.k_grid, rank_cap)
    points = ev.accuracy_vs_components(
        train_x, train_labels, test_x, test_labels, grid, penalty=cfg.svm_c
    )
    cfg.out.mkdir(parents=True, exist_ok=True)
    if cfg.fmt in ("csv", "both"):
        reports.write_sweep_csv(cfg.out / "sweep_k.csv", points)
    if cfg.fmt in ("svg", "both"):
        reports.save_accuracy_vs_k_svg(cfg.out / "accuracy_vs_k.svg", points)
    for k, acc in points:
        print(f"[sweep-k] k={k}: accuracy {acc:.4f}")
    return 0


def cmd_eer(args, cfg: PipelineConfig) -> int:
    train_x, train_labels, _ = _load_split_features(cfg, "train")
    test_x, test_labels, _ = _load_split_features(cfg, "test")
    if args.raw_distance:
        gallery, probes = train_x, test_x
    else:
        if not cfg.pca_model_path.exists():
            raise OSError(
                f"missing model file {cfg.pca_model_path}; "
                f"run `{PROG} fit` first or pass --raw-distance"
            )
        pca_model = pca_mod.load_pca(cfg.pca_model_path)
        gallery = _project_split(cfg, pca_model, train_x, train_x.shape[0])
        probes = _project_split(cfg, pca_model, test_x, train_x.shape[0])
    scores = ev.min_distance_scores(gallery, train_labels, probes, test_labels)
    curve = ev.far_frr_curve(scores, ev.candidate_thresholds(scores))
    eer, threshold = ev.compute_eer(scores)
    cfg.out.mkdir(parents=True, exist_ok=True)
    if cfg.fmt in ("csv", "both"):
        reports.write_verification_csv(
            cfg.out / "eer.csv", curve, {"eer": eer, "eer_threshold": threshold}
        )
    if cfg.fmt in ("svg", "both"):
        reports.save_far_frr_svg(cfg.out / "eer_far_frr.svg", curve, eer, threshold)
    print(f"[eer] eer: {eer:.4f} at threshold {threshold:.6g}")
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "fit": cmd_fit,
    "evaluate": cmd_evaluate,
    "sweep-k": cmd_sweep_k,
    "eer": cmd_eer,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
        return _COMMANDS[args.command](args, cfg)
    except ValidationError as exc:
        print(f"{PROG}: validation error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{PROG}: io error: {exc}", file=sys.stderr)
        return 2
    except (TrainingError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"{PROG}: numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
