"""Report rendering: delimited CSV tables and SVG figures.

All outputs are deterministic: floats are written with shortest round-trip
repr, and the SVG backend runs with a fixed hash salt and no date metadata so
repeated runs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = [
    "write_verification_csv",
    "write_sweep_csv",
    "save_far_frr_svg",
    "save_accuracy_vs_k_svg",
]

_SVG_METADATA = {"Date": None}


def _fmt(value: float) -> str:
    return repr(float(value))


def write_verification_csv(path, curve, summary: dict) -> None:
    """FAR/FRR rows followed by a summary block of named metrics."""
    lines = ["threshold,far,frr"]
    for threshold, far, frr in curve:
        lines.append(f"{_fmt(threshold)},{_fmt(far)},{_fmt(frr)}")
    lines.append("")
    lines.append("metric,value")
    for key, value in summary.items():
        lines.append(f"{key},{_fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_sweep_csv(path, points) -> None:
    lines = ["components,accuracy"]
    for k, acc in points:
        lines.append(f"{int(k)},{_fmt(acc)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _save_svg(fig, path) -> None:
    with plt.rc_context({"svg.hashsalt": "scatterprint"}):
        fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)


def save_far_frr_svg(path, curve, eer: float, eer_threshold: float) -> None:
    """Error-rate trade-off figure: FAR and FRR versus the distance threshold."""
    thresholds = [row[0] for row in curve]
    far = [row[1] for row in curve]
    frr = [row[2] for row in curve]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(thresholds, far, label="FAR", color="tab:red")
    ax.plot(thresholds, frr, label="FRR", color="tab:blue")
    ax.plot(
        [eer_threshold],
        [eer],
        marker="o",
        color="black",
        linestyle="none",
        label=f"EER = {eer:.3f}",
    )
    ax.set_xlabel("distance threshold")
    ax.set_ylabel("error rate")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save_svg(fig, path)


def save_accuracy_vs_k_svg(path, points) -> None:
    """Identification accuracy as a function of retained components."""
    ks = [int(k) for k, _ in points]
    accs = [a for _, a in points]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ks, accs, marker="o", color="tab:green")
    ax.set_xlabel("retained components")
    ax.set_ylabel("identification accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save_svg(fig, path)
