"""Static raster plots and text reports for training runs and evaluations."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import MetricReport
from .training import EpochRecord


def plot_training_curves(history: Sequence[EpochRecord], out_dir: str | Path) -> list[Path]:
    """Write the four monitoring plot families: critic loss, generator loss,
    both FID series, and both cross-correlation peak series versus epoch."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    epochs = [r.epoch for r in history]
    written = []

    def save(name: str, series: dict[str, tuple[list, list]], ylabel: str) -> None:
        fig, ax = plt.subplots(figsize=(7, 4))
        for label, (xs, ys) in series.items():
            ax.plot(xs, ys, label=label)
        ax.set_xlabel("epoch")
        ax.set_ylabel(ylabel)
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = out_dir / name
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    save("critic_loss.png",
         {"total critic loss": (epochs, [r.total_critic_loss for r in history])},
         "critic loss")
    save("generator_loss.png",
         {"total generator loss": (epochs, [r.total_generator_loss for r in history])},
         "generator loss")

    def monitored(attr: str) -> tuple[list, list]:
        pairs = [(r.epoch, getattr(r, attr)) for r in history if getattr(r, attr) is not None]
        return [p[0] for p in pairs], [p[1] for p in pairs]

    save("fid.png",
         {"fid undamaged": monitored("fid_u"), "fid damaged": monitored("fid_d")},
         "fid")
    save("xcross.png",
         {"xcross undamaged": monitored("xcross_raw_u"),
          "xcross damaged": monitored("xcross_raw_d")},
         "cross-correlation peak")
    return written


def plot_spectrum_overlay(
    spectrum_real: tuple[np.ndarray, np.ndarray],
    spectrum_fake: tuple[np.ndarray, np.ndarray],
    out_path: str | Path,
    title: str = "",
) -> Path:
    """Two-series power spectrum overlay, real versus generated."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(spectrum_real[0], spectrum_real[1], label="real", linewidth=0.8)
    ax.plot(spectrum_fake[0], spectrum_fake[1], label="generated",
            linewidth=0.8, alpha=0.8)
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("power")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def write_metric_report(path: str | Path, report: MetricReport, pair: str) -> None:
    """Tabular text report: one indicator per row with the pair it scored."""
    rows = [
        ("fid", pair, report.fid),
        ("ls", pair, report.ls),
        ("xcross_peak_raw", pair, report.xcross_peak_raw),
        ("xcross_peak_normalized", pair, report.xcross_peak_normalized),
    ]
    lines = [f"{'indicator':<24} {'pair':<32} value"]
    for indicator, pair_label, value in rows:
        lines.append(f"{indicator:<24} {pair_label:<32} {value!r}")
    Path(path).write_text("".join(line + "\n" for line in lines))
