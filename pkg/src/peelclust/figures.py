"""File renderers for report artifacts: PGM and matplotlib figures.

Every renderer here is a pure function of its inputs so repeated runs
produce byte-identical files; the matplotlib paths strip the library's
metadata stamp for that reason.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["write_pgm", "save_heatmap_png", "save_peel_png"]

_PNG_META = {"Software": None}


def write_pgm(K, path):
    """Binary 8-bit PGM of a matrix with entries in [0, 1].

    Pixel value is ``round(255 * clamp(entry, 0, 1))``, row i rendered top
    to bottom.  Bit-exact and dependency-free.
    """
    K = np.asarray(K, dtype=float)
    pixels = np.rint(255.0 * np.clip(K, 0.0, 1.0)).astype(np.uint8)
    h, w = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def save_heatmap_png(K, path, title=None):
    """Grayscale heatmap of a matrix with entries in [0, 1]."""
    K = np.asarray(K, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 6.0), dpi=120)
    ax.imshow(
        np.clip(K, 0.0, 1.0),
        cmap="gray_r",
        vmin=0.0,
        vmax=1.0,
        interpolation="nearest",
    )
    ax.set_xticks([])
    ax.set_yticks([])
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def save_peel_png(report, path, title=None):
    """Progress of a peeling run: surviving nodes per round with the knob
    value at which each round recovered."""
    steps = [rec.step for rec in report.rounds]
    nodes = [rec.nodes_before for rec in report.rounds]
    knobs = [rec.knob for rec in report.rounds]
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    if steps:
        ax.plot(steps, nodes, marker="o")
        for s, nd, kv in zip(steps, nodes, knobs):
            ax.annotate(f"knob {kv:g}", (s, nd), textcoords="offset points",
                        xytext=(6, 4), fontsize=8)
        ax.set_xticks(steps)
    ax.set_xlabel("round")
    ax.set_ylabel("nodes remaining")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
