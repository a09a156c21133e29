"""Static SVG figures. Output is byte-stable for identical inputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from scipy.cluster import hierarchy  # noqa: E402

_RC = {"svg.hashsalt": "diffclust", "svg.fonttype": "none"}
_MARKERS = "os^Dvp*hX<>"


def _save(fig, file):
    fig.savefig(file, format="svg", metadata={"Date": None})
    plt.close(fig)


def dendrogram_svg(dendrogram, file, title=""):
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        hierarchy.dendrogram(dendrogram.to_linkage(), labels=list(dendrogram.leaf_labels),
                             ax=ax, color_threshold=0, above_threshold_color="k")
        ax.set_title(title)
        ax.set_ylabel("height")
        fig.tight_layout()
        _save(fig, file)


def mds_svg(embedding, assignment, hulls, file, title=""):
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 5))
        clusters = [assignment.labels[l] if assignment else 1 for l in embedding.labels]
        for c in sorted(set(clusters)):
            sel = [i for i, v in enumerate(clusters) if v == c]
            ax.scatter(embedding.coords[sel, 0], embedding.coords[sel, 1],
                       marker=_MARKERS[(c - 1) % len(_MARKERS)], color="k", facecolor="none")
        for label, (x, y) in zip(embedding.labels, embedding.coords):
            ax.annotate(label, (x, y), fontsize=7, xytext=(3, 3), textcoords="offset points")
        for ell in hulls.values():
            xy = ell.outline()
            ax.plot(xy[:, 0], xy[:, 1], color="0.5", lw=0.8)
        ax.set_title(title)
        ax.set_aspect("equal", adjustable="datalim")
        fig.tight_layout()
        _save(fig, file)
