"""End-to-end runs: synthetic study and panel CSV clustering."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path as FsPath
from typing import Optional

import numpy as np

from . import io, plots
from .basis import SupportInterval, build_basis, detect_support
from .clustering import (ClusterAssignment, Dendrogram, Ellipse, Embedding2D,
                         classical_mds, cut, ellipsoid_hull, hac_complete)
from .errors import PipelineError
from .metrics import METRICS, DistanceMatrix, distance_matrix, rescale01
from .sde import PRESETS, Path, synthetic_suite

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    metrics: tuple = METRICS
    basis_degree: int = 10
    basis_size: int = 20
    enlarge: float = 0.10
    support: Optional[tuple] = None
    k: int = 4
    seed: int = 0
    preset: str = "full"
    log_returns: bool = False
    linkage: str = "complete"
    n_jobs: int = 1
    out: Optional[str] = None

    def __post_init__(self):
        metrics = tuple(m.upper() for m in self.metrics)
        bad = [m for m in metrics if m not in METRICS]
        if bad or not metrics:
            raise PipelineError(f"unknown metric(s) {bad}; choose from {', '.join(METRICS)}")
        object.__setattr__(self, "metrics", tuple(dict.fromkeys(metrics)))
        if self.linkage != "complete":
            raise PipelineError("only complete linkage is supported")
        if self.basis_degree < 0 or self.basis_size <= self.basis_degree:
            raise PipelineError("need basis-size > basis-degree >= 0")
        if self.enlarge < 0:
            raise PipelineError("enlarge must be non-negative")
        if self.k < 1:
            raise PipelineError("k must be at least 1")
        if self.preset not in PRESETS:
            raise PipelineError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        if self.support is not None:
            lo, hi = self.support
            if not lo < hi:
                raise PipelineError("support must satisfy lo < hi")
            object.__setattr__(self, "support", (float(lo), float(hi)))

    @property
    def primary_metric(self) -> str:
        """Metric whose dendrogram is cut and embedded."""
        return "MO" if "MO" in self.metrics else self.metrics[0]


@dataclass
class Bundle:
    paths: list
    raw: dict = field(default_factory=dict)
    matrices: dict = field(default_factory=dict)
    dendrograms: dict = field(default_factory=dict)
    primary_metric: str = "MO"
    support: Optional[SupportInterval] = None
    assignment: Optional[ClusterAssignment] = None
    embedding: Optional[Embedding2D] = None
    hulls: dict = field(default_factory=dict)

    @property
    def labels(self) -> list:
        return [p.label for p in self.paths]


def log_returns(paths) -> list[Path]:
    out = []
    for p in paths:
        if np.any(p.values <= 0):
            raise PipelineError(f"series {p.label!r} has non-positive values; no log-returns")
        out.append(Path(np.diff(np.log(p.values)), p.delta, p.label))
    return out


def mo_support(paths, cfg: PipelineConfig) -> SupportInterval:
    if cfg.support is not None:
        return SupportInterval(*cfg.support)
    return detect_support(paths, cfg.enlarge)


def analyze(paths, cfg: PipelineConfig) -> Bundle:
    """Distances, dendrograms, cut, MDS and hulls for a list of paths."""
    paths = list(paths)
    if len(paths) < 2:
        raise PipelineError("need at least two series")
    labels = [p.label for p in paths]
    if len(set(labels)) != len(labels):
        raise PipelineError("series labels must be unique")
    bundle = Bundle(paths, primary_metric=cfg.primary_metric)
    basis = None
    if "MO" in cfg.metrics:
        bundle.support = mo_support(paths, cfg)
        basis = build_basis(bundle.support, cfg.basis_degree, cfg.basis_size)
    for metric in cfg.metrics:
        log.info("computing %s distances", metric)
        raw = distance_matrix(paths, metric, basis if metric == "MO" else None,
                              n_jobs=cfg.n_jobs)
        bundle.raw[metric] = raw
        # identical series give an all-zero matrix, which has no scale
        bundle.matrices[metric] = rescale01(raw) if np.max(raw.d) > 0 else raw
        bundle.dendrograms[metric] = hac_complete(bundle.matrices[metric])

    P = len(paths)
    k = min(cfg.k, P)
    if k < cfg.k:
        log.warning("k=%d exceeds the number of series; using k=%d", cfg.k, k)
    bundle.assignment = cut(bundle.dendrograms[bundle.primary_metric], k)
    if P >= 3:
        bundle.embedding = classical_mds(bundle.matrices[bundle.primary_metric])
        bundle.hulls = cluster_hulls(bundle.embedding, bundle.assignment)
    return bundle


def cluster_hulls(embedding: Embedding2D, assignment: ClusterAssignment,
                  min_size=3) -> dict[int, Ellipse]:
    hulls = {}
    for c in sorted(set(assignment.labels.values())):
        sel = [i for i, l in enumerate(embedding.labels) if assignment.labels[l] == c]
        if len(sel) >= min_size:
            hulls[c] = ellipsoid_hull(embedding.coords[sel])
    return hulls


def run_synthetic(cfg: PipelineConfig) -> Bundle:
    paths = synthetic_suite(cfg.seed, **PRESETS[cfg.preset])
    bundle = analyze(paths, cfg)
    if cfg.out:
        emit_outputs(bundle, cfg.out, cfg)
    return bundle


def run_panel(file, cfg: PipelineConfig, delta=1.0) -> Bundle:
    paths = io.ingest_csv(file, delta=delta)
    if cfg.log_returns:
        paths = log_returns(paths)
    bundle = analyze(paths, cfg)
    if cfg.out:
        emit_outputs(bundle, cfg.out, cfg)
    return bundle


def emit_outputs(bundle: Bundle, directory, cfg: Optional[PipelineConfig] = None) -> list:
    """Write every artifact of ``bundle`` into ``directory``; return the file names."""
    out = FsPath(directory)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)

        def target(name):
            written.append(name)
            return out / name

        io.write_paths_csv(bundle.paths, target("paths.csv"))
        for metric, m in bundle.matrices.items():
            tag = metric.lower()
            io.write_distance_csv(m, target(f"distance_{tag}.csv"))
            io.write_dendrogram_json(bundle.dendrograms[metric], target(f"dendrogram_{tag}.json"))
            plots.dendrogram_svg(bundle.dendrograms[metric], target(f"dendrogram_{tag}.svg"),
                                 title=f"d_{metric}, complete linkage")
        io.write_clusters_csv(bundle.labels, bundle.assignment, target("clusters.csv"))
        if bundle.embedding is not None:
            io.write_mds_csv(bundle.embedding, bundle.assignment, target("mds.csv"))
            io.write_hulls_json(bundle.hulls, bundle.assignment, target("hulls.json"))
            plots.mds_svg(bundle.embedding, bundle.assignment, bundle.hulls, target("mds.svg"),
                          title=f"MDS of d_{bundle.primary_metric}")
        if cfg is not None:
            meta = asdict(cfg)
            meta.pop("out")
            meta.pop("n_jobs")
            if bundle.support is not None:
                meta["support_used"] = [bundle.support.lo, bundle.support.hi]
            with open(target("config.json"), "w") as fh:
                json.dump(meta, fh, indent=2)
                fh.write("\n")
    except OSError as exc:
        raise PipelineError(f"cannot write outputs to {out}: {exc}") from exc
    return written
