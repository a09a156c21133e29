"""Command-line interface.

    diffclust run-synthetic --seed 42 --out out/synthetic
    diffclust run-panel quotes.csv --k 4 --out out/panel
    diffclust simulate --seed 1 --out out/sim
    diffclust distances out/sim/paths.csv --metric MO --delta 0.1 --out out/sim
    diffclust cluster out/sim/distance_mo.csv --k 4 --out out/sim
    diffclust mds out/sim/distance_mo.csv --clusters out/sim/clusters.csv --out out/sim
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path as FsPath

from . import io, plots
from .basis import build_basis
from .clustering import classical_mds, cut, hac_complete
from .errors import DiffclustError
from .metrics import METRICS, distance_matrix, rescale01
from .pipeline import (PipelineConfig, cluster_hulls, log_returns, mo_support, run_panel,
                       run_synthetic)
from .sde import PRESETS, synthetic_suite


def _metrics(values):
    if not values:
        return METRICS
    out = []
    for v in values:
        out.extend(x.strip().upper() for x in v.split(",") if x.strip())
    return tuple(out)


def _support(text):
    lo, hi = (float(x) for x in text.split(","))
    return lo, hi


def _add_basis_args(p):
    p.add_argument("--metric", action="append",
                   help="MO, STS, EUC or DTW; repeat or comma-separate (default: all)")
    p.add_argument("--basis-degree", type=int, default=10)
    p.add_argument("--basis-size", type=int, default=20)
    p.add_argument("--enlarge", type=float, default=0.10,
                   help="fractional widening of the observed range for the MO basis")
    p.add_argument("--support", type=_support, default=None, metavar="LO,HI",
                   help="fixed MO basis support instead of the observed range")
    p.add_argument("--jobs", type=int, default=1, help="threads for the distance matrix")


def _config(args, **extra) -> PipelineConfig:
    return PipelineConfig(
        metrics=_metrics(args.metric), basis_degree=args.basis_degree,
        basis_size=args.basis_size, enlarge=args.enlarge, support=args.support,
        k=getattr(args, "k", 4), seed=getattr(args, "seed", 0),
        log_returns=getattr(args, "log_returns", False), n_jobs=args.jobs,
        out=args.out, **extra)


def cmd_simulate(args):
    paths = synthetic_suite(args.seed, **PRESETS[args.preset])
    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_paths_csv(paths, out / "paths.csv")
    print(out / "paths.csv")


def cmd_distances(args):
    cfg = _config(args)
    paths = io.ingest_csv(args.panel, delta=args.delta)
    if cfg.log_returns:
        paths = log_returns(paths)
    basis = None
    if "MO" in cfg.metrics:
        basis = build_basis(mo_support(paths, cfg), cfg.basis_degree, cfg.basis_size)
    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for metric in cfg.metrics:
        m = distance_matrix(paths, metric, basis if metric == "MO" else None, n_jobs=cfg.n_jobs)
        if args.rescale:
            m = rescale01(m)
        target = out / f"distance_{metric.lower()}.csv"
        io.write_distance_csv(m, target)
        print(target)


def cmd_cluster(args):
    m = io.read_distance_csv(args.distance)
    den = hac_complete(m)
    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tag = m.metric_name.lower()
    io.write_dendrogram_json(den, out / f"dendrogram_{tag}.json")
    plots.dendrogram_svg(den, out / f"dendrogram_{tag}.svg", title=f"d_{m.metric_name}")
    io.write_clusters_csv(m.labels, cut(den, min(args.k, m.size)), out / "clusters.csv")
    print(out / f"dendrogram_{tag}.json")


def cmd_mds(args):
    m = io.read_distance_csv(args.distance)
    emb = classical_mds(m)
    assignment = io.read_clusters_csv(args.clusters) if args.clusters else None
    hulls = cluster_hulls(emb, assignment) if assignment else {}
    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_mds_csv(emb, assignment, out / "mds.csv")
    if assignment:
        io.write_hulls_json(hulls, assignment, out / "hulls.json")
    plots.mds_svg(emb, assignment, hulls, out / "mds.svg", title=f"MDS of d_{m.metric_name}")
    print(out / "mds.csv")


def cmd_run_synthetic(args):
    bundle = run_synthetic(_config(args, preset=args.preset))
    print(f"{args.out}: {len(bundle.paths)} paths, metrics {', '.join(bundle.matrices)}")


def cmd_run_panel(args):
    bundle = run_panel(args.panel, _config(args), delta=args.delta)
    print(f"{args.out}: {len(bundle.paths)} series, metrics {', '.join(bundle.matrices)}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diffclust",
                                     description="Cluster sampled diffusion paths.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate the ten-path synthetic suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=sorted(PRESETS), default="full")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("distances", help="distance matrices for a panel CSV")
    p.add_argument("panel")
    _add_basis_args(p)
    p.add_argument("--delta", type=float, default=1.0, help="sampling mesh of the panel")
    p.add_argument("--log-returns", action="store_true")
    p.add_argument("--no-rescale", dest="rescale", action="store_false")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_distances)

    p = sub.add_parser("cluster", help="complete-linkage dendrogram and cut")
    p.add_argument("distance")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("mds", help="classical MDS of a distance matrix")
    p.add_argument("distance")
    p.add_argument("--clusters", help="clusters.csv for symbols and hulls")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mds)

    p = sub.add_parser("run-synthetic", help="full synthetic study")
    _add_basis_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", choices=sorted(PRESETS), default="full")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run_synthetic)

    p = sub.add_parser("run-panel", help="full pipeline on a panel CSV")
    p.add_argument("panel")
    _add_basis_args(p)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--log-returns", action="store_true")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run_panel)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (DiffclustError, ValueError, OSError) as exc:
        print(f"diffclust: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
