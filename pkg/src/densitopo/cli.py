"""Command-line interface: staged subcommands plus a fused pipeline runner.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
invariant violation.  Options may come from a flat ``key = value`` config
file; explicit flags win over the file, the file wins over defaults.
Identical inputs and settings produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import synth
from .clustering import (ClusterConfig, ClusterResult, HALO_RULES, PeakAssignment,
                         SaddleInfo, SaddleTable, cluster_points)
from .density import DensityConfig, DensityEstimate, estimate_density
from .errors import (EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL, EXIT_OK, ConfigError,
                     DataError, InternalInvariantError)
from .intrinsic_dim import DEFAULT_DISCARD_FRACTION, twonn_estimate
from .metrics import (LabeledPartition, confusion_matrix, majority_labels, nmi,
                      purity)
from .neighbors import (DEFAULT_K_MAX, NeighborGraph, PairwiseDistances, PointSet,
                        build_neighbor_graph, ingest_distance_matrix,
                        ingest_knn_file, read_distance_matrix_tsv, read_points_tsv,
                        write_points_tsv)
from .topography import (build_topography, dendrogram_newick, mds_layout,
                         network_dot, single_linkage, topography_to_json)

_FORMATS = ("coords", "matrix", "knn")
_METRIC_CHOICES = ("euclidean", "manhattan")

_CONFIG_CASTS = {
    "input": str, "outdir": str, "out": str, "format": str, "metric": str,
    "k_max": int, "z": float, "d": float, "discard_fraction": float,
    "halo": "bool", "halo_rule": str, "seed": int, "truth": str,
}


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# stage file formats

def density_tsv_text(estimate: DensityEstimate) -> str:
    lines = ["# point_id\tk_hat\tlog_rho\terr\tr_khat\tfallback"]
    for i in range(estimate.n_points):
        lines.append(f"{i}\t{int(estimate.k_hat[i])}\t{_fmt(estimate.log_rho[i])}\t"
                     f"{_fmt(estimate.err[i])}\t{_fmt(estimate.r_khat[i])}\t"
                     f"{int(estimate.fallback[i])}")
    return "\n".join(lines) + "\n"


def read_density_tsv(path: str | Path) -> DensityEstimate:
    rows = _read_tsv_rows(path, n_cols=6)
    n = len(rows)
    est = DensityEstimate(k_hat=np.empty(n, dtype=np.int64),
                          log_rho=np.empty(n), err=np.empty(n),
                          r_khat=np.empty(n), slope=np.full(n, np.nan),
                          fallback=np.zeros(n, dtype=bool))
    for pid, cols in enumerate(rows):
        if int(cols[0]) != pid:
            raise DataError(f"{path}: point ids must be dense and ordered, "
                            f"saw {cols[0]} at row {pid}")
        est.k_hat[pid] = int(cols[1])
        est.log_rho[pid] = float(cols[2])
        est.err[pid] = float(cols[3])
        est.r_khat[pid] = float(cols[4])
        est.fallback[pid] = bool(int(cols[5]))
    return est


def assignment_tsv_text(assignment: PeakAssignment, estimate: DensityEstimate) -> str:
    lines = ["# point_id\tlabel\tis_center\tis_halo\tg\tlog_rho\terr\tk_hat\tdelta\tparent"]
    for i in range(estimate.n_points):
        lines.append(
            f"{i}\t{int(assignment.labels[i])}\t{int(assignment.is_center[i])}\t"
            f"{int(assignment.is_halo[i])}\t{_fmt(assignment.g[i])}\t"
            f"{_fmt(estimate.log_rho[i])}\t{_fmt(estimate.err[i])}\t"
            f"{int(estimate.k_hat[i])}\t{_fmt(assignment.delta[i])}\t"
            f"{int(assignment.parent[i])}")
    return "\n".join(lines) + "\n"


def read_assignment_tsv(path: str | Path) -> tuple[PeakAssignment, DensityEstimate]:
    """Rebuild assignment state (and the density columns it embeds)."""
    rows = _read_tsv_rows(path, n_cols=10)
    n = len(rows)
    labels = np.empty(n, dtype=np.int64)
    is_center = np.zeros(n, dtype=bool)
    is_halo = np.zeros(n, dtype=bool)
    g = np.empty(n)
    delta = np.empty(n)
    parent = np.empty(n, dtype=np.int64)
    est = DensityEstimate(k_hat=np.empty(n, dtype=np.int64), log_rho=np.empty(n),
                          err=np.empty(n), r_khat=np.full(n, np.nan),
                          slope=np.full(n, np.nan), fallback=np.zeros(n, dtype=bool))
    for pid, cols in enumerate(rows):
        if int(cols[0]) != pid:
            raise DataError(f"{path}: point ids must be dense and ordered")
        labels[pid] = int(cols[1])
        is_center[pid] = bool(int(cols[2]))
        is_halo[pid] = bool(int(cols[3]))
        g[pid] = float(cols[4])
        est.log_rho[pid] = float(cols[5])
        est.err[pid] = float(cols[6])
        est.k_hat[pid] = int(cols[7])
        delta[pid] = float(cols[8])
        parent[pid] = int(cols[9])

    center_ids = np.nonzero(is_center)[0]
    order = np.argsort(labels[center_ids], kind="stable")
    centers = [int(c) for c in center_ids[order]]
    if sorted(labels[centers].tolist()) != list(range(len(centers))):
        raise DataError(f"{path}: center rows do not cover labels 0..K-1")
    assignment = PeakAssignment(g=g, delta=delta, parent=parent, labels=labels,
                                is_center=is_center, is_halo=is_halo,
                                centers=centers)
    return assignment, est


def saddles_tsv_text(saddles: SaddleTable) -> str:
    lines = ["# cluster_a\tcluster_b\tlog_rho\terr\tborder_point"]
    for (a, b), info in sorted(saddles.entries.items()):
        lines.append(f"{a}\t{b}\t{_fmt(info.log_rho)}\t{_fmt(info.err)}\t"
                     f"{int(info.border_point)}")
    return "\n".join(lines) + "\n"


def read_saddles_tsv(path: str | Path) -> SaddleTable:
    rows = _read_tsv_rows(path, n_cols=5, allow_empty=True)
    entries = {}
    for cols in rows:
        a, b = int(cols[0]), int(cols[1])
        entries[(min(a, b), max(a, b))] = SaddleInfo(
            log_rho=float(cols[2]), err=float(cols[3]), border_point=int(cols[4]))
    return SaddleTable(entries=entries)


def read_truth_tsv(path: str | Path, n_points: int) -> np.ndarray:
    rows = _read_tsv_rows(path, n_cols=2)
    truth = np.full(n_points, np.iinfo(np.int64).min, dtype=np.int64)
    for cols in rows:
        pid = int(cols[0])
        if not 0 <= pid < n_points:
            raise DataError(f"{path}: point id {pid} out of range 0..{n_points - 1}")
        truth[pid] = int(cols[1])
    missing = np.nonzero(truth == np.iinfo(np.int64).min)[0]
    if missing.size:
        raise DataError(f"{path}: no label for point {int(missing[0])}")
    return truth


def _read_tsv_rows(path: str | Path, n_cols: int,
                   allow_empty: bool = False) -> list[list[str]]:
    path = Path(path)
    rows = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(str(exc)) from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != n_cols:
                raise DataError(f"{path}:{lineno}: expected {n_cols} fields, "
                                f"got {len(parts)}")
            rows.append(parts)
    if not rows and not allow_empty:
        raise DataError(f"{path}: empty input file")
    return rows


# ---------------------------------------------------------------------------
# configuration

@dataclass
class RunConfig:
    """Everything that determines a fused pipeline run."""

    input: str
    outdir: str
    format: str = "coords"
    metric: str = "euclidean"
    k_max: int | None = None
    z: float = 1.0
    d: float | None = None
    discard_fraction: float = DEFAULT_DISCARD_FRACTION
    halo: bool = True
    halo_rule: str = "highest"
    seed: int = 0
    truth: str | None = None

    def echo_text(self) -> str:
        pairs = {
            "input": self.input, "outdir": self.outdir, "format": self.format,
            "metric": self.metric, "k_max": self.k_max, "z": _fmt(self.z),
            "d": None if self.d is None else _fmt(self.d),
            "discard_fraction": _fmt(self.discard_fraction),
            "halo": str(bool(self.halo)).lower(), "halo_rule": self.halo_rule,
            "seed": self.seed, "truth": self.truth,
        }
        lines = [f"{key} = {value}" for key, value in sorted(pairs.items())
                 if value is not None]
        return "\n".join(lines) + "\n"


def read_config_file(path: str | Path) -> dict:
    """Parse a flat ``key = value`` config file with '#' comments."""
    out = {}
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(exc)) from None
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _CONFIG_CASTS:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            cast = _CONFIG_CASTS[key]
            try:
                if cast == "bool":
                    lowered = value.lower()
                    if lowered in ("true", "1", "yes"):
                        out[key] = True
                    elif lowered in ("false", "0", "no"):
                        out[key] = False
                    else:
                        raise ValueError(f"not a boolean: {value!r}")
                else:
                    out[key] = cast(value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return out


def _merged(args: argparse.Namespace, key: str, default):
    value = getattr(args, key, None)
    if value is None and getattr(args, "config", None):
        value = _config_cache(args).get(key)
    return default if value is None else value


def _config_cache(args: argparse.Namespace) -> dict:
    if not hasattr(args, "_config_values"):
        args._config_values = read_config_file(args.config) if args.config else {}
    return args._config_values


# ---------------------------------------------------------------------------
# shared stage helpers

def _load_graph(args: argparse.Namespace, need_pairwise: bool):
    """Ingest per --format and return (graph, pairwise, n, input_path)."""
    fmt = _merged(args, "format", "coords")
    if fmt not in _FORMATS:
        raise ConfigError(f"format must be one of {_FORMATS}, got {fmt!r}")
    path = _merged(args, "input", None)
    if path is None:
        raise ConfigError("--input is required")
    metric = _merged(args, "metric", "euclidean")
    if metric not in _METRIC_CHOICES:
        raise ConfigError(f"metric must be one of {_METRIC_CHOICES}, got {metric!r}")

    if fmt == "coords":
        points = read_points_tsv(path)
        k_max = int(_merged(args, "k_max", min(points.n_points - 1, DEFAULT_K_MAX)))
        graph = build_neighbor_graph(points, k_max=k_max, metric=metric)
        pairwise = PairwiseDistances(coords=points.coords, metric=metric)
    elif fmt == "matrix":
        matrix = read_distance_matrix_tsv(path)
        k_max = int(_merged(args, "k_max", min(matrix.shape[0] - 1, DEFAULT_K_MAX)))
        graph = ingest_distance_matrix(matrix, k_max=k_max)
        pairwise = PairwiseDistances(matrix=matrix)
    else:
        if need_pairwise:
            raise ConfigError(
                "this stage needs exact distances between arbitrary points; "
                "a kNN file cannot provide them, pass coordinates or a distance matrix")
        graph = ingest_knn_file(path)
        pairwise = None
    return graph, pairwise, graph.n_points, path


def _resolve_dimension(args: argparse.Namespace, graph: NeighborGraph) -> float:
    d = _merged(args, "d", None)
    if d is not None:
        d = float(d)
        if d <= 0:
            raise ConfigError(f"intrinsic dimension override must be > 0, got {d}")
        return d
    frac = float(_merged(args, "discard_fraction", DEFAULT_DISCARD_FRACTION))
    return twonn_estimate(graph, discard_fraction=frac).d_hat


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# fused pipeline

def run_pipeline(config: RunConfig) -> dict:
    """Run ingest, dimension, density, clustering, and topography stages.

    Writes density.tsv, assignment.tsv, topography.json, dendrogram.nwk,
    and network.dot (plus run_config.txt and, with a truth file,
    confusion.tsv and purity.tsv) into the output directory, prints a one
    line summary, and returns the summary values.  On failure partial
    outputs are removed and the error names the failing stage.
    """
    if config.format not in ("coords", "matrix"):
        raise ConfigError(
            "the fused pipeline needs exact distances between arbitrary points; "
            "a kNN file cannot provide them, pass coordinates or a distance matrix")
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []
    stage = "ingest"
    try:
        if config.format == "coords":
            points = read_points_tsv(config.input)
            n = points.n_points
            k_max = config.k_max if config.k_max is not None else min(n - 1, DEFAULT_K_MAX)
            graph = build_neighbor_graph(points, k_max=int(k_max), metric=config.metric)
            pairwise = PairwiseDistances(coords=points.coords, metric=config.metric)
        else:
            matrix = read_distance_matrix_tsv(config.input)
            n = matrix.shape[0]
            k_max = config.k_max if config.k_max is not None else min(n - 1, DEFAULT_K_MAX)
            graph = ingest_distance_matrix(matrix, k_max=int(k_max))
            pairwise = PairwiseDistances(matrix=matrix)

        stage = "intrinsic-dim"
        if config.d is not None:
            d_hat = float(config.d)
        else:
            d_hat = twonn_estimate(graph, discard_fraction=config.discard_fraction).d_hat

        stage = "density"
        estimate = estimate_density(graph, DensityConfig(d=d_hat))
        density_path = outdir / "density.tsv"
        density_path.write_text(density_tsv_text(estimate), encoding="utf-8")
        created.append(density_path)

        stage = "cluster"
        result = cluster_points(graph, estimate, pairwise,
                                ClusterConfig(z=config.z, halo_rule=config.halo_rule,
                                              compute_halo=config.halo))
        assignment = result.assignment
        assignment_path = outdir / "assignment.tsv"
        assignment_path.write_text(assignment_tsv_text(assignment, estimate),
                                   encoding="utf-8")
        created.append(assignment_path)

        stage = "topography"
        topo = build_topography(assignment, result.saddles, estimate)
        dendro = single_linkage(topo)
        layout = mds_layout(topo)
        topo_path = outdir / "topography.json"
        topo_path.write_text(topography_to_json(topo, dendro, layout) + "\n",
                             encoding="utf-8")
        created.append(topo_path)
        newick_path = outdir / "dendrogram.nwk"
        newick_path.write_text(dendrogram_newick(dendro) + "\n", encoding="utf-8")
        created.append(newick_path)
        dot_path = outdir / "network.dot"
        dot_path.write_text(network_dot(topo, layout), encoding="utf-8")
        created.append(dot_path)

        summary = {
            "n": n, "d_hat": d_hat, "n_clusters": assignment.n_clusters,
            "n_halo": int(assignment.is_halo.sum()),
        }

        if config.truth is not None:
            stage = "evaluate"
            truth = read_truth_tsv(config.truth, n)
            include = ~assignment.is_halo
            if not include.any():
                raise DataError("every point is halo; nothing to evaluate")
            part = LabeledPartition(predicted=assignment.labels, truth=truth,
                                    include=include)
            summary["nmi"] = nmi(part)
            conf_path = outdir / "confusion.tsv"
            conf_path.write_text(_confusion_text(part), encoding="utf-8")
            created.append(conf_path)
            purity_path = outdir / "purity.tsv"
            purity_path.write_text(_purity_text(part), encoding="utf-8")
            created.append(purity_path)

        config_path = outdir / "run_config.txt"
        config_path.write_text(config.echo_text(), encoding="utf-8")
        created.append(config_path)
    except (ConfigError, DataError, InternalInvariantError) as exc:
        for p in created:
            p.unlink(missing_ok=True)
        raise type(exc)(f"stage {stage}: {exc}") from None
    except BaseException:
        for p in created:
            p.unlink(missing_ok=True)
        raise

    line = (f"n={summary['n']} d_hat={_fmt(summary['d_hat'])} "
            f"n_clusters={summary['n_clusters']} n_halo={summary['n_halo']}")
    if "nmi" in summary:
        line += f" nmi={_fmt(summary['nmi'])}"
    print(line)
    return summary


def _confusion_text(part: LabeledPartition) -> str:
    matrix, labels = confusion_matrix(part)
    lines = ["# truth\\pred\t" + "\t".join(str(int(v)) for v in labels)]
    for row_label, row in zip(labels, matrix):
        lines.append(str(int(row_label)) + "\t" + "\t".join(str(int(c)) for c in row))
    return "\n".join(lines) + "\n"


def _purity_text(part: LabeledPartition) -> str:
    major = majority_labels(part)
    pure = purity(part)
    pred, _ = part.active()
    lines = ["# cluster\tmajority_label\tpurity\tpopulation"]
    for cluster in sorted(pure):
        pop = int((pred == cluster).sum())
        lines.append(f"{cluster}\t{major[cluster]}\t{_fmt(pure[cluster])}\t{pop}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands

def _cmd_estimate_id(args) -> int:
    graph, _, _, _ = _load_graph(args, need_pairwise=False)
    frac = float(_merged(args, "discard_fraction", DEFAULT_DISCARD_FRACTION))
    est = twonn_estimate(graph, discard_fraction=frac)
    print(f"{_fmt(est.d_hat)}\t{est.n_used}")
    return EXIT_OK


def _cmd_density(args) -> int:
    graph, _, _, _ = _load_graph(args, need_pairwise=False)
    d = _resolve_dimension(args, graph)
    estimate = estimate_density(graph, DensityConfig(d=d))
    _emit(density_tsv_text(estimate), args.out)
    return EXIT_OK


def _run_cluster_stage(args) -> tuple[ClusterResult, DensityEstimate]:
    graph, pairwise, _, _ = _load_graph(args, need_pairwise=True)
    if args.density is not None:
        estimate = read_density_tsv(args.density)
        if estimate.n_points != graph.n_points:
            raise DataError(
                f"density file covers {estimate.n_points} points but the input "
                f"has {graph.n_points}")
    else:
        d = _resolve_dimension(args, graph)
        estimate = estimate_density(graph, DensityConfig(d=d))
    cfg = ClusterConfig(z=float(_merged(args, "z", 1.0)),
                        halo_rule=_merged(args, "halo_rule", "highest"),
                        compute_halo=bool(_merged(args, "halo", True)))
    return cluster_points(graph, estimate, pairwise, cfg), estimate


def _cmd_cluster(args) -> int:
    result, estimate = _run_cluster_stage(args)
    _emit(assignment_tsv_text(result.assignment, estimate), args.out)
    if args.saddles_out is not None:
        _emit(saddles_tsv_text(result.saddles), args.saddles_out)
    return EXIT_OK


def _cmd_topography(args) -> int:
    staged = args.assignment is not None or args.saddles is not None
    if staged:
        if args.assignment is None or args.saddles is None:
            raise ConfigError("staged topography needs both --assignment and --saddles")
        assignment, estimate = read_assignment_tsv(args.assignment)
        saddles = read_saddles_tsv(args.saddles)
    else:
        result, estimate = _run_cluster_stage(args)
        assignment, saddles = result.assignment, result.saddles

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    topo = build_topography(assignment, saddles, estimate)
    dendro = single_linkage(topo)
    layout = mds_layout(topo)
    (outdir / "topography.json").write_text(
        topography_to_json(topo, dendro, layout) + "\n", encoding="utf-8")
    (outdir / "dendrogram.nwk").write_text(dendrogram_newick(dendro) + "\n",
                                           encoding="utf-8")
    (outdir / "network.dot").write_text(network_dot(topo, layout), encoding="utf-8")
    if layout is None:
        print("layout skipped: fewer than two clusters")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    assignment, _ = read_assignment_tsv(args.assignment)
    n = assignment.labels.shape[0]
    truth = read_truth_tsv(args.truth, n)
    include = ~assignment.is_halo if args.exclude_halo else np.ones(n, dtype=bool)
    if not include.any():
        raise DataError("every point is halo; nothing to evaluate")
    part = LabeledPartition(predicted=assignment.labels, truth=truth, include=include)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "confusion.tsv").write_text(_confusion_text(part), encoding="utf-8")
    (outdir / "purity.tsv").write_text(_purity_text(part), encoding="utf-8")
    print(f"nmi={_fmt(nmi(part))}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    kind = args.kind
    if kind == "gmm":
        points, labels = synth.synth_gmm(k=args.k, n=args.n, dim=args.dim,
                                         separation=args.separation, seed=args.seed)
    elif kind == "spirals":
        points, labels = synth.synth_spirals(n=args.n, noise=args.noise,
                                             seed=args.seed)
    else:
        points, labels = synth.synth_uniform(n=args.n, dim=args.dim,
                                             seed=args.seed), None
    write_points_tsv(points, args.out)
    if args.truth_out is not None:
        if labels is None:
            raise ConfigError("uniform data has no reference labels")
        with open(args.truth_out, "w", encoding="utf-8") as fh:
            for pid, label in enumerate(labels):
                fh.write(f"{pid}\t{int(label)}\n")
    return EXIT_OK


def _cmd_run(args) -> int:
    outdir = _merged(args, "outdir", None)
    if outdir is None:
        raise ConfigError("--outdir is required")
    path = _merged(args, "input", None)
    if path is None:
        raise ConfigError("--input is required")
    d = _merged(args, "d", None)
    k_max = _merged(args, "k_max", None)
    config = RunConfig(
        input=str(path), outdir=str(outdir),
        format=_merged(args, "format", "coords"),
        metric=_merged(args, "metric", "euclidean"),
        k_max=None if k_max is None else int(k_max),
        z=float(_merged(args, "z", 1.0)),
        d=None if d is None else float(d),
        discard_fraction=float(_merged(args, "discard_fraction",
                                       DEFAULT_DISCARD_FRACTION)),
        halo=bool(_merged(args, "halo", True)),
        halo_rule=_merged(args, "halo_rule", "highest"),
        seed=int(_merged(args, "seed", 0)),
        truth=_merged(args, "truth", None),
    )
    run_pipeline(config)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _add_common(p: argparse.ArgumentParser, formats=_FORMATS) -> None:
    p.add_argument("--input", help="input data file (TSV)")
    p.add_argument("--format", choices=list(formats), default=None,
                   help="input layout (default coords)")
    p.add_argument("--metric", choices=list(_METRIC_CHOICES), default=None)
    p.add_argument("--k-max", dest="k_max", type=int, default=None,
                   help="neighbors per point (default min(n-1, 512))")
    p.add_argument("--config", default=None,
                   help="flat key = value config file; flags win over it")


def _add_cluster_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--z", type=float, default=None,
                   help="merge significance threshold (default 1.0)")
    p.add_argument("--d", type=float, default=None,
                   help="intrinsic dimension override (default: estimate)")
    p.add_argument("--discard-fraction", dest="discard_fraction", type=float,
                   default=None, help="tail fraction dropped by the id estimator")
    p.add_argument("--halo", dest="halo", action=argparse.BooleanOptionalAction,
                   default=None, help="flag low-density cluster members")
    p.add_argument("--halo-rule", dest="halo_rule",
                   choices=list(HALO_RULES), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="densitopo",
        description="Density topography of point clouds: adaptive density "
                    "estimates, density-peak clustering, saddle analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate-id", help="estimate the intrinsic dimension")
    _add_common(p)
    p.add_argument("--discard-fraction", dest="discard_fraction", type=float,
                   default=None)
    p.set_defaults(handler=_cmd_estimate_id)

    p = sub.add_parser("density", help="adaptive density estimate per point")
    _add_common(p)
    p.add_argument("--d", type=float, default=None)
    p.add_argument("--discard-fraction", dest="discard_fraction", type=float,
                   default=None)
    p.add_argument("--out", default=None, help="density TSV (default stdout)")
    p.set_defaults(handler=_cmd_density)

    p = sub.add_parser("cluster", help="density-peak clustering")
    _add_common(p, formats=("coords", "matrix"))
    _add_cluster_opts(p)
    p.add_argument("--density", default=None,
                   help="precomputed density TSV (skips the density stage)")
    p.add_argument("--out", default=None, help="assignment TSV (default stdout)")
    p.add_argument("--saddles-out", dest="saddles_out", default=None,
                   help="also write the saddle table TSV")
    p.set_defaults(handler=_cmd_cluster)

    p = sub.add_parser("topography", help="saddle matrix, dendrogram, network")
    _add_common(p, formats=("coords", "matrix"))
    _add_cluster_opts(p)
    p.add_argument("--density", default=None)
    p.add_argument("--assignment", default=None,
                   help="precomputed assignment TSV (with --saddles)")
    p.add_argument("--saddles", default=None, help="precomputed saddle TSV")
    p.add_argument("--outdir", required=True)
    p.set_defaults(handler=_cmd_topography)

    p = sub.add_parser("evaluate", help="compare an assignment against truth labels")
    p.add_argument("--assignment", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--exclude-halo", dest="exclude_halo", action="store_true")
    p.add_argument("--outdir", default=".")
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("synth", help="generate synthetic datasets")
    p.add_argument("kind", choices=["gmm", "spirals", "uniform"])
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--separation", type=float, default=6.0)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out", dest="truth_out", default=None)
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("run", help="fused pipeline into an output directory")
    _add_common(p, formats=("coords", "matrix"))
    _add_cluster_opts(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--truth", default=None)
    p.add_argument("--outdir", default=None)
    p.set_defaults(handler=_cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InternalInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
