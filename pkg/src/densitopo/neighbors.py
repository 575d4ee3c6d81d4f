"""Point ingestion and exact nearest-neighbor graph construction.

All downstream estimators consume a :class:`NeighborGraph`: per point, the
ids and distances of its ``k_max`` nearest neighbors sorted by increasing
distance, with ties broken by ascending point id so that rebuilding the
graph from identical input bytes yields identical output bytes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, DataError

DEFAULT_K_MAX = 512

# public metric name -> scipy metric name
_METRICS = {"euclidean": "euclidean", "manhattan": "cityblock"}


@dataclass(frozen=True)
class PointSet:
    """A point cloud with dense integer ids 0..n-1 (row order)."""

    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2:
            raise DataError(f"coordinates must be a 2-D array, got shape {coords.shape}")
        if coords.shape[0] < 2:
            raise DataError(f"need at least 2 points, got {coords.shape[0]}")
        if coords.shape[1] < 1:
            raise DataError("need at least 1 coordinate column")
        bad = ~np.isfinite(coords)
        if bad.any():
            row = int(np.nonzero(bad.any(axis=1))[0][0])
            raise DataError(f"non-finite coordinate at row {row}")
        object.__setattr__(self, "coords", coords)

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]

    @property
    def embedding_dim(self) -> int:
        return self.coords.shape[1]

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.n_points, dtype=np.int64)


@dataclass(frozen=True)
class NeighborGraph:
    """Per-point sorted neighbor lists (self excluded).

    ``neighbor_ids[i, l]`` is the (l+1)-th nearest neighbor of point i and
    ``neighbor_dists[i, l]`` its distance; rows are sorted by (distance, id).
    """

    neighbor_ids: np.ndarray
    neighbor_dists: np.ndarray
    metric_tag: str

    def __post_init__(self):
        ids = np.asarray(self.neighbor_ids, dtype=np.int64)
        dists = np.asarray(self.neighbor_dists, dtype=np.float64)
        if ids.ndim != 2 or ids.shape != dists.shape:
            raise DataError("neighbor id and distance arrays must share a 2-D shape")
        n, k_max = ids.shape
        if n < 2 or k_max < 1 or k_max > n - 1:
            raise DataError(f"invalid neighbor graph shape ({n}, {k_max})")
        if not np.isfinite(dists).all():
            raise DataError("non-finite neighbor distance")
        if (dists < 0).any():
            raise DataError("negative neighbor distance")
        if (np.diff(dists, axis=1) < 0).any():
            raise DataError("neighbor distances must be non-decreasing per point")
        if (ids < 0).any() or (ids >= n).any():
            raise DataError("neighbor id out of range")
        if (ids == np.arange(n, dtype=np.int64)[:, None]).any():
            raise DataError("a point may not list itself as a neighbor")
        object.__setattr__(self, "neighbor_ids", ids)
        object.__setattr__(self, "neighbor_dists", dists)

    @property
    def n_points(self) -> int:
        return self.neighbor_ids.shape[0]

    @property
    def k_max(self) -> int:
        return self.neighbor_ids.shape[1]


class PairwiseDistances:
    """Exact distance rows on demand, from coordinates or a full matrix.

    Needed by stages that may have to measure the distance between an
    arbitrary pair, which truncated kNN lists cannot provide.
    """

    def __init__(self, coords: np.ndarray | None = None,
                 matrix: np.ndarray | None = None, metric: str = "euclidean"):
        if (coords is None) == (matrix is None):
            raise ConfigError("provide exactly one of coordinates or a distance matrix")
        if coords is not None and metric not in _METRICS:
            raise ConfigError(f"unknown metric {metric!r}")
        self._coords = None if coords is None else np.asarray(coords, dtype=np.float64)
        self._matrix = None if matrix is None else np.asarray(matrix, dtype=np.float64)
        self._metric = _METRICS.get(metric, metric)

    @property
    def n_points(self) -> int:
        src = self._coords if self._coords is not None else self._matrix
        return src.shape[0]

    def row(self, i: int) -> np.ndarray:
        """Distances from point i to every point (self included, = 0)."""
        if self._matrix is not None:
            return self._matrix[i]
        return cdist(self._coords[i:i + 1], self._coords, metric=self._metric)[0]


def _exact_knn_rows(block: np.ndarray, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Select the k_max nearest per row of a distance block, exactly.

    Ties are broken by ascending candidate index.  argpartition alone does
    not respect the tie rule at the selection boundary, so rows where the
    boundary distance is shared re-select from the full tied candidate set.
    """
    m, n = block.shape
    kth = min(k_max - 1, n - 1)
    part = np.argpartition(block, kth, axis=1)[:, :k_max]
    part_d = np.take_along_axis(block, part, axis=1)
    thr = part_d.max(axis=1)
    tied = (block <= thr[:, None]).sum(axis=1) > k_max

    ids = np.empty((m, k_max), dtype=np.int64)
    dists = np.empty((m, k_max), dtype=np.float64)
    for r in range(m):
        if tied[r]:
            cand = np.nonzero(block[r] <= thr[r])[0]
        else:
            cand = np.sort(part[r])
        order = np.argsort(block[r, cand], kind="stable")[:k_max]
        pick = cand[order]
        ids[r] = pick
        dists[r] = block[r, pick]
    return ids, dists


def build_neighbor_graph(points: PointSet, k_max: int = DEFAULT_K_MAX,
                         metric: str = "euclidean") -> NeighborGraph:
    """Compute the exact kNN graph of a point set by brute force.

    Args:
        points: input point cloud.
        k_max: neighbors kept per point; must satisfy 1 <= k_max < n.
        metric: "euclidean" or "manhattan".

    Returns:
        NeighborGraph with rows sorted by (distance, ascending id).
    """
    if metric not in _METRICS:
        raise ConfigError(f"unknown metric {metric!r}; choose euclidean or manhattan")
    n = points.n_points
    if not 1 <= k_max <= n - 1:
        raise ConfigError(f"k_max must be in [1, n-1] = [1, {n - 1}], got {k_max}")

    coords = points.coords
    ids = np.empty((n, k_max), dtype=np.int64)
    dists = np.empty((n, k_max), dtype=np.float64)
    # bound the scratch block to ~16M doubles
    step = max(1, (1 << 24) // n)
    for s in range(0, n, step):
        e = min(n, s + step)
        block = cdist(coords[s:e], coords, metric=_METRICS[metric])
        block[np.arange(e - s), np.arange(s, e)] = np.inf  # exclude self
        bids, bd = _exact_knn_rows(block, k_max)
        ids[s:e] = bids
        dists[s:e] = bd
    return NeighborGraph(ids, dists, metric_tag=metric)


def ingest_distance_matrix(matrix: np.ndarray, k_max: int) -> NeighborGraph:
    """Build a NeighborGraph from a full pairwise distance matrix.

    The matrix must be square, non-negative, zero on the diagonal, and
    symmetric within 1e-9; asymmetry beyond that is rejected naming the
    worst entry pair.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DataError(f"distance matrix must be square, got shape {m.shape}")
    n = m.shape[0]
    if n < 2:
        raise DataError("distance matrix needs at least 2 points")
    if not np.isfinite(m).all():
        raise DataError("non-finite entry in distance matrix")
    if (m < 0).any():
        raise DataError("negative entry in distance matrix")
    if np.abs(np.diagonal(m)).max() > 1e-9:
        raise DataError("distance matrix diagonal must be zero")
    gap = np.abs(m - m.T)
    worst = float(gap.max())
    if worst > 1e-9:
        i, j = np.unravel_index(int(gap.argmax()), gap.shape)
        raise DataError(
            f"distance matrix asymmetric: |d[{i},{j}] - d[{j},{i}]| = {worst:g} > 1e-9")
    if not 1 <= k_max <= n - 1:
        raise ConfigError(f"k_max must be in [1, n-1] = [1, {n - 1}], got {k_max}")

    work = m.copy()
    np.fill_diagonal(work, np.inf)
    order = np.argsort(work, axis=1, kind="stable")[:, :k_max]
    dists = np.take_along_axis(work, order, axis=1)
    return NeighborGraph(order, dists, metric_tag="precomputed")


def ingest_knn_file(path: str | Path) -> NeighborGraph:
    """Parse a kNN TSV (point_id, neighbor_id, distance per row).

    Rows must be grouped by point id with distances non-decreasing inside
    each group; every point needs the same number of neighbors.  Malformed
    rows are reported with their line number.
    """
    path = Path(path)
    metric_tag = "unknown"
    rows: list[tuple[int, int, float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                stripped = line[1:].strip()
                if stripped.startswith("metric="):
                    metric_tag = stripped.split("=", 1)[1].strip()
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 tab-separated fields, "
                                f"got {len(parts)}")
            try:
                pid = int(parts[0])
                nid = int(parts[1])
                dist = float(parts[2])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            if not np.isfinite(dist) or dist < 0:
                raise DataError(f"{path}:{lineno}: invalid distance {parts[2]}")
            if pid == nid:
                raise DataError(f"{path}:{lineno}: point {pid} lists itself as neighbor")
            rows.append((lineno, pid, nid, dist))
    if not rows:
        raise DataError(f"{path}: empty kNN file")

    groups: dict[int, list[tuple[int, float]]] = {}
    seen_order: list[int] = []
    prev_pid = None
    for lineno, pid, nid, dist in rows:
        if pid != prev_pid:
            if pid in groups:
                raise DataError(f"{path}:{lineno}: rows for point {pid} "
                                f"are not contiguous")
            groups[pid] = []
            seen_order.append(pid)
            prev_pid = pid
        grp = groups[pid]
        if grp and dist < grp[-1][1]:
            raise DataError(f"{path}:{lineno}: distances for point {pid} "
                            f"decrease ({dist!r} after {grp[-1][1]!r})")
        grp.append((nid, dist))

    n = max(groups) + 1
    if sorted(groups) != list(range(n)):
        missing = next(i for i in range(n) if i not in groups)
        raise DataError(f"{path}: missing neighbor rows for point {missing}")
    k_max = len(groups[seen_order[0]])
    if any(len(g) != k_max for g in groups.values()):
        raise DataError(f"{path}: inconsistent neighbor count across points")

    ids = np.empty((n, k_max), dtype=np.int64)
    dists = np.empty((n, k_max), dtype=np.float64)
    for pid in range(n):
        ids[pid] = [nid for nid, _ in groups[pid]]
        dists[pid] = [d for _, d in groups[pid]]
    return NeighborGraph(ids, dists, metric_tag=metric_tag)


def export_knn_file(graph: NeighborGraph, path: str | Path) -> None:
    """Write a NeighborGraph in the kNN TSV format (round-trips exactly)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# metric={graph.metric_tag}\n")
        for i in range(graph.n_points):
            for nid, dist in zip(graph.neighbor_ids[i], graph.neighbor_dists[i]):
                fh.write(f"{i}\t{int(nid)}\t{float(dist)!r}\n")


def _loadtxt(path: str | Path) -> np.ndarray:
    try:
        with warnings.catch_warnings():
            # an empty file is reported as a DataError, not a numpy warning
            warnings.simplefilter("ignore", UserWarning)
            arr = np.loadtxt(path, comments="#", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    except OSError as exc:
        raise DataError(str(exc)) from None
    if arr.size == 0:
        raise DataError(f"{path}: empty input file")
    return arr


def read_points_tsv(path: str | Path) -> PointSet:
    """Read a coordinate TSV (one point per row, '#' lines ignored)."""
    return PointSet(_loadtxt(path))


def read_distance_matrix_tsv(path: str | Path) -> np.ndarray:
    """Read a full pairwise distance matrix from TSV."""
    return _loadtxt(path)


def write_points_tsv(points: np.ndarray, path: str | Path) -> None:
    """Write coordinates as TSV with shortest round-trip float formatting."""
    arr = np.asarray(points, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for row in arr:
            fh.write("\t".join(repr(float(x)) for x in row) + "\n")
