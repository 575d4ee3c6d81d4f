"""Density-peak detection, point assignment, saddle analysis, and merging.

Peaks are local maxima of the error-adjusted log density g; every other
point follows its nearest higher-g parent, which partitions the sample
into one tree per peak.  Contacting clusters are then merged whenever the
density gap between a peak and the connecting saddle is not significant
against the combined error bars, and low-density members below the saddle
level can be flagged as halo.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .density import DensityEstimate
from .errors import ConfigError, DegenerateDataError, InternalInvariantError
from .neighbors import NeighborGraph, PairwiseDistances

HALO_RULES = ("highest", "lowest", "global-lowest")

_CHUNK = 2048


@dataclass
class ClusterConfig:
    """Merging and halo settings.

    z is the significance threshold of the peak-vs-saddle test: larger z
    merges more aggressively, z = 0 keeps every density peak that stands
    above its saddles at all.
    """

    z: float = 1.0
    halo_rule: str = "highest"
    compute_halo: bool = True

    def __post_init__(self):
        if not (self.z >= 0.0):
            raise ConfigError(f"z must be >= 0, got {self.z}")
        if self.halo_rule not in HALO_RULES:
            raise ConfigError(f"halo_rule must be one of {HALO_RULES}, got {self.halo_rule!r}")


class SaddleInfo(NamedTuple):
    log_rho: float
    err: float
    border_point: int


@dataclass
class SaddleTable:
    """Sparse symmetric table of saddle densities between cluster pairs.

    Keys are ordered pairs (a, b) with a < b of final cluster labels.
    """

    entries: dict[tuple[int, int], SaddleInfo] = field(default_factory=dict)

    def get(self, a: int, b: int) -> SaddleInfo | None:
        return self.entries.get((min(a, b), max(a, b)))

    def pairs_of(self, c: int):
        for (a, b), info in self.entries.items():
            if a == c or b == c:
                yield (a, b), info


@dataclass
class PeakAssignment:
    """Full per-point clustering state (index = point id)."""

    g: np.ndarray
    delta: np.ndarray
    parent: np.ndarray
    labels: np.ndarray
    is_center: np.ndarray
    is_halo: np.ndarray
    centers: list[int]

    @property
    def n_clusters(self) -> int:
        return len(self.centers)


@dataclass
class ClusterResult:
    assignment: PeakAssignment
    saddles: SaddleTable
    merge_log: list[dict]
    putative_centers: list[int]


def compute_g(estimate: DensityEstimate) -> np.ndarray:
    """Error-adjusted log density used for all peak comparisons."""
    return estimate.log_rho + estimate.err


def compute_delta_parent(g: np.ndarray, graph: NeighborGraph,
                         pairwise: PairwiseDistances) -> tuple[np.ndarray, np.ndarray]:
    """Distance to and id of the nearest strictly-higher-g point.

    Ties in distance break toward the smaller id.  Points with no higher-g
    point (the global maximum, or every member of a tied top plateau) get
    parent -1 and delta set to the distance to their farthest point, the
    decision-graph convention that keeps them maximally eligible.

    The neighbor list resolves most points; a point falls back to an exact
    scan over all points when no listed neighbor has higher g or when the
    in-list candidate ties the list horizon, where an unseen equally-near
    point with smaller id could exist.
    """
    n, k_max = graph.n_points, graph.k_max
    delta = np.full(n, np.nan)
    parent = np.full(n, -1, dtype=np.int64)
    need_scan: list[int] = []

    for s in range(0, n, _CHUNK):
        e = min(n, s + _CHUNK)
        ids = graph.neighbor_ids[s:e]
        dists = graph.neighbor_dists[s:e]
        higher = g[ids] > g[s:e, None]
        has = higher.any(axis=1)
        pos = higher.argmax(axis=1)
        rows = np.arange(e - s)
        cand_d = dists[rows, pos]
        horizon = dists[:, k_max - 1]
        safe = has & (cand_d < horizon)
        idx = np.nonzero(safe)[0]
        delta[s + idx] = cand_d[idx]
        parent[s + idx] = ids[idx, pos[idx]]
        need_scan.extend((s + np.nonzero(~safe)[0]).tolist())

    for i in need_scan:
        mask = g > g[i]
        if not mask.any():
            continue  # parentless; filled below
        cand = np.nonzero(mask)[0]
        dd = pairwise.row(i)[cand]
        best = int(dd.argmin())  # first occurrence = smallest id among ties
        delta[i] = dd[best]
        parent[i] = cand[best]

    for i in np.nonzero(parent < 0)[0]:
        delta[i] = float(pairwise.row(i).max())
    return delta, parent


def detect_putative_centers(g: np.ndarray, delta: np.ndarray,
                            estimate: DensityEstimate,
                            graph: NeighborGraph) -> list[int]:
    """Points that are peaks of g over their own adaptive neighborhood.

    A center must have its nearest higher-g point strictly beyond its
    adaptive radius and must not sit inside the adaptive neighborhood of
    any higher-g point.  Returned sorted by decreasing g (ties by id).
    """
    n = graph.n_points
    eligible = delta > estimate.r_khat
    vetoed = np.zeros(n, dtype=bool)
    k_hat = estimate.k_hat
    for s in range(0, n, _CHUNK):
        e = min(n, s + _CHUNK)
        ids = graph.neighbor_ids[s:e]
        inside = np.arange(ids.shape[1])[None, :] < k_hat[s:e, None]
        dominated = inside & (g[s:e, None] > g[ids])
        targets = ids[dominated]
        if targets.size:
            vetoed[np.unique(targets)] = True

    cand = np.nonzero(eligible & ~vetoed)[0]
    if cand.size == 0:
        raise DegenerateDataError(
            "no density peak found: the g landscape has no local maximum "
            "that survives the neighborhood veto")
    order = np.argsort(-g[cand], kind="stable")
    return [int(c) for c in cand[order]]


def assign_points(g: np.ndarray, parent: np.ndarray,
                  centers: list[int]) -> np.ndarray:
    """Give every point the label of its parent chain's center.

    Visits points in decreasing g so each parent is labeled before its
    children; a still-unlabeled parent indicates a broken parent forest.
    """
    n = g.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    for rank, c in enumerate(centers):
        labels[c] = rank
    order = np.argsort(-g, kind="stable")
    for i in order:
        if labels[i] >= 0:
            continue
        p = parent[i]
        if p < 0 or labels[p] < 0:
            raise InternalInvariantError(
                f"point {i} has no labeled parent at assignment time")
        labels[i] = labels[p]
    return labels


def _nearest_in_cluster_is(j: int, i: int, cluster: int, labels: np.ndarray,
                           graph: NeighborGraph,
                           pairwise: PairwiseDistances | None) -> bool:
    """True when i is the nearest point of `cluster` to j (ties by id)."""
    row_labels = labels[graph.neighbor_ids[j]]
    hits = np.nonzero(row_labels == cluster)[0]
    if hits.size:
        return int(graph.neighbor_ids[j, hits[0]]) == i
    if pairwise is None:
        # no member of the cluster inside j's stored list and no exact
        # distances available: i is beyond the horizon, accept it
        return True
    members = np.nonzero(labels == cluster)[0]
    dd = pairwise.row(j)[members]
    best = int(dd.argmin())
    return int(members[best]) == i


def find_borders_saddles(labels: np.ndarray, graph: NeighborGraph,
                         g: np.ndarray, estimate: DensityEstimate,
                         pairwise: PairwiseDistances | None = None) -> SaddleTable:
    """Locate the border point of maximal g between every contacting pair.

    Point i of cluster c borders cluster c' when its nearest c'-labeled
    point j lies within i's adaptive radius and i is in turn the nearest
    c-labeled point to j.  The saddle of (c, c') is the border point with
    the highest g from either side; its log density and error are stored.
    """
    n = graph.n_points
    best: dict[tuple[int, int], SaddleInfo] = {}
    best_g: dict[tuple[int, int], tuple[float, int]] = {}

    for s in range(0, n, _CHUNK):
        e = min(n, s + _CHUNK)
        ids = graph.neighbor_ids[s:e]
        dists = graph.neighbor_dists[s:e]
        within = dists <= estimate.r_khat[s:e, None]
        foreign = labels[ids] != labels[s:e, None]
        rows, cols = np.nonzero(within & foreign)
        seen: set[tuple[int, int]] = set()
        for r, c in zip(rows.tolist(), cols.tolist()):
            i = s + r
            j = int(ids[r, c])
            other = int(labels[j])
            if (i, other) in seen:
                continue  # only the nearest foreign point of each cluster counts
            seen.add((i, other))
            mine = int(labels[i])
            if not _nearest_in_cluster_is(j, i, mine, labels, graph, pairwise):
                continue
            key = (min(mine, other), max(mine, other))
            cand = (float(g[i]), -i)
            if key not in best_g or cand > best_g[key]:
                best_g[key] = cand
                best[key] = SaddleInfo(log_rho=float(estimate.log_rho[i]),
                                       err=float(estimate.err[i]),
                                       border_point=i)
    return SaddleTable(entries=best)


def _lower_peak(a: int, b: int, centers: list[int], g: np.ndarray) -> tuple[int, int]:
    """Order the pair as (lower-peak cluster, higher-peak cluster)."""
    ga, gb = g[centers[a]], g[centers[b]]
    if (ga, -centers[a]) < (gb, -centers[b]):
        return a, b
    return b, a


def merge_clusters(labels: np.ndarray, centers: list[int], saddles: SaddleTable,
                   estimate: DensityEstimate, g: np.ndarray,
                   config: ClusterConfig) -> tuple[np.ndarray, list[int], SaddleTable,
                                                   list[dict], dict[int, int]]:
    """Merge statistically indistinguishable peaks into their neighbors.

    Contacting pairs are visited by decreasing saddle density; the cluster
    with the lower peak g is absorbed when its peak does not rise above the
    saddle by more than z times the combined error bars.  After a merge the
    absorbed cluster's saddles transfer to the survivor, keeping the denser
    saddle on conflict, and the scan restarts until no pair merges.

    Returns:
        (labels, centers, saddles, merge_log, old_to_new) with labels
        renumbered 0..K-1 by decreasing surviving peak g.
    """
    k0 = len(centers)
    merged_into = {}
    sad = dict(saddles.entries)
    merge_log: list[dict] = []

    def resolve(c: int) -> int:
        while c in merged_into:
            c = merged_into[c]
        return c

    while True:
        order = sorted(sad.items(), key=lambda kv: (-kv[1].log_rho, kv[0]))
        fired = False
        for (a, b), info in order:
            low, high = _lower_peak(a, b, centers, g)
            peak = estimate.log_rho[centers[low]]
            peak_err = estimate.err[centers[low]]
            if (peak - info.log_rho) < config.z * (peak_err + info.err):
                merge_log.append({
                    "removed_center": int(centers[low]),
                    "surviving_center": int(centers[high]),
                    "saddle_log_rho": float(info.log_rho),
                    "saddle_err": float(info.err),
                    "border_point": int(info.border_point),
                })
                del sad[(a, b)]
                for key in [k for k in sad if low in k]:
                    moved = sad.pop(key)
                    third = key[0] if key[1] == low else key[1]
                    nk = (min(high, third), max(high, third))
                    kept = sad.get(nk)
                    if kept is None or (moved.log_rho, -moved.border_point) > \
                            (kept.log_rho, -kept.border_point):
                        sad[nk] = moved
                merged_into[low] = high
                fired = True
                break
        if not fired:
            break

    alive = [c for c in range(k0) if c not in merged_into]
    alive.sort(key=lambda c: (-g[centers[c]], centers[c]))
    new_label = {c: r for r, c in enumerate(alive)}
    remap = np.empty(k0, dtype=np.int64)
    for c in range(k0):
        remap[c] = new_label[resolve(c)]
    labels_out = remap[labels]
    centers_out = [centers[c] for c in alive]
    sad_out = SaddleTable(entries={
        (min(new_label[a], new_label[b]), max(new_label[a], new_label[b])): info
        for (a, b), info in sad.items()})
    old_to_new = {centers[c]: centers[resolve(c)] for c in merged_into}
    return labels_out, centers_out, sad_out, merge_log, old_to_new


def flag_halo(labels: np.ndarray, saddles: SaddleTable,
              estimate: DensityEstimate, rule: str = "highest") -> np.ndarray:
    """Mark members whose density falls below their cluster's saddle level.

    The threshold per cluster is its highest saddle density by default;
    "lowest" uses its lowest saddle, "global-lowest" the lowest saddle of
    the whole topography.  Clusters without any saddle keep no halo.
    """
    if rule not in HALO_RULES:
        raise ConfigError(f"halo_rule must be one of {HALO_RULES}, got {rule!r}")
    n_clusters = int(labels.max()) + 1 if labels.size else 0
    thresholds = np.full(n_clusters, -np.inf)
    if saddles.entries:
        global_low = min(info.log_rho for info in saddles.entries.values())
        for (a, b), info in saddles.entries.items():
            for c in (a, b):
                if rule == "highest":
                    thresholds[c] = max(thresholds[c], info.log_rho)
                elif rule == "lowest":
                    if thresholds[c] == -np.inf:
                        thresholds[c] = info.log_rho
                    else:
                        thresholds[c] = min(thresholds[c], info.log_rho)
                else:
                    thresholds[c] = global_low
    return estimate.log_rho < thresholds[labels]


def cluster_points(graph: NeighborGraph, estimate: DensityEstimate,
                   pairwise: PairwiseDistances,
                   config: ClusterConfig | None = None) -> ClusterResult:
    """Full clustering chain from a density estimate to merged clusters."""
    config = config or ClusterConfig()
    g = compute_g(estimate)
    delta, parent = compute_delta_parent(g, graph, pairwise)
    putative = detect_putative_centers(g, delta, estimate, graph)
    labels = assign_points(g, parent, putative)
    saddles = find_borders_saddles(labels, graph, g, estimate, pairwise)
    labels, centers, saddles, merge_log, rewired = merge_clusters(
        labels, putative, saddles, estimate, g, config)

    parent = parent.copy()
    for removed, survivor in rewired.items():
        parent[removed] = survivor
    for c in centers:
        parent[c] = -1

    is_center = np.zeros(graph.n_points, dtype=bool)
    is_center[centers] = True
    if config.compute_halo:
        is_halo = flag_halo(labels, saddles, estimate, config.halo_rule)
    else:
        is_halo = np.zeros(graph.n_points, dtype=bool)

    assignment = PeakAssignment(g=g, delta=delta, parent=parent, labels=labels,
                                is_center=is_center, is_halo=is_halo,
                                centers=centers)
    return ClusterResult(assignment=assignment, saddles=saddles,
                         merge_log=merge_log, putative_centers=putative)
