"""Independent reference implementations used to freeze expected test values.

Every oracle here is deliberately naive and structurally different from the
production code path it checks: plain loops, full sorts, bisection, and
arbitrary-precision arithmetic instead of vectorized or closed-form routines.
"""

from __future__ import annotations

import math

import numpy as np
from mpmath import mp

from densitopo.neighbors import NeighborGraph


# ---------------------------------------------------------------------------
# geometry / kNN

def brute_knn(coords: np.ndarray, k_max: int, metric: str = "euclidean"):
    """All-pairs kNN by full stable sort, ties by ascending id."""
    n = coords.shape[0]
    ids = np.empty((n, k_max), dtype=np.int64)
    dists = np.empty((n, k_max), dtype=np.float64)
    for i in range(n):
        row = []
        for j in range(n):
            if j == i:
                continue
            diff = coords[i] - coords[j]
            if metric == "euclidean":
                d = math.sqrt(float((diff * diff).sum()))
            else:
                d = float(np.abs(diff).sum())
            row.append((d, j))
        row.sort()
        ids[i] = [j for _, j in row[:k_max]]
        dists[i] = [d for d, _ in row[:k_max]]
    return ids, dists


def naive_delta_parent(g: np.ndarray, dmat: np.ndarray):
    """O(n^2) scan: nearest strictly-higher-g point, ties by ascending id.

    Parentless points (no strictly higher g anywhere) get the distance to
    their farthest point as delta.
    """
    n = g.shape[0]
    delta = np.empty(n)
    parent = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        best_d, best_j = math.inf, -1
        for j in range(n):
            if g[j] > g[i] and (dmat[i, j] < best_d):
                best_d, best_j = dmat[i, j], j
        if best_j >= 0:
            delta[i] = best_d
            parent[i] = best_j
    for i in np.nonzero(parent < 0)[0]:
        delta[i] = dmat[i].max()
    return delta, parent


def naive_single_linkage(dist: np.ndarray):
    """Textbook agglomerative single linkage on a finite distance matrix.

    Returns the sorted list of merge heights and the partition (as a set of
    frozensets) recorded just after each merge.
    """
    n = dist.shape[0]
    clusters = [frozenset([i]) for i in range(n)]
    heights = []
    partitions = []
    while len(clusters) > 1:
        best = (math.inf, None, None)
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                d = min(dist[i, j] for i in clusters[a] for j in clusters[b])
                if d < best[0]:
                    best = (d, a, b)
        d, a, b = best
        merged = clusters[a] | clusters[b]
        clusters = [c for idx, c in enumerate(clusters) if idx not in (a, b)]
        clusters.append(merged)
        heights.append(d)
        partitions.append(frozenset(clusters))
    return heights, partitions


# ---------------------------------------------------------------------------
# numeric inversions and maximizations

def chi2_quantile_1dof(p_tail: float) -> float:
    """Inverse survival of chi^2 with 1 dof via bisection on erf.

    P(X > x) = 1 - erf(sqrt(x/2)) for X ~ chi^2(1).
    """
    target = 1.0 - p_tail
    lo, hi = 0.0, 200.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.erf(math.sqrt(mid / 2.0)) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_max(f, lo: float, hi: float, tol: float = 1e-13) -> float:
    """Golden-section maximizer of a unimodal function."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * (1.0 + abs(a) + abs(b)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def compass_max2d(f, x0: float, y0: float, step: float = 0.5,
                  tol: float = 1e-9, max_iter: int = 200000):
    """Deterministic compass (pattern) search maximizing f(x, y)."""
    x, y = x0, y0
    fx = f(x, y)
    it = 0
    while step > tol and it < max_iter:
        it += 1
        moved = False
        for dx, dy in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step),
                       (step, step), (step, -step), (-step, step), (-step, -step)):
            cand = f(x + dx, y + dy)
            if cand > fx:
                x, y, fx = x + dx, y + dy, cand
                moved = True
                break
        if not moved:
            step *= 0.5
    return x, y, fx


# ---------------------------------------------------------------------------
# arbitrary-precision statistics

def mp_lrt(k: int, vi: float, vj: float, n_splits: int = 3) -> float:
    """Two-sample constant-density LRT statistic from the raw likelihoods.

    Splits each cumulative volume into random positive shells and evaluates
    D = 2[L_i(rho_i*) + L_j(rho_j*) - L_i(rho_bar) - L_j(rho_bar)] directly;
    the result must not depend on the split.
    """
    rng = np.random.default_rng(12345)
    with mp.workdps(60):
        values = []
        for _ in range(n_splits):
            out = []
            for v_total in (vi, vj):
                w = rng.random(k) + 0.1
                # normalize in extended precision so the shells sum to the
                # cumulative volume exactly
                total = mp.fsum(mp.mpf(x) for x in w)
                shells = [mp.mpf(x) * mp.mpf(v_total) / total for x in w]
                out.append(shells)
            shells_i, shells_j = out

            def loglik(shells, rho):
                return mp.fsum(mp.log(rho) + mp.log(v) - rho * v for v in shells)

            rho_i = mp.mpf(k) / mp.mpf(vi)
            rho_j = mp.mpf(k) / mp.mpf(vj)
            rho_bar = mp.mpf(2 * k) / (mp.mpf(vi) + mp.mpf(vj))
            d_stat = 2 * (loglik(shells_i, rho_i) + loglik(shells_j, rho_j)
                          - loglik(shells_i, rho_bar) - loglik(shells_j, rho_bar))
            values.append(d_stat)
        spread = max(values) - min(values)
        assert spread < mp.mpf(10) ** -40, "oracle must be split-independent"
        return float(values[0])


def mp_entropy(counts) -> mp.mpf:
    total = mp.mpf(int(sum(counts)))
    acc = mp.mpf(0)
    for c in counts:
        if c:
            p = mp.mpf(int(c)) / total
            acc -= p * mp.log(p)
    return acc


def mp_nmi(pred, truth) -> float:
    """NMI with sqrt normalization and natural logs at 60 digits."""
    pred = [int(x) for x in pred]
    truth = [int(x) for x in truth]
    pair_counts: dict[tuple[int, int], int] = {}
    row: dict[int, int] = {}
    col: dict[int, int] = {}
    for a, b in zip(truth, pred):
        pair_counts[(a, b)] = pair_counts.get((a, b), 0) + 1
        row[a] = row.get(a, 0) + 1
        col[b] = col.get(b, 0) + 1
    with mp.workdps(60):
        n = mp.mpf(len(pred))
        mi = mp.mpf(0)
        for (a, b), c in pair_counts.items():
            p = mp.mpf(c) / n
            mi += p * mp.log(mp.mpf(c) * n / (mp.mpf(row[a]) * mp.mpf(col[b])))
        h_t = mp_entropy(row.values())
        h_p = mp_entropy(col.values())
        if h_t == 0 and h_p == 0:
            return 1.0
        if h_t == 0 or h_p == 0:
            return 0.0
        val = mi / mp.sqrt(h_t * h_p)
        return float(max(mp.mpf(0), min(mp.mpf(1), val)))


def naive_purity(pred, truth) -> dict[int, float]:
    per: dict[int, dict[int, int]] = {}
    for p, t in zip(pred, truth):
        per.setdefault(int(p), {}).setdefault(int(t), 0)
        per[int(p)][int(t)] += 1
    out = {}
    for p, table in per.items():
        best = max(table.values())
        out[p] = best / sum(table.values())
    return out


def naive_majority(pred, truth) -> dict[int, int]:
    per: dict[int, dict[int, int]] = {}
    for p, t in zip(pred, truth):
        per.setdefault(int(p), {}).setdefault(int(t), 0)
        per[int(p)][int(t)] += 1
    out = {}
    for p, table in per.items():
        best = max(table.values())
        out[p] = min(t for t, c in table.items() if c == best)
    return out


def naive_confusion(pred, truth, majority):
    """Confusion counts over the union vocabulary of truth and mapped labels."""
    mapped = [majority[int(p)] for p in pred]
    labels = sorted(set(int(t) for t in truth) | set(mapped))
    index = {lab: i for i, lab in enumerate(labels)}
    matrix = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, m in zip(truth, mapped):
        matrix[index[int(t)], index[m]] += 1
    return matrix, np.asarray(labels, dtype=np.int64)


# ---------------------------------------------------------------------------
# synthetic neighbor structures

def graph_from_radii(radii: np.ndarray, metric_tag: str = "euclidean") -> NeighborGraph:
    """Build a NeighborGraph with prescribed per-point neighbor distances.

    Neighbor ids are synthetic (cyclic offsets), which downstream density
    code never inspects beyond the id of the k-th neighbor.
    """
    radii = np.asarray(radii, dtype=np.float64)
    n, k_max = radii.shape
    ids = np.empty((n, k_max), dtype=np.int64)
    for i in range(n):
        ids[i] = [(i + 1 + l) % n for l in range(k_max)]
    return NeighborGraph(neighbor_ids=ids, neighbor_dists=radii,
                        metric_tag=metric_tag)


def radii_constant_density(n_points: int, k_max: int, rho: float, d: float,
                           omega: float) -> np.ndarray:
    """Radii for exactly constant density: V_l = l / rho for every point."""
    ls = np.arange(1, k_max + 1, dtype=np.float64)
    r = (ls / (rho * omega)) ** (1.0 / d)
    return np.tile(r, (n_points, 1))


def radii_two_step(k_max: int, rho_in: float, rho_out: float, k_break: int,
                   d: float, omega: float) -> np.ndarray:
    """Radii whose shell volumes follow a sharp density step at k_break."""
    shells = np.empty(k_max)
    shells[:k_break] = 1.0 / rho_in
    shells[k_break:] = 1.0 / rho_out
    cum = np.cumsum(shells)
    return (cum / omega) ** (1.0 / d)


def naive_saddles(labels: np.ndarray, g: np.ndarray, log_rho: np.ndarray,
                  r_khat: np.ndarray, dmat: np.ndarray):
    """O(n^2) border and saddle finder.

    Point i borders cluster c' when its nearest c'-labeled point j (ties by
    ascending id) is within i's adaptive radius and i is the nearest point
    of its own cluster to j; the saddle of each pair is the border point of
    maximal g (ties by ascending id), reported as (log_rho, border_point).
    """
    n = labels.shape[0]
    best: dict[tuple[int, int], tuple[tuple[float, int], int]] = {}
    for i in range(n):
        mine = int(labels[i])
        for other in sorted(set(labels.tolist()) - {mine}):
            members = np.nonzero(labels == other)[0]
            j = int(members[int(dmat[i][members].argmin())])
            if dmat[i, j] > r_khat[i]:
                continue
            own = np.nonzero(labels == mine)[0]
            nearest_back = int(own[int(dmat[j][own].argmin())])
            if nearest_back != i:
                continue
            key = (min(mine, other), max(mine, other))
            cand = ((float(g[i]), -i), i)
            if key not in best or cand[0] > best[key][0]:
                best[key] = cand
    return {key: (float(log_rho[i]), i) for key, ((_, _), i) in best.items()}
