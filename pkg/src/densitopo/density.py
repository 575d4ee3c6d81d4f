"""Adaptive k-nearest-neighbor density estimation with per-point error bars.

For each point the neighborhood is grown shell by shell while a
likelihood-ratio test accepts that the point and its current k-th neighbor
see the same density; the log density is then a maximum-likelihood fit of
a log-linear density ansatz over the accepted shells, whose intercept
corrects the leading bias of the plain k/V estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, DegenerateDataError
from .neighbors import NeighborGraph

# chi-square(1) quantile at p = 1e-6: neighborhood growth stops once the
# same-density hypothesis is rejected at that level
LRT_THRESHOLD = 23.928
DEFAULT_K_MIN = 4
ANSATZ_CHOICES = ("volume", "radius", "index")

_MAX_STEP_HALVINGS = 30


def unit_ball_volume(d: float) -> float:
    """Volume of the unit ball in (possibly fractional) dimension d."""
    if d <= 0:
        raise ConfigError(f"dimension must be positive, got {d}")
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def log_density_error(k) -> np.ndarray | float:
    """Closed-form error bar of the fitted log density at neighborhood size k.

    Valid for k >= 2; decreases monotonically with k.
    """
    arr = np.asarray(k, dtype=np.float64)
    out = np.sqrt((4.0 * arr + 2.0) / ((arr - 1.0) * arr))
    return float(out) if np.isscalar(k) else out


@dataclass
class DensityConfig:
    """Settings of the adaptive density estimator.

    Attributes:
        d: intrinsic dimension used for shell volumes (> 0, may be fractional).
        omega: unit-ball volume; derived from d when omitted.
        lrt_threshold: stop growing the neighborhood once the likelihood-ratio
            statistic against the current k-th neighbor exceeds this.
        k_min: smallest neighborhood ever used (>= 3).
        k_max_cap: optional hard cap on the adaptive neighborhood size;
            defaults to min(graph k_max, n // 4).
        nr_tol: gradient norm below which the Newton fit is converged.
        nr_max_iter: Newton iteration limit before falling back to k/V.
        ansatz: regressor of the log-linear density model, one of
            "volume" (cumulative shell volume), "radius", or "index".
    """

    d: float
    omega: float | None = None
    lrt_threshold: float = LRT_THRESHOLD
    k_min: int = DEFAULT_K_MIN
    k_max_cap: int | None = None
    nr_tol: float = 1e-8
    nr_max_iter: int = 100
    ansatz: str = "volume"

    def __post_init__(self):
        if not (self.d > 0 and math.isfinite(self.d)):
            raise ConfigError(f"intrinsic dimension must be positive, got {self.d}")
        if self.omega is None:
            self.omega = unit_ball_volume(self.d)
        elif self.omega <= 0:
            raise ConfigError(f"omega must be positive, got {self.omega}")
        if self.k_min < 3:
            raise ConfigError(f"k_min must be >= 3, got {self.k_min}")
        if self.k_max_cap is not None and self.k_max_cap < self.k_min:
            raise ConfigError("k_max_cap must be >= k_min")
        if self.lrt_threshold <= 0:
            raise ConfigError("lrt_threshold must be positive")
        if self.nr_tol <= 0 or self.nr_max_iter < 1:
            raise ConfigError("invalid Newton solver settings")
        if self.ansatz not in ANSATZ_CHOICES:
            raise ConfigError(f"ansatz must be one of {ANSATZ_CHOICES}, got {self.ansatz!r}")


@dataclass
class DensityEstimate:
    """Per-point density output (struct of arrays, index = point id)."""

    k_hat: np.ndarray
    log_rho: np.ndarray
    err: np.ndarray
    r_khat: np.ndarray
    slope: np.ndarray
    fallback: np.ndarray

    @property
    def n_points(self) -> int:
        return self.k_hat.shape[0]


def shell_volumes(i: int, k: int, config: DensityConfig,
                  graph: NeighborGraph) -> np.ndarray:
    """Volumes of the k spherical shells between consecutive neighbors of i.

    Shell l covers the gap between neighbor l-1 and neighbor l (neighbor 0
    meaning the point itself), so the volumes sum to omega * r_k**d.
    Duplicate neighbors yield zero-volume shells, which the likelihood
    tolerates.
    """
    if not 1 <= k <= graph.k_max:
        raise ConfigError(f"k must be in [1, {graph.k_max}], got {k}")
    radii = graph.neighbor_dists[i, :k]
    cum = config.omega * np.power(radii, config.d)
    prev = np.concatenate(([0.0], cum[:-1]))
    return np.maximum(cum - prev, 0.0)


def cumulative_volume(i: int, k: int, config: DensityConfig,
                      graph: NeighborGraph) -> float:
    """Volume of the ball through the k-th neighbor of i: omega * r_k**d."""
    return float(config.omega * graph.neighbor_dists[i, k - 1] ** config.d)


def knn_mle(k: int, volume: float) -> float:
    """Log density maximizing the fixed-k shell likelihood: log(k / V)."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if volume <= 0.0:
        raise DegenerateDataError(
            f"cumulative volume is {volume}; all {k} neighbors coincide with the point")
    return math.log(k) - math.log(volume)


def _lrt_kernel(k, v_i, v_j):
    """Likelihood-ratio statistic comparing separate vs shared density.

    Twice the gap between the two points' individually maximized shell
    log-likelihoods and the shared-density maximum.  Vectorized over
    volumes; degenerate (zero) volumes map to +inf so neighborhood growth
    stops there.
    """
    k = np.asarray(k, dtype=np.float64)
    v_i = np.asarray(v_i, dtype=np.float64)
    v_j = np.asarray(v_j, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        sep_i = k * (np.log(k) - np.log(v_i)) - k
        sep_j = k * (np.log(k) - np.log(v_j)) - k
        shared = 2.0 * k * (np.log(2.0 * k) - np.log(v_i + v_j)) - 2.0 * k
        stat = 2.0 * (sep_i + sep_j - shared)
    stat = np.where(v_i == v_j, 0.0, np.maximum(stat, 0.0))
    stat = np.where((v_i <= 0) | (v_j <= 0), np.inf, stat)
    return stat


def lrt_statistic(i: int, k: int, config: DensityConfig, graph: NeighborGraph) -> float:
    """Same-density test statistic between point i and its k-th neighbor."""
    if not 1 <= k <= graph.k_max:
        raise ConfigError(f"k must be in [1, {graph.k_max}], got {k}")
    j = int(graph.neighbor_ids[i, k - 1])
    v_i = config.omega * graph.neighbor_dists[i, k - 1] ** config.d
    v_j = config.omega * graph.neighbor_dists[j, k - 1] ** config.d
    return float(_lrt_kernel(k, v_i, v_j))


def _effective_cap(config: DensityConfig, graph: NeighborGraph) -> int:
    cap = config.k_max_cap
    if cap is None:
        cap = max(config.k_min, graph.n_points // 4)
    cap = min(cap, graph.k_max)
    if cap < config.k_min:
        raise ConfigError(
            f"graph provides only {graph.k_max} neighbors but k_min is {config.k_min}")
    return cap


def adaptive_k(i: int, config: DensityConfig, graph: NeighborGraph) -> int:
    """Largest k whose same-density test stays below the threshold.

    Scans k = k_min..cap and stops at the first rejection; if even k_min is
    rejected the answer is still k_min, and with no rejection it is the cap.
    """
    cap = _effective_cap(config, graph)
    for k in range(config.k_min, cap + 1):
        if lrt_statistic(i, k, config, graph) > config.lrt_threshold:
            return max(config.k_min, k - 1)
    return cap


def _adaptive_k_all(config: DensityConfig, graph: NeighborGraph) -> np.ndarray:
    """Vectorized adaptive neighborhood sizes for every point."""
    cap = _effective_cap(config, graph)
    n = graph.n_points
    cum = config.omega * np.power(graph.neighbor_dists[:, :cap], config.d)
    first_bad = np.full(n, -1, dtype=np.int64)
    for k in range(config.k_min, cap + 1):
        v_i = cum[:, k - 1]
        v_j = cum[graph.neighbor_ids[:, k - 1], k - 1]
        stat = _lrt_kernel(float(k), v_i, v_j)
        newly = (first_bad < 0) & (stat > config.lrt_threshold)
        first_bad[newly] = k
    k_hat = np.where(first_bad < 0, cap,
                     np.maximum(config.k_min, first_bad - 1))
    return k_hat.astype(np.int64)


def _regressor(shells_cum: np.ndarray, radii: np.ndarray, ansatz: str) -> np.ndarray:
    if ansatz == "volume":
        return shells_cum
    if ansatz == "radius":
        return radii
    return np.arange(1.0, shells_cum.size + 1.0)


def _model_value(b: float, a: float, x: np.ndarray, v: np.ndarray) -> float:
    with np.errstate(over="ignore"):
        t = b + a * x
        val = t.sum() - (v * np.exp(t)).sum()
    return float(val)


def fit_linear_corrected(i: int, k_hat: int, config: DensityConfig,
                         graph: NeighborGraph) -> tuple[float, float, float, bool]:
    """Fit log rho with a linear density drift over the accepted shells.

    Maximizes the shell likelihood of rate exp(b + a * x_l) by Newton
    iteration from (log(k_hat / V), 0), halving steps that lower the
    objective.  The intercept b is the bias-corrected log density at the
    point; a is the drift slope in the chosen regressor.

    Returns:
        (log_rho, slope, err, fallback): fallback is True when the solver
        did not converge or the curvature degenerated, in which case the
        plain k/V estimate is returned with zero slope.
    """
    radii = graph.neighbor_dists[i, :k_hat]
    cum = config.omega * np.power(radii, config.d)
    prev = np.concatenate(([0.0], cum[:-1]))
    v = np.maximum(cum - prev, 0.0)
    vol = float(cum[-1])
    err = float(log_density_error(float(k_hat)))
    if vol <= 0.0:
        raise DegenerateDataError(
            f"point {i}: all {k_hat} nearest neighbors coincide with it")
    b = math.log(k_hat) - math.log(vol)
    a = 0.0
    x = _regressor(cum, radii, config.ansatz)
    x_sum = float(x.sum())

    current = _model_value(b, a, x, v)
    for _ in range(config.nr_max_iter):
        with np.errstate(over="ignore"):
            w = v * np.exp(b + a * x)
            w_sum = float(w.sum())
            wx_sum = float((w * x).sum())
            wxx_sum = float((w * x * x).sum())
        if not math.isfinite(w_sum + wx_sum + wxx_sum):
            return math.log(k_hat) - math.log(vol), 0.0, err, True
        g_b = k_hat - w_sum
        g_a = x_sum - wx_sum
        if math.hypot(g_b, g_a) <= config.nr_tol:
            return b, a, err, False
        h_bb, h_ba, h_aa = -w_sum, -wx_sum, -wxx_sum
        det = h_bb * h_aa - h_ba * h_ba
        if not (h_bb < 0.0 and det > 0.0):
            # curvature not negative definite: no trustworthy Newton step
            return math.log(k_hat) - math.log(vol), 0.0, err, True
        step_b = -(h_aa * g_b - h_ba * g_a) / det
        step_a = -(h_bb * g_a - h_ba * g_b) / det
        accepted = False
        for _ in range(_MAX_STEP_HALVINGS):
            cand = _model_value(b + step_b, a + step_a, x, v)
            if math.isfinite(cand) and cand >= current - 1e-15 * (1.0 + abs(current)):
                b, a, current = b + step_b, a + step_a, cand
                accepted = True
                break
            step_b *= 0.5
            step_a *= 0.5
        if not accepted:
            break
    # loop exhausted: accept only if already stationary
    with np.errstate(over="ignore"):
        w = v * np.exp(b + a * x)
        g_b = k_hat - float(w.sum())
        g_a = x_sum - float((w * x).sum())
    if math.isfinite(g_b) and math.isfinite(g_a) and math.hypot(g_b, g_a) <= config.nr_tol:
        return b, a, err, False
    return math.log(k_hat) - math.log(vol), 0.0, err, True


def estimate_density(graph: NeighborGraph, config: DensityConfig) -> DensityEstimate:
    """Adaptive density estimate for every point of the graph.

    Neighborhood sizes come from the same-density scan; each point then
    gets the drift-corrected likelihood fit, falling back to log(k/V)
    where the fit degenerates.  Points whose selected neighborhood has
    zero volume are retried at the smallest k with positive volume and
    flagged; if no such k exists the data is degenerate.
    """
    n = graph.n_points
    k_hat = _adaptive_k_all(config, graph)
    log_rho = np.empty(n, dtype=np.float64)
    slope = np.empty(n, dtype=np.float64)
    err = np.empty(n, dtype=np.float64)
    fallback = np.zeros(n, dtype=bool)
    cap = _effective_cap(config, graph)

    for i in range(n):
        k = int(k_hat[i])
        if graph.neighbor_dists[i, k - 1] <= 0.0:
            # all selected neighbors coincide with the point; widen until
            # the ball has positive volume
            grown = None
            for kk in range(config.k_min, cap + 1):
                if graph.neighbor_dists[i, kk - 1] > 0.0:
                    grown = kk
                    break
            if grown is None:
                raise DegenerateDataError(
                    f"point {i}: more than {cap} exact duplicates; "
                    "density is unbounded there")
            k = grown
            k_hat[i] = k
            vol = config.omega * graph.neighbor_dists[i, k - 1] ** config.d
            log_rho[i] = knn_mle(k, float(vol))
            slope[i] = 0.0
            err[i] = float(log_density_error(float(k)))
            fallback[i] = True
            continue
        log_rho[i], slope[i], err[i], fallback[i] = fit_linear_corrected(
            i, k, config, graph)

    r_khat = graph.neighbor_dists[np.arange(n), k_hat - 1]
    if not np.isfinite(log_rho).all():
        bad = int(np.nonzero(~np.isfinite(log_rho))[0][0])
        raise DegenerateDataError(f"non-finite log density at point {bad}")
    return DensityEstimate(k_hat=k_hat, log_rho=log_rho, err=err,
                           r_khat=r_khat.astype(np.float64), slope=slope,
                           fallback=fallback)
