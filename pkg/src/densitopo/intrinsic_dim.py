"""Intrinsic dimension estimation from two-nearest-neighbor distance ratios.

The ratio mu = r2/r1 of the distances to the second and first neighbor is
Pareto-distributed with exponent equal to the intrinsic dimension when the
density is locally constant, which gives a likelihood estimate that needs
no binning and no free parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, DegenerateDataError
from .neighbors import NeighborGraph

DEFAULT_DISCARD_FRACTION = 0.1


@dataclass(frozen=True)
class IdEstimate:
    d_hat: float
    n_used: int
    discard_fraction: float


def twonn_estimate(graph: NeighborGraph,
                   discard_fraction: float = DEFAULT_DISCARD_FRACTION) -> IdEstimate:
    """Estimate the intrinsic dimension from first/second neighbor distances.

    Points whose first neighbor distance is zero (duplicates) are skipped.
    The largest ``discard_fraction`` of the log-ratios is discarded to damp
    tail noise; the estimate is the censored-sample maximum-likelihood rate
    of the remaining exponential log-ratios, which stays consistent under
    the discard (the plain mean over a truncated sample would not be).

    Returns:
        IdEstimate with d_hat > 0 and the number of retained points.
    """
    if not 0.0 <= discard_fraction < 1.0:
        raise ConfigError(f"discard_fraction must be in [0, 1), got {discard_fraction}")
    if graph.k_max < 2:
        raise DataError("two-NN estimation needs k_max >= 2 neighbors per point")

    r1 = graph.neighbor_dists[:, 0]
    r2 = graph.neighbor_dists[:, 1]
    usable = r1 > 0.0
    if not usable.any():
        raise DegenerateDataError("every point has a coincident nearest neighbor")

    log_mu = np.sort(np.log(r2[usable] / r1[usable]))
    n_kept = log_mu.size
    n_drop = int(math.floor(discard_fraction * n_kept))
    n_used = n_kept - n_drop
    if n_used < 1:
        raise DegenerateDataError("no usable points left after discarding the tail")

    # censored-sample MLE: discarded values enter only through the cutoff
    cutoff = log_mu[n_used - 1]
    total = float(log_mu[:n_used].sum() + n_drop * cutoff)
    if total <= 0.0:
        raise DegenerateDataError(
            "sum of log neighbor ratios is zero; distances carry no dimension signal")
    return IdEstimate(d_hat=n_used / total, n_used=n_used,
                      discard_fraction=discard_fraction)
