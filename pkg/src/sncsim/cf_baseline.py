"""
Compute-and-forward baseline over real channels.

Each receiver decodes one integer linear equation of the messages per
channel slot; its coefficient vector is picked by exhaustive bounded
search on the computation-rate formula.  The central processor needs the
stacked coefficient matrix to be invertible mod q; a rank-deficient slot
is an outage and contributes zero rate.
"""

from __future__ import annotations

import functools
import itertools
import math

import numpy as np

from .channel import ChannelRealization
from .gf import PrimeField, gf_rank


def cf_computation_rate(h_row, a, rho: float) -> float:
    """Computation rate for equation coefficients *a* on channel row *h*.

    R = (1/2) log2( 1 / (||a||^2 - rho (h.a)^2 / (1 + rho ||h||^2)) ),
    clamped at 0 from below.
    """
    h = np.asarray(h_row, dtype=float)
    a = np.asarray(a, dtype=float)
    if not np.any(a):
        raise ValueError("coefficient vector must be nonzero")
    denom = float(a @ a) - rho * float(h @ a) ** 2 / (1.0 + rho * float(h @ h))
    if denom <= 0:  # cannot happen mathematically; guard fp noise
        denom = np.finfo(float).tiny
    return max(0.0, 0.5 * math.log2(1.0 / denom))


@functools.lru_cache(maxsize=None)
def _candidates(K: int, radius: int) -> np.ndarray:
    """All nonzero integer vectors with max-norm <= radius, ordered by
    squared norm then descending lexicographic order (so sign-flip ties
    resolve to the vector with a positive leading entry)."""
    grid = np.array(
        [a for a in itertools.product(range(-radius, radius + 1), repeat=K) if any(a)],
        dtype=np.int64,
    )
    order = np.lexsort(tuple(-grid[:, c] for c in range(K - 1, -1, -1)))
    grid = grid[order]
    grid = grid[np.argsort(np.sum(grid * grid, axis=1), kind="stable")]
    return grid


def cf_select_coeffs(h_row, rho: float, radius: int = 3) -> np.ndarray:
    """Best coefficient vector by exhaustive search with max-norm <= radius.

    Ties break toward the smallest squared norm, then lexicographic order.
    """
    if radius < 1:
        raise ValueError("search radius must be >= 1")
    h = np.asarray(h_row, dtype=float)
    cand = _candidates(len(h), radius)
    # vectorized computation rate over all candidates
    norm2 = np.sum(cand * cand, axis=1).astype(float)
    proj = (cand @ h) ** 2
    denom = norm2 - rho * proj / (1.0 + rho * float(h @ h))
    denom = np.maximum(denom, np.finfo(float).tiny)
    rates = np.maximum(0.0, 0.5 * np.log2(1.0 / denom))
    # candidates are pre-sorted by the tie-break order, so the first
    # maximizer is the preferred one
    return cand[int(np.argmax(rates))].copy()


def cf_trial_sum_rate(h: ChannelRealization, rho: float, field: PrimeField,
                      radius: int = 3, cap: float | None = None):
    """Sum-rate of one compute-and-forward trial over all extension slots.

    Per slot, each receiver picks its best coefficient vector; if the
    stacked K x K coefficient matrix is full rank mod q, the slot carries
    K times the worst receiver rate (capped per stream when *cap* is
    given), otherwise the slot is an outage.

    Returns (total rate over the N slots, outage fraction).
    """
    if h.model != "real":
        raise ValueError("compute-and-forward baseline runs on real channels")
    if h.n_rx != h.n_tx:
        raise ValueError("one equation per receiver requires K = L")
    K, N = h.n_tx, h.n_ext
    total = 0.0
    outages = 0
    for i in range(N):
        rows = [np.array([h.diag[l, k][i] for k in range(K)]) for l in range(K)]
        coeffs = [cf_select_coeffs(r, rho, radius) for r in rows]
        A = np.vstack(coeffs)
        if gf_rank(A, field) < K:
            outages += 1
            continue
        r_min = min(cf_computation_rate(rows[l], coeffs[l], rho) for l in range(K))
        if cap is not None:
            r_min = min(r_min, cap)
        total += K * r_min
    return total, outages / N
