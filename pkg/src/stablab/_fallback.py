"""Pure-Python reference kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature and
the same floating-point operation order, so the two backends agree to the last
bit on everything except :func:`abs_prefix_hindsight` (summation order differs;
agreement there is to ~1e-12 relative).
"""

from __future__ import annotations

import math
from bisect import bisect_right, insort

import numpy as np


def hedge_expected_losses(table, etas):
    """Expected per-round loss of Hedge on a fixed ``m x d`` loss table.

    Round ``t`` (0-based) plays ``theta ∝ exp(-etas[t] * C)`` where ``C`` is
    the cumulative loss of each expert over rows ``0..t-1``.
    """
    table = np.ascontiguousarray(table, dtype=np.float64)
    etas = np.ascontiguousarray(etas, dtype=np.float64)
    m, d = table.shape
    cum = [0.0] * d
    out = np.empty(m, dtype=np.float64)
    w = [0.0] * d
    for t in range(m):
        eta = etas[t]
        cmin = min(cum)
        total = 0.0
        for k in range(d):
            w[k] = math.exp(-eta * (cum[k] - cmin))
            total += w[k]
        row = table[t]
        acc = 0.0
        for k in range(d):
            acc += w[k] * row[k]
        out[t] = acc / total
        for k in range(d):
            cum[k] += row[k]
    return out


def interval_rerm_tracking(m, lambdas):
    """Tracking adversary against the |p - 1/2|-regularized RERM.

    ``lambdas`` holds ``lambda_0..lambda_m``. Returns ``(losses, ones)``, the
    per-round loss and the final number of 1s in the generated sequence.
    """
    lambdas = np.ascontiguousarray(lambdas, dtype=np.float64)
    if lambdas.shape[0] < m + 1:
        raise ValueError("need lambda_0..lambda_m")
    losses = np.empty(m, dtype=np.float64)
    ones = 0
    lam_sum = lambdas[0]
    for i in range(m):
        n = i
        # p = 1 iff ones/n > (1 + lam_bar)/2, scaled by n to stay in integers
        if 2.0 * ones > n + lam_sum:
            losses[i] = 1.0
        elif 2.0 * ones < n - lam_sum:
            raise ValueError("unreachable state")
        else:
            losses[i] = 0.5
            ones += 1
        lam_sum += lambdas[i + 1]
    return losses, ones


def _abs_reg_argmin_sorted(z, n, lam, center):
    # min over h of sum |h - z_j| + lam (h - center)^2 on the real line;
    # z sorted ascending, length n, lam > 0.
    # With c points strictly below, the stationary point is
    # h_c = center + (n - 2c) / (2 lam); find the first c with h_c <= z[c].
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if center + (n - 2 * mid) / (2.0 * lam) <= z[mid]:
            hi = mid
        else:
            lo = mid + 1
    c = lo
    h = center + (n - 2 * c) / (2.0 * lam)
    if c > 0 and z[c - 1] > h:
        h = z[c - 1]
    return h


def abs_reg_argmin(z, lam, center, lo, hi):
    """argmin over [lo, hi] of sum |h - z_j| + lam * (h - center)**2 (lam > 0)."""
    zs = sorted(float(v) for v in z)
    h = _abs_reg_argmin_sorted(zs, len(zs), float(lam), float(center))
    return min(max(h, lo), hi)


def abs_reg_loo(z, lam, center, lo, hi):
    """Leave-one-out minimizers for :func:`abs_reg_argmin`.

    Entry ``i`` is the minimizer with ``z[i]`` deleted and regularizer weight
    ``lam`` (the caller passes the weight matching the shorter dataset).
    """
    z = [float(v) for v in z]
    n = len(z)
    zs = sorted(z)
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        r = bisect_right(zs, z[i]) - 1
        rest = zs[:r] + zs[r + 1:]
        h = _abs_reg_argmin_sorted(rest, n - 1, float(lam), float(center))
        out[i] = min(max(h, lo), hi)
    return out


def abs_prefix_hindsight(z, lo, hi):
    """``min over h in [lo, hi] of sum_{j<=t} |h - z_j|`` for every prefix t."""
    zs = []
    out = np.empty(len(z), dtype=np.float64)
    for t, v in enumerate(z):
        insort(zs, float(v))
        n = t + 1
        med = zs[(n - 1) // 2]
        h = min(max(med, lo), hi)
        arr = np.asarray(zs)
        out[t] = float(np.abs(arr - h).sum())
    return out
