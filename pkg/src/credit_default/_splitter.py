"""Compiled kernels for level-wise exact split search over presorted columns."""

import numba
import numpy as np

GINI = 0
SQUARED = 1
NEWTON = 2


@numba.njit(cache=True, nogil=True)
def _side_score(W, S, mode, lam):
    # score of one child; gain = score(L) + score(R) - score(parent)
    if mode == GINI:
        if W <= 0.0:
            return 0.0
        return -2.0 * S * (W - S) / W
    if mode == SQUARED:
        if W <= 0.0:
            return 0.0
        return S * S / W
    denom = W + lam
    if denom <= 0.0:
        return 0.0
    return 0.5 * S * S / denom


@numba.njit(cache=True, nogil=True)
def slot_ranges(X, node_of, n_slots):
    """Per-slot column minima and maxima (rows with node_of < 0 ignored)."""
    n, d = X.shape
    lo = np.full((n_slots, d), np.inf)
    hi = np.full((n_slots, d), -np.inf)
    for i in range(n):
        s = node_of[i]
        if s < 0:
            continue
        for f in range(d):
            v = X[i, f]
            if v < lo[s, f]:
                lo[s, f] = v
            if v > hi[s, f]:
                hi[s, f] = v
    return lo, hi


@numba.njit(cache=True, nogil=True)
def best_splits(XT, order, node_of, cand, w, s, W_tot, S_tot, n_tot, mode, lam,
                min_child_weight, min_samples_leaf):
    """Best (gain, feature, threshold) for every slot of the current level.

    ``XT`` is the transposed feature matrix and ``order[f]`` lists row
    indices sorted by column f. Gains follow ``mode``:
    weighted Gini decrease, weighted squared-error decrease, or the
    second-order gain (without the split penalty) with w = hessian and
    s = gradient. Features are scanned in increasing index and thresholds in
    increasing value; only strictly larger gains replace the incumbent.
    """
    n_slots = W_tot.shape[0]
    d = XT.shape[0]
    best_gain = np.full(n_slots, -np.inf)
    best_feat = np.full(n_slots, -1, dtype=np.int64)
    best_thr = np.zeros(n_slots)
    parent = np.empty(n_slots)
    for k in range(n_slots):
        parent[k] = _side_score(W_tot[k], S_tot[k], mode, lam)
    WL = np.zeros(n_slots)
    SL = np.zeros(n_slots)
    nL = np.zeros(n_slots, dtype=np.int64)
    last = np.zeros(n_slots)
    for f in range(d):
        used = False
        for k in range(n_slots):
            if cand[k, f]:
                used = True
                break
        if not used:
            continue
        WL[:] = 0.0
        SL[:] = 0.0
        nL[:] = 0
        for j in range(order.shape[1]):
            i = order[f, j]
            k = node_of[i]
            if k < 0 or not cand[k, f]:
                continue
            x = XT[f, i]
            if nL[k] > 0 and x > last[k]:
                nR = n_tot[k] - nL[k]
                WR = W_tot[k] - WL[k]
                if (nL[k] >= min_samples_leaf and nR >= min_samples_leaf
                        and WL[k] >= min_child_weight and WR >= min_child_weight):
                    gain = (_side_score(WL[k], SL[k], mode, lam)
                            + _side_score(WR, S_tot[k] - SL[k], mode, lam) - parent[k])
                    if gain > best_gain[k]:
                        best_gain[k] = gain
                        best_feat[k] = f
                        thr = 0.5 * (last[k] + x)
                        if thr >= x:
                            thr = last[k]
                        best_thr[k] = thr
            WL[k] += w[i]
            SL[k] += s[i]
            nL[k] += 1
            last[k] = x
    return best_gain, best_feat, best_thr
