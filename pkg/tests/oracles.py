"""Slow, obviously-correct reference implementations used as test oracles."""

import math
from collections import deque
from itertools import product

import numpy as np


def dist(a, b, metric="euclidean"):
    if metric == "manhattan":
        return sum(abs(x - y) for x, y in zip(a, b))
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def knn(points, query, k, metric="euclidean", skip=None):
    cand = [(dist(p, query, metric), i) for i, p in enumerate(points) if i != skip]
    cand.sort()
    return cand[:k]


def dbscan(points, eps, min_pts):
    n = len(points)
    nbrs = [[j for j in range(n) if dist(points[i], points[j]) <= eps] for i in range(n)]
    core = [len(nb) >= min_pts for nb in nbrs]
    labels = [-1] * n
    visited = [False] * n
    cluster = 0
    for i in range(n):
        if not core[i] or labels[i] != -1:
            continue
        labels[i] = cluster
        queue = deque([i])
        visited[i] = True
        while queue:
            p = queue.popleft()
            for q in nbrs[p]:
                if labels[q] == -1:
                    labels[q] = cluster
                if core[q] and not visited[q]:
                    visited[q] = True
                    queue.append(q)
        cluster += 1
    return labels, core


def same_partition(a, b):
    """Equal up to a relabeling of cluster ids, with noise (-1) matched exactly."""
    a, b = list(a), list(b)
    if [x == -1 for x in a] != [x == -1 for x in b]:
        return False
    fwd, back = {}, {}
    for x, y in zip(a, b):
        if x == -1:
            continue
        if fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
            return False
    return True


def weighted_gini_cost(w, y):
    W = sum(w)
    if W == 0:
        return 0.0
    p = sum(wi for wi, yi in zip(w, y) if yi == 1) / W
    return W * 2 * p * (1 - p)


def best_root_split(X, y, w):
    """Exhaustive search of (feature, midpoint) maximizing weighted Gini decrease."""
    n, d = X.shape
    parent = weighted_gini_cost(w, y)
    best = (-math.inf, None, None)
    for f in range(d):
        vals = sorted(set(X[:, f]))
        for lo, hi in zip(vals, vals[1:]):
            t = (lo + hi) / 2
            left = X[:, f] <= t
            gain = parent - weighted_gini_cost(w[left], y[left]) - weighted_gini_cost(w[~left], y[~left])
            if gain > best[0] + 1e-12:
                best = (gain, f, t)
    return best


def auc_pairs(y, s):
    pos = [si for si, yi in zip(s, y) if yi == 1]
    neg = [si for si, yi in zip(s, y) if yi == 0]
    total = 0.0
    for p, q in product(pos, neg):
        total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def average_precision(y, s):
    """Threshold enumeration: every distinct score, high to low."""
    P = sum(y)
    ap, prev_recall = 0.0, 0.0
    for t in sorted(set(s), reverse=True):
        sel = [yi for yi, si in zip(y, s) if si >= t]
        tp = sum(sel)
        recall = tp / P
        precision = tp / len(sel)
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


def metrics_from_counts(tp, fp, tn, fn):
    from fractions import Fraction as F

    def ratio(a, b):
        return F(a, b) if b else F(0)
    recall = ratio(tp, tp + fn)
    spec = ratio(tn, tn + fp)
    prec = ratio(tp, tp + fp)
    f1 = 2 * prec * recall / (prec + recall) if prec + recall else F(0)
    return {"recall": float(recall), "specificity": float(spec), "precision": float(prec),
            "f1": float(f1), "g_mean": math.sqrt(float(recall * spec))}


def leafwise_exact(X, g, h, max_leaves, min_data_in_leaf=1, min_sum_hessian=0.0):
    """Exact-threshold leaf-wise growth with the second-order gain (no regularization).

    Returns the (feature, threshold) splits in order and a leaf id per row.
    """
    leaves = [np.arange(len(g))]
    splits = []

    def best(rows):
        G, H = g[rows].sum(), h[rows].sum()
        out = (0.0, -1, None)
        for f in range(X.shape[1]):
            vals = np.unique(X[rows, f])
            for lo, hi in zip(vals[:-1], vals[1:]):
                t = (lo + hi) / 2
                left = rows[X[rows, f] <= t]
                right = rows[X[rows, f] > t]
                if len(left) < min_data_in_leaf or len(right) < min_data_in_leaf:
                    continue
                GL, HL = g[left].sum(), h[left].sum()
                GR, HR = G - GL, H - HL
                if HL < min_sum_hessian or HR < min_sum_hessian:
                    continue
                gain = 0.5 * (GL ** 2 / HL + GR ** 2 / HR - G ** 2 / H)
                if gain > out[0]:
                    out = (gain, f, t)
        return out

    cands = {0: best(leaves[0])}
    next_id = 1
    members = {0: leaves[0]}
    while len(members) < max_leaves:
        live = {k: v for k, v in cands.items() if v[1] >= 0}
        if not live:
            break
        k = max(live, key=lambda j: (live[j][0], -j))
        gain, f, t = cands.pop(k)
        rows = members.pop(k)
        splits.append((f, t))
        for part in (rows[X[rows, f] <= t], rows[X[rows, f] > t]):
            members[next_id] = part
            cands[next_id] = best(part)
            next_id += 1
    leaf = np.empty(len(g), dtype=int)
    for k, rows in members.items():
        leaf[rows] = k
    return splits, leaf
