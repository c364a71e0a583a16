"""Histogram boosting with gradient-based one-side sampling and leaf-wise growth."""

from dataclasses import dataclass, field

import numpy as np

from ..seeding import stream
from ..trees import LEAF, NEWTON, DecisionTree
from .loss import check_binary, log_loss, predict_labels, prior_log_odds, sigmoid

MAX_BINS = 255


def bin_edges(x: np.ndarray, n_bins: int = MAX_BINS) -> np.ndarray:
    """Split points for one feature, strictly increasing, at most ``n_bins - 1`` of them.

    Every edge is a midpoint between two consecutive distinct values. With few
    distinct values each gap gets an edge; otherwise edges go where the
    cumulative count crosses equal-frequency quantiles.
    """
    values, counts = np.unique(x, return_counts=True)
    if len(values) < 2:
        return np.empty(0)
    mids = 0.5 * (values[:-1] + values[1:])
    mids = np.where(mids < values[1:], mids, values[:-1])
    if len(values) <= n_bins:
        return mids
    cum = np.cumsum(counts)[:-1]  # rows at or below each gap
    targets = np.arange(1, n_bins) * (cum[-1] + counts[-1]) / n_bins
    gaps = np.unique(np.minimum(np.searchsorted(cum, targets), len(mids) - 1))
    return mids[gaps]


def bin_matrix(X: np.ndarray, edges: list) -> np.ndarray:
    """Bin index per cell: ``x <= edges[b]`` iff bin ``<= b``."""
    out = np.empty(X.shape, dtype=np.uint8)
    for j, e in enumerate(edges):
        out[:, j] = np.searchsorted(e, X[:, j], side="left")
    return out


def goss_sample(g: np.ndarray, a: float, b: float, rng: np.random.Generator):
    """Rows kept by GOSS and their gradient multipliers.

    The ``floor(a n)`` rows with the largest ``|g|`` are kept with weight 1; a
    uniform ``floor(b n)`` sample of the rest gets weight ``(1 - a) / b``.
    """
    n = len(g)
    if a >= 1.0:
        return np.arange(n), np.ones(n)
    n_top = int(a * n)
    n_rand = min(int(b * n), n - n_top)
    order = np.argsort(-np.abs(g), kind="stable")
    top = order[:n_top]
    rest = order[n_top:]
    picked = rest[rng.choice(len(rest), n_rand, replace=False)] if n_rand else rest[:0]
    rows = np.concatenate([top, picked])
    mult = np.concatenate([np.ones(n_top), np.full(n_rand, (1.0 - a) / b)])
    keep = np.argsort(rows, kind="stable")
    return rows[keep], mult[keep]


def _best_split(hist_g, hist_h, hist_n, n_bins, G, H, n, min_data_in_leaf, min_sum_hessian):
    """Best (gain, feature, bin) for one leaf from its ``(d, width)`` histograms.

    ``n_bins[f]`` is the number of used bins of feature f. Ties go to the lower
    feature, then the lower bin; no admissible split returns feature -1.
    """
    parent = G * G / H if H > 0 else 0.0
    GL = np.cumsum(hist_g, axis=1)
    HL = np.cumsum(hist_h, axis=1)
    nL = np.cumsum(hist_n, axis=1)
    GR, HR, nR = G - GL, H - HL, n - nL
    inside = np.arange(hist_g.shape[1])[None, :] < (n_bins - 1)[:, None]
    ok = (inside & (nL >= min_data_in_leaf) & (nR >= min_data_in_leaf)
          & (HL >= min_sum_hessian) & (HR >= min_sum_hessian))
    if not ok.any():
        return (0.0, -1, -1)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = 0.5 * (GL * GL / HL + GR * GR / HR - parent)
    gain = np.where(ok, gain, -np.inf)
    f, t = np.unravel_index(int(np.argmax(gain)), gain.shape)
    if not gain[f, t] > 0:
        return (0.0, -1, -1)
    return (float(gain[f, t]), int(f), int(t))


def grow_leafwise(B, edges, g, h, rows, max_leaves=31, max_depth=None, min_data_in_leaf=20,
                  min_sum_hessian=1e-3):
    """Leaf-wise tree on binned data: repeatedly split the leaf with the largest gain.

    ``g``/``h`` are already GOSS-scaled and aligned with ``rows``. Gain ties go
    to the earliest-created leaf. Leaf values are ``-G / H``.
    """
    d = B.shape[1]
    n_bins = np.array([len(e) + 1 for e in edges])
    width = int(n_bins.max())
    shift = (np.arange(d) * width)[None, :]

    def histograms(r, gr, hr):
        flat = (B[r].astype(np.int64) + shift).ravel()
        size = d * width
        return (np.bincount(flat, weights=np.repeat(gr, d), minlength=size).reshape(d, width),
                np.bincount(flat, weights=np.repeat(hr, d), minlength=size).reshape(d, width),
                np.bincount(flat, minlength=size).reshape(d, width).astype(np.float64))

    feature, threshold, left, right, gain_node = [LEAF], [0.0], [LEAF], [LEAF], [0.0]
    depth = [0]
    members = {0: np.arange(len(rows))}
    G_node = [float(g.sum())]
    H_node = [float(h.sum())]
    hists = {0: histograms(rows, g, h)}
    candidates = {}

    def evaluate(node):
        if max_depth is not None and depth[node] >= max_depth:
            return
        hg, hh, hn = hists[node]
        cand = _best_split(hg, hh, hn, n_bins, G_node[node], H_node[node], len(members[node]),
                           min_data_in_leaf, min_sum_hessian)
        if cand[1] >= 0:
            candidates[node] = cand

    evaluate(0)
    n_leaves = 1
    while n_leaves < max_leaves and candidates:
        node = max(candidates, key=lambda k: (candidates[k][0], -k))
        gain, f, t = candidates.pop(node)
        m = members.pop(node)
        go_left = B[rows[m], f] <= t
        feature[node], threshold[node], gain_node[node] = f, float(edges[f][t]), gain
        parent_hist = hists.pop(node)
        children = []
        for part in (m[go_left], m[~go_left]):
            c = len(feature)
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            gain_node.append(0.0)
            depth.append(depth[node] + 1)
            members[c] = part
            G_node.append(float(g[part].sum()))
            H_node.append(float(h[part].sum()))
            children.append(c)
        left[node], right[node] = children
        # histogram subtraction: build the smaller child, derive the larger
        small, large = sorted(children, key=lambda c: len(members[c]))
        hists[small] = histograms(rows[members[small]], g[members[small]], h[members[small]])
        hists[large] = tuple(p - s for p, s in zip(parent_hist, hists[small]))
        for c in children:
            evaluate(c)
        n_leaves += 1

    G_arr, H_arr = np.array(G_node), np.array(H_node)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.where(H_arr > 0, -G_arr / H_arr, 0.0)
    return DecisionTree(
        feature=np.array(feature, dtype=np.int64), threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64), right=np.array(right, dtype=np.int64),
        value=value[:, None], weight=H_arr, impurity_decrease=np.array(gain_node),
        mode=NEWTON, n_features=d, max_depth=max_depth, node_sum=G_arr,
    )


@dataclass
class LgbmModel:
    F0: float
    trees: list
    edges: list
    learning_rate: float
    n_estimators: int
    max_leaves: int
    a: float
    b: float
    train_loss: list = field(default_factory=list)

    def raw_score(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        F = np.full(len(X), self.F0)
        for tree in self.trees:
            F += self.learning_rate * tree.predict(X)
        return F

    def score(self, X) -> np.ndarray:
        return sigmoid(self.raw_score(X))

    def predict(self, X) -> np.ndarray:
        return predict_labels(self.score(X))

    def to_dict(self) -> dict:
        return {"F0": self.F0, "trees": [t.to_dict() for t in self.trees],
                "edges": [e.tolist() for e in self.edges], "learning_rate": self.learning_rate,
                "n_estimators": self.n_estimators, "max_leaves": self.max_leaves,
                "a": self.a, "b": self.b}

    @classmethod
    def from_dict(cls, d):
        return cls(d["F0"], [DecisionTree.from_dict(t) for t in d["trees"]],
                   [np.array(e, dtype=np.float64) for e in d["edges"]], d["learning_rate"],
                   d["n_estimators"], d["max_leaves"], d["a"], d["b"])


def fit_lgbm(X, y, n_bins: int = MAX_BINS, max_leaves: int = 31, a: float = 0.2, b: float = 0.1,
             learning_rate: float = 0.1, n_estimators: int = 100, seed: int = 0,
             max_depth: int | None = None, min_data_in_leaf: int = 20,
             min_sum_hessian: float = 1e-3) -> LgbmModel:
    """Leaf-wise histogram boosting on logistic loss with GOSS row sampling.

    ``a = 1`` switches GOSS off (``b`` is then forced to 0).
    """
    X, y = check_binary(X, y)
    if not 2 <= n_bins <= MAX_BINS:
        raise ValueError(f"n_bins must lie in [2, {MAX_BINS}]")
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    if a == 1:
        b = 0.0
    elif not 0 < b <= 1 - a:
        raise ValueError("b must lie in (0, 1 - a]")
    if max_leaves < 2:
        raise ValueError("max_leaves must be at least 2")
    edges = [bin_edges(X[:, j], n_bins) for j in range(X.shape[1])]
    B = bin_matrix(X, edges)
    F0 = prior_log_odds(y)
    F = np.full(len(y), F0)
    trees, losses = [], [log_loss(y, F)]
    for m in range(n_estimators):
        p = sigmoid(F)
        g = p - y
        h = p * (1.0 - p)
        rows, mult = goss_sample(g, a, b, stream(seed, "goss", m))
        tree = grow_leafwise(B, edges, g[rows] * mult, h[rows] * mult, rows, max_leaves,
                             max_depth, min_data_in_leaf, min_sum_hessian)
        F += learning_rate * tree.predict(X)
        trees.append(tree)
        losses.append(log_loss(y, F))
    return LgbmModel(F0, trees, edges, learning_rate, n_estimators, max_leaves, a, b, losses)


def score_lgbm(model: LgbmModel, X) -> np.ndarray:
    return model.score(X)
