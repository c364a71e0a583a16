"""CART trees (weighted Gini classification, least-squares regression) and a
bagged random forest with mean-decrease-in-impurity importances."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _splitter
from .seeding import stream

CLASSIFY = "classify"
REGRESS = "regress"
NEWTON = "newton"
LEAF = -1


def resolve_max_features(max_features, n_features: int) -> int:
    if max_features in (None, "all", "None"):
        return n_features
    if max_features == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    if isinstance(max_features, float) and 0 < max_features <= 1:
        return max(1, int(max_features * n_features))
    m = int(max_features)
    if not 1 <= m:
        raise ValueError(f"max_features must be positive, got {max_features}")
    return min(m, n_features)


@dataclass
class DecisionTree:
    """Flat node arrays; ``feature[i] == -1`` marks a leaf.

    Rows with ``x[feature] <= threshold`` go left. ``value`` holds weighted
    class frequencies ``[p0, p1]`` (classify) or the weighted target mean
    (regress) for every node.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    weight: np.ndarray
    impurity_decrease: np.ndarray
    mode: str
    n_features: int
    max_depth: int | None = None
    min_samples_leaf: int = 1
    node_sum: np.ndarray | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index reached by each row."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got shape {X.shape}")
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while len(active):
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = self.value[self.apply(X)]
        return out if self.value.shape[1] > 1 else out[:, 0]

    def feature_importances(self) -> np.ndarray:
        """Impurity decrease per feature relative to the root weight (unnormalized)."""
        imp = np.zeros(self.n_features)
        internal = self.feature != LEAF
        np.add.at(imp, self.feature[internal], self.impurity_decrease[internal])
        return imp / self.weight[0] if self.weight[0] > 0 else imp

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_features": self.n_features,
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        n = len(d["feature"])
        return cls(
            feature=np.array(d["feature"], dtype=np.int64),
            threshold=np.array(d["threshold"], dtype=np.float64),
            left=np.array(d["left"], dtype=np.int64),
            right=np.array(d["right"], dtype=np.int64),
            value=np.array(d["value"], dtype=np.float64).reshape(n, -1),
            weight=np.zeros(n),
            impurity_decrease=np.zeros(n),
            mode=d["mode"],
            n_features=d["n_features"],
        )


def _cost(W, S, mode):
    """Weighted node impurity up to a term that cancels in split gains.

    classify: W * gini = 2 S (W - S) / W with S the weighted positive mass.
    regress: -S^2 / W with S the weighted target sum (W * variance minus sum w y^2).
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        if mode == CLASSIFY:
            return np.where(W > 0, 2.0 * S * (W - S) / W, 0.0)
        return np.where(W > 0, -S * S / W, 0.0)


def split_gain(W, S, WL, SL, mode):
    """Weighted impurity decrease of splitting (W, S) into (WL, SL) and the rest."""
    return float(_cost(W, S, mode) - _cost(WL, SL, mode) - _cost(W - WL, S - SL, mode))


def presort(X: np.ndarray) -> np.ndarray:
    """Column-wise stable argsort, shape ``(d, n)``; reusable across fits on the same X."""
    return np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T)


_KERNEL_MODE = {CLASSIFY: _splitter.GINI, REGRESS: _splitter.SQUARED, NEWTON: _splitter.NEWTON}


def grow_tree(X, w, s, mode, max_depth=None, max_features="all", min_samples_leaf=1,
              seed=0, sorted_index=None, y=None, reg_lambda=0.0, gamma=0.0,
              min_child_weight=0.0, min_gain=None):
    """Level-wise exact greedy growth shared by CART and second-order boosting.

    ``w`` and ``s`` are per-row weight and weighted target (classify: w*y,
    regress: w*y, newton: hessian and gradient). Rows with ``w <= 0`` are
    excluded, except in newton mode where every row takes part. Returns a
    :class:`DecisionTree` whose ``weight``/``node_sum`` hold the per-node
    totals of ``w`` and ``s``; leaf values are left for the caller in newton
    mode.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, d = X.shape
    w = np.asarray(w, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if sorted_index is None:
        sorted_index = presort(X)
    XT = np.ascontiguousarray(X.T)
    m = resolve_max_features(max_features, d)
    rng = stream(seed, "cart") if m < d else None
    depth_cap = math.inf if max_depth is None else max_depth
    kmode = _KERNEL_MODE[mode]
    if min_gain is None:
        # impurity criteria split at zero gain (needed for XOR-like data); newton refuses it
        min_gain = -np.inf if mode != NEWTON else 0.0

    active = np.ones(n, dtype=bool) if mode == NEWTON else w > 0
    node_of = np.where(active, 0, -1).astype(np.int64)
    feature, threshold, left, right, weight, node_sum, decrease = [LEAF], [0.0], [LEAF], [LEAF], [], [], [0.0]
    frontier = [0]
    depth = 0
    while frontier:
        k = len(frontier)
        live = node_of >= 0
        slots = node_of[live]
        W_tot = np.bincount(slots, weights=w[live], minlength=k)
        S_tot = np.bincount(slots, weights=s[live], minlength=k)
        n_tot = np.bincount(slots, minlength=k)
        weight.extend(W_tot.tolist())
        node_sum.extend(S_tot.tolist())
        if depth >= depth_cap:
            break
        splittable = n_tot >= max(2, 2 * min_samples_leaf)
        if mode == CLASSIFY:
            pos = np.bincount(slots, weights=(y[live] > 0.5).astype(float), minlength=k)
            splittable &= (pos > 0) & (pos < n_tot)
        elif mode == REGRESS:
            lo, hi = _splitter.slot_ranges(y[:, None].astype(np.float64), node_of, k)
            splittable &= lo[:, 0] < hi[:, 0]
        if not splittable.any():
            break
        cand = np.zeros((k, d), dtype=np.bool_)
        if m < d:
            lo, hi = _splitter.slot_ranges(X, node_of, k)
            varying = lo < hi
            for slot in np.flatnonzero(splittable):
                perm = rng.permutation(d)
                chosen = perm[varying[slot, perm]][:m]
                cand[slot, chosen] = True
        else:
            cand[splittable] = True
        gain, feat, thr = _splitter.best_splits(
            XT, sorted_index, node_of, cand, w, s, W_tot, S_tot, n_tot, kmode,
            float(reg_lambda), float(min_child_weight), int(min_samples_leaf))
        if mode == NEWTON:
            # a node with a constant g/h ratio has zero gain; drop float residue
            parent = S_tot ** 2 / np.maximum(W_tot + reg_lambda, 1e-300)
            gain = np.where(gain > 1e-12 * parent, gain, -np.inf)
        gain = gain - gamma
        next_frontier = []
        left_slot = np.full(k, -1, dtype=np.int64)
        right_slot = np.full(k, -1, dtype=np.int64)
        for slot, node in enumerate(frontier):
            if feat[slot] < 0 or not gain[slot] > min_gain:
                continue
            feature[node] = int(feat[slot])
            threshold[node] = float(thr[slot])
            decrease[node] = max(float(gain[slot]), 0.0)
            for side, slots_arr in ((left, left_slot), (right, right_slot)):
                child = len(feature)
                feature.append(LEAF)
                threshold.append(0.0)
                left.append(LEAF)
                right.append(LEAF)
                decrease.append(0.0)
                side[node] = child
                slots_arr[slot] = len(next_frontier)
                next_frontier.append(child)
        if not next_frontier:
            break
        rows = np.flatnonzero(live)
        cur = node_of[rows]
        f = feat[cur]
        split_rows = left_slot[cur] >= 0
        go_left = np.zeros(len(rows), dtype=bool)
        sr = rows[split_rows]
        go_left[split_rows] = X[sr, f[split_rows]] <= thr[cur[split_rows]]
        new = np.where(go_left, left_slot[cur], right_slot[cur])
        node_of[rows] = np.where(split_rows, new, -1)
        frontier = next_frontier
        depth += 1

    weight = np.array(weight)
    node_sum = np.array(node_sum)
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = np.where(weight > 0, node_sum / weight, 0.0)
    if mode == CLASSIFY:
        value = np.column_stack([1.0 - mean, mean])
    else:
        value = mean[:, None].copy()
    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=value,
        weight=weight,
        impurity_decrease=np.array(decrease),
        mode=mode,
        n_features=d,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        node_sum=node_sum,
    )


def fit_cart(X, y, sample_weight=None, mode: str = CLASSIFY, max_depth: int | None = None,
             max_features="all", min_samples_leaf: int = 1, seed: int = 0,
             sorted_index: np.ndarray | None = None) -> DecisionTree:
    """Greedy CART fit.

    Classification expects labels in {0, 1} and uses weighted Gini; regression
    uses weighted squared error. Rows with zero weight take no part in the fit
    (bootstrap and subsample callers pass multiplicities as weights). When
    ``max_features`` is below the feature count, candidate features are drawn
    per split from a seeded permutation, skipping features that are constant
    within the node. Equal gains resolve to the lower feature index, then the
    lower threshold.

    ``sorted_index`` is an optional :func:`presort` of ``X``, worth passing when
    many trees are fitted on the same matrix.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("fit_cart needs a non-empty 2-D matrix")
    n, d = X.shape
    if y.shape != (n,):
        raise ValueError("y must have one entry per row")
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    if w.shape != (n,):
        raise ValueError("sample_weight must have one entry per row")
    if (w < 0).any():
        raise ValueError("sample weights must be non-negative")
    if w.sum() <= 0:
        raise ValueError("sample weights must have a positive sum")
    if mode not in (CLASSIFY, REGRESS):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == CLASSIFY and not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("classification labels must be 0 or 1")
    return grow_tree(X, w, w * y, mode, max_depth, max_features, min_samples_leaf, seed,
                     sorted_index, y=y)


def predict_tree(tree: DecisionTree, X) -> np.ndarray:
    return tree.predict(X)


def balanced_class_weights(y: np.ndarray) -> np.ndarray:
    """``w_c = n / (2 n_c)`` for c in {0, 1}."""
    counts = np.bincount(np.asarray(y, dtype=np.int64), minlength=2)
    if (counts == 0).any():
        raise ValueError("both classes must be present")
    return len(y) / (2.0 * counts)


@dataclass
class RandomForest:
    trees: list
    importances: np.ndarray
    n_trees: int
    class_weight: str | None = "balanced"
    max_depth: int | None = None
    max_features: object = "sqrt"

    @property
    def normalized_importances(self) -> np.ndarray:
        total = self.importances.sum()
        return self.importances / total if total > 0 else self.importances.copy()

    def predict_proba(self, X) -> np.ndarray:
        return np.mean([t.predict(X)[:, 1] for t in self.trees], axis=0)


def fit_random_forest(X, y, n_trees: int = 100, max_depth: int | None = None,
                      max_features="sqrt", class_weight: str | None = "balanced",
                      seed: int = 0, min_samples_leaf: int = 1, n_jobs: int = 1) -> RandomForest:
    """Bagged CART classifiers.

    Each tree sees a bootstrap sample of n draws with replacement, expressed as
    integer multiplicity weights (times the balanced class weights), and owns a
    PRNG stream derived from ``(seed, tree index)``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise ValueError("random forest needs both classes")
    n = len(y)
    cw = balanced_class_weights(y) if class_weight == "balanced" else np.ones(2)
    sorted_index = presort(X)

    def grow(t):
        rng = stream(seed, "forest", t)
        counts = np.bincount(rng.integers(0, n, n), minlength=n)
        tree_seed = int(rng.integers(2**63))
        return fit_cart(X, y, counts * cw[y], CLASSIFY, max_depth, max_features,
                        min_samples_leaf, tree_seed, sorted_index)

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            trees = list(pool.map(grow, range(n_trees)))
    else:
        trees = [grow(t) for t in range(n_trees)]
    per_tree = []
    for t in trees:
        imp = t.feature_importances()
        total = imp.sum()
        per_tree.append(imp / total if total > 0 else imp)
    importances = np.mean(per_tree, axis=0)
    return RandomForest(trees, importances, n_trees, class_weight, max_depth, max_features)
