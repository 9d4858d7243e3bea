"""
Binary decision trees stored as flat arrays.

Two growers share one node layout: a Gini classification tree (used alone and
in forests) and a second-order regression tree (used by boosting).  A row
goes left when ``x[feature] <= threshold``.  Split search tries features in
ascending index order and thresholds in ascending order; a candidate replaces
the incumbent only if it is strictly better, so ties resolve to the lowest
feature index, then the lowest threshold.

.. autosummary::

    ~TreeArrays
    ~best_gini_split
    ~best_gain_split
    ~grow_classifier
    ~grow_regressor
"""

__all__ = """
    best_gain_split
    best_gini_split
    grow_classifier
    grow_regressor
    TreeArrays
""".split()

import logging
from dataclasses import dataclass
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

logger = logging.getLogger(__name__)

LEAF = -1
TIE_TOLERANCE = 1e-12
TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class TreeArrays:
    """
    A fitted tree.

    Node 0 is the root.  For a leaf, ``feature`` is -1 and ``value`` holds the
    prediction: the class (0 or 1) of a classification tree, or the leaf
    weight of a regression tree.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "feature", np.asarray(self.feature, dtype=np.int64))
        object.__setattr__(self, "threshold", np.asarray(self.threshold, dtype=float))
        object.__setattr__(self, "left", np.asarray(self.left, dtype=np.int64))
        object.__setattr__(self, "right", np.asarray(self.right, dtype=np.int64))
        object.__setattr__(self, "value", np.asarray(self.value, dtype=float))

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def depth(self):
        depths = np.zeros(self.n_nodes, dtype=int)
        for node in range(self.n_nodes):  # children always follow their parent
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max()) if self.n_nodes else 0

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of ``X``."""
        X = np.asarray(X, dtype=float)
        nodes = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        active = self.feature[nodes] != LEAF
        while active.any():
            r, n = rows[active], nodes[active]
            go_left = X[r, self.feature[n]] <= self.threshold[n]
            nodes[r] = np.where(go_left, self.left[n], self.right[n])
            active = self.feature[nodes] != LEAF
        return nodes

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["feature"], data["threshold"], data["left"], data["right"], data["value"])


class _Nodes:
    """Preorder node storage while growing."""

    def __init__(self):
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def add(self, feature=LEAF, threshold=0.0, value=0.0):
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.feature) - 1

    def freeze(self):
        return TreeArrays(self.feature, self.threshold, self.left, self.right, self.value)


def _sorted_column(x):
    """Sort order of ``x`` plus the valid cut positions and their thresholds."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cuts = np.flatnonzero(xs[:-1] < xs[1:])
    lo, hi = xs[cuts], xs[cuts + 1]
    thresholds = (lo + hi) / 2.0
    # adjacent floats: the midpoint may round up onto the right value
    thresholds = np.where(thresholds < hi, thresholds, lo)
    return order, cuts, thresholds


def best_gini_split(X: np.ndarray, y: np.ndarray, features: Optional[Sequence[int]] = None):
    """
    Lowest weighted Gini impurity split of ``(X, y)``.

    Returns ``(feature, threshold, impurity)``, or None when no feature has
    two distinct values.
    """
    n, d = X.shape
    features = range(d) if features is None else sorted(features)
    best = None
    total_pos = float(y.sum())
    n_left = np.arange(1, n, dtype=float)
    n_right = n - n_left
    for f in features:
        order, cuts, thresholds = _sorted_column(X[:, f])
        if len(cuts) == 0:
            continue
        pos_left = np.cumsum(y[order])[:-1].astype(float)[cuts]
        nl, nr = n_left[cuts], n_right[cuts]
        pos_right = total_pos - pos_left
        gini_left = 1.0 - (pos_left / nl) ** 2 - ((nl - pos_left) / nl) ** 2
        gini_right = 1.0 - (pos_right / nr) ** 2 - ((nr - pos_right) / nr) ** 2
        impurity = (nl * gini_left + nr * gini_right) / n
        i = int(np.flatnonzero(impurity <= impurity.min() + TIE_TOLERANCE)[0])
        if best is None or impurity[i] < best[2] - TIE_TOLERANCE:
            best = (int(f), float(thresholds[i]), float(impurity[i]))
    return best


def _leaf_class(y):
    positives = int(y.sum())
    # ties go to class 0
    return 1.0 if 2 * positives > len(y) else 0.0


def grow_classifier(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int,
    min_samples_split: int = 2,
    features_per_split: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> TreeArrays:
    """
    Greedy Gini tree.

    Growth stops at ``max_depth``, below ``min_samples_split`` rows, at a pure
    node, or when the candidate features cannot separate the rows.  With
    ``features_per_split`` smaller than the column count, each node draws that
    many candidate features from ``rng`` without replacement.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    d = X.shape[1]
    k = d if features_per_split is None else int(features_per_split)
    nodes = _Nodes()

    def grow(rows, depth):
        ys = y[rows]
        node = nodes.add(value=_leaf_class(ys))
        if depth >= max_depth or len(rows) < max(2, min_samples_split) or ys.min() == ys.max():
            return node
        candidates = None if k >= d else rng.choice(d, size=k, replace=False)
        split = best_gini_split(X[rows], ys, candidates)
        if split is None:
            return node
        feature, threshold, _ = split
        go_left = X[rows, feature] <= threshold
        nodes.feature[node], nodes.threshold[node] = feature, threshold
        nodes.left[node] = grow(rows[go_left], depth + 1)
        nodes.right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(np.arange(len(y)), 0)
    return nodes.freeze()


def _score(grad, hess, lam):
    return grad * grad / np.maximum(hess + lam, TINY)


def best_gain_split(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    lam: float,
    min_child_weight: float = 1.0,
) -> Optional[Tuple[int, float, float]]:
    """
    Highest second-order gain split, ``(feature, threshold, gain)``.

    Gain is ``GL²/(HL+λ) + GR²/(HR+λ) − G²/(H+λ)``.  Only splits with
    positive gain and both child hessian sums at least ``min_child_weight``
    qualify; None when nothing qualifies.
    """
    n, d = X.shape
    G, H = float(grad.sum()), float(hess.sum())
    parent = _score(G, H, lam)
    best = None
    for f in range(d):
        order, cuts, thresholds = _sorted_column(X[:, f])
        if len(cuts) == 0:
            continue
        gl = np.cumsum(grad[order])[:-1][cuts]
        hl = np.cumsum(hess[order])[:-1][cuts]
        gr, hr = G - gl, H - hl
        gain = _score(gl, hl, lam) + _score(gr, hr, lam) - parent
        allowed = (hl >= min_child_weight) & (hr >= min_child_weight) & (gain > TIE_TOLERANCE)
        if not allowed.any():
            continue
        gain = np.where(allowed, gain, -np.inf)
        i = int(np.flatnonzero(gain >= gain.max() - TIE_TOLERANCE)[0])
        if best is None or gain[i] > best[2] + TIE_TOLERANCE:
            best = (int(f), float(thresholds[i]), float(gain[i]))
    return best


def grow_regressor(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    max_depth: int,
    lam: float = 1.0,
    min_child_weight: float = 1.0,
    scale: float = 1.0,
) -> TreeArrays:
    """
    Regression tree on first/second-order gradients.

    Leaf weight is ``-scale * G / (H + λ)``.
    """
    X = np.asarray(X, dtype=float)
    nodes = _Nodes()

    def grow(rows, depth):
        g, h = grad[rows], hess[rows]
        node = nodes.add(value=-scale * float(g.sum()) / max(float(h.sum()) + lam, TINY))
        if depth >= max_depth or len(rows) < 2:
            return node
        split = best_gain_split(X[rows], g, h, lam, min_child_weight)
        if split is None:
            return node
        feature, threshold, _ = split
        go_left = X[rows, feature] <= threshold
        nodes.feature[node], nodes.threshold[node] = feature, threshold
        nodes.left[node] = grow(rows[go_left], depth + 1)
        nodes.right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(np.arange(len(grad)), 0)
    return nodes.freeze()
