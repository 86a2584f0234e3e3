"""CART-style classification tree on the standardized feature space.

Greedy binary splits minimize the weighted Gini impurity of the children;
candidate thresholds are midpoints between consecutive distinct sorted
feature values. Equal-impurity ties resolve to the lowest feature index,
then the lowest threshold, so training is deterministic. Leaves hold a
Laplace-smoothed positive fraction (n_pos + 1) / (n + 2), which keeps every
score strictly inside (0, 1).

Nodes are plain dicts — ``{"leaf": p}`` or ``{"feature": j, "threshold": t,
"left": .., "right": ..}`` — which makes them JSON-ready as stored state.
A row goes left when ``value <= threshold``.
"""

from dataclasses import dataclass

import numpy as np

from ..data import ScalingParams
from .base import (
    ClassifierKind,
    TrainedClassifier,
    as_kind,
    common_state,
    register_model,
    scaling_from_state,
)
from .params import Hyperparams


def leaf_value(labels_sum: float, count: int) -> float:
    return (labels_sum + 1.0) / (count + 2.0)


def best_gini_split(z: np.ndarray, y: np.ndarray, feature_indices):
    """Lowest weighted child Gini over all midpoint thresholds.

    Returns (feature, threshold) or None when no candidate feature has two
    distinct values. Ties: first by weighted Gini, then lowest feature
    index, then lowest threshold (guaranteed by scan order and strict
    comparison).
    """
    n = y.size
    best = None
    best_score = np.inf
    for j in feature_indices:
        v = z[:, j]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        ys = y[order]
        cut = np.nonzero(vs[1:] != vs[:-1])[0]  # split after position i
        if cut.size == 0:
            continue
        n_left = cut + 1
        n_right = n - n_left
        pos_left = np.cumsum(ys)[cut]
        pos_total = ys.sum()
        pos_right = pos_total - pos_left
        p_l = pos_left / n_left
        p_r = pos_right / n_right
        weighted = (n_left * 2 * p_l * (1 - p_l) + n_right * 2 * p_r * (1 - p_r)) / n
        i = int(np.argmin(weighted))  # first minimum = lowest threshold
        if weighted[i] < best_score:
            best_score = float(weighted[i])
            thr = 0.5 * (vs[cut[i]] + vs[cut[i] + 1])
            best = (int(j), float(thr))
    return best


def grow_tree(z, y, max_depth, min_samples_split, pick_features=None, depth=0):
    """Recursive grower; ``pick_features`` narrows candidates per node."""
    n = y.size
    pos = float(y.sum())
    if (
        depth >= max_depth
        or n < max(min_samples_split, 2)
        or pos == 0.0
        or pos == float(n)
    ):
        return {"leaf": leaf_value(pos, n)}
    if pick_features is None:
        candidates = range(z.shape[1])
    else:
        candidates = pick_features(z.shape[1])
    split = best_gini_split(z, y, candidates)
    if split is None:
        return {"leaf": leaf_value(pos, n)}
    j, thr = split
    mask = z[:, j] <= thr
    return {
        "feature": j,
        "threshold": thr,
        "left": grow_tree(z[mask], y[mask], max_depth, min_samples_split, pick_features, depth + 1),
        "right": grow_tree(z[~mask], y[~mask], max_depth, min_samples_split, pick_features, depth + 1),
    }


def apply_tree(node: dict, z: np.ndarray) -> np.ndarray:
    """Leaf value per row of ``z``, vectorized by index masks."""
    out = np.empty(z.shape[0], dtype=np.float64)
    _apply(node, z, np.arange(z.shape[0]), out)
    return out


def _apply(node, z, idx, out):
    if "leaf" in node:
        out[idx] = node["leaf"]
        return
    mask = z[idx, node["feature"]] <= node["threshold"]
    if mask.any():
        _apply(node["left"], z, idx[mask], out)
    if not mask.all():
        _apply(node["right"], z, idx[~mask], out)


def tree_depth(node: dict) -> int:
    if "leaf" in node:
        return 0
    return 1 + max(tree_depth(node["left"]), tree_depth(node["right"]))


def _check_node(node) -> dict:
    if not isinstance(node, dict):
        raise ValueError("tree node must be a mapping")
    if "leaf" in node:
        return {"leaf": float(node["leaf"])}
    return {
        "feature": int(node["feature"]),
        "threshold": float(node["threshold"]),
        "left": _check_node(node["left"]),
        "right": _check_node(node["right"]),
    }


@register_model("decision_tree")
@dataclass(frozen=True, eq=False)
class DecisionTreeModel(TrainedClassifier):
    kind: ClassifierKind
    scaling: ScalingParams
    root: dict
    warning: str | None = None

    def _score_standardized(self, z):
        return apply_tree(self.root, z)

    def state_dict(self):
        return {**common_state(self), "root": self.root}

    @classmethod
    def _from_state(cls, state):
        return cls(
            kind=as_kind(state["kind"]),
            scaling=scaling_from_state(state["scaling"]),
            root=_check_node(state["root"]),
            warning=state.get("warning"),
        )


def fit_tree(zds, scaling, hp: Hyperparams) -> DecisionTreeModel:
    root = grow_tree(
        zds.features,
        zds.labels.astype(np.float64),
        max_depth=hp.tree.max_depth,
        min_samples_split=hp.tree.min_samples_split,
    )
    return DecisionTreeModel(kind=ClassifierKind.DECISION_TREE, scaling=scaling, root=root)
