"""Gradient-boosted trees: Newton boosting on the logistic loss.

Per round, with p = sigmoid(raw), the per-row gradient is g = p - y and the
hessian h = p(1 - p). A regression tree greedily maximizes the exact gain

    gain = 1/2 * (G_L^2/(H_L + l2) + G_R^2/(H_R + l2) - G^2/(H + l2))

subject to each child's hessian mass reaching ``min_child_hessian``; its
leaves carry the Newton weight -G / (H + l2). The model starts at the
log-odds of the training prevalence, and each round's contribution is
shrunk by the learning rate before being applied. Stored leaves already
include the shrinkage, so scoring is sigmoid(base + sum of leaf values).

Training loss is checked every round: a round that would increase it is
discarded and boosting stops early, which makes the loss sequence
non-increasing by construction.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..data import ScalingParams
from ..util import mean_logistic_loss, sigmoid
from .base import (
    ClassifierKind,
    TrainedClassifier,
    as_kind,
    common_state,
    register_model,
    scaling_from_state,
)
from .params import Hyperparams
from .tree import _check_node, apply_tree


def _leaf(g_sum, h_sum, l2):
    return {"leaf": -g_sum / (h_sum + l2)}


def best_gain_split(z, g, h, l2, min_child_hessian):
    """Highest-gain (feature, threshold, gain) over midpoint thresholds."""
    g_total = g.sum()
    h_total = h.sum()
    parent = g_total * g_total / (h_total + l2)
    best = None
    best_gain = 0.0
    for j in range(z.shape[1]):
        v = z[:, j]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        cut = np.nonzero(vs[1:] != vs[:-1])[0]
        if cut.size == 0:
            continue
        g_left = np.cumsum(g[order])[cut]
        h_left = np.cumsum(h[order])[cut]
        g_right = g_total - g_left
        h_right = h_total - h_left
        ok = (h_left >= min_child_hessian) & (h_right >= min_child_hessian)
        if not ok.any():
            continue
        gain = 0.5 * (
            g_left**2 / (h_left + l2) + g_right**2 / (h_right + l2) - parent
        )
        gain[~ok] = -np.inf
        i = int(np.argmax(gain))  # first maximum = lowest threshold
        if gain[i] > best_gain + 1e-12:
            best_gain = float(gain[i])
            thr = 0.5 * (vs[cut[i]] + vs[cut[i] + 1])
            best = (int(j), float(thr), best_gain)
    return best


def grow_gain_tree(z, g, h, l2, min_child_hessian, max_depth, depth=0):
    if depth >= max_depth:
        return _leaf(g.sum(), h.sum(), l2)
    split = best_gain_split(z, g, h, l2, min_child_hessian)
    if split is None:
        return _leaf(g.sum(), h.sum(), l2)
    j, thr, _ = split
    mask = z[:, j] <= thr
    return {
        "feature": j,
        "threshold": thr,
        "left": grow_gain_tree(z[mask], g[mask], h[mask], l2, min_child_hessian, max_depth, depth + 1),
        "right": grow_gain_tree(z[~mask], g[~mask], h[~mask], l2, min_child_hessian, max_depth, depth + 1),
    }


def _scale_leaves(node, factor):
    if "leaf" in node:
        return {"leaf": factor * node["leaf"]}
    return {
        "feature": node["feature"],
        "threshold": node["threshold"],
        "left": _scale_leaves(node["left"], factor),
        "right": _scale_leaves(node["right"], factor),
    }


@register_model("boosted_trees")
@dataclass(frozen=True, eq=False)
class BoostedTreesModel(TrainedClassifier):
    kind: ClassifierKind
    scaling: ScalingParams
    base_score: float  # log-odds
    roots: tuple
    warning: str | None = None
    # Training diagnostic: loss before any round, then after each kept
    # round. Not persisted; None on models restored from disk.
    training_loss: tuple | None = None

    def raw_many(self, z: np.ndarray) -> np.ndarray:
        raw = np.full(z.shape[0], self.base_score, dtype=np.float64)
        for root in self.roots:
            raw += apply_tree(root, z)
        return raw

    def _score_standardized(self, z):
        return sigmoid(self.raw_many(z))

    def state_dict(self):
        return {
            **common_state(self),
            "base_score": self.base_score,
            "roots": list(self.roots),
        }

    @classmethod
    def _from_state(cls, state):
        return cls(
            kind=as_kind(state["kind"]),
            scaling=scaling_from_state(state["scaling"]),
            base_score=float(state["base_score"]),
            roots=tuple(_check_node(r) for r in state["roots"]),
            warning=state.get("warning"),
        )


def fit_boosted(zds, scaling, hp: Hyperparams) -> BoostedTreesModel:
    z = zds.features
    y = zds.labels.astype(np.float64)
    prevalence = float(y.mean())
    base = math.log(prevalence / (1.0 - prevalence))
    raw = np.full(y.size, base, dtype=np.float64)
    loss = mean_logistic_loss(raw, y)
    losses = [loss]
    eta = hp.boost.learning_rate
    roots = []
    for _ in range(hp.boost.rounds):
        p = sigmoid(raw)
        g = p - y
        h = p * (1.0 - p)
        node = grow_gain_tree(
            z, g, h,
            l2=hp.boost.l2,
            min_child_hessian=hp.boost.min_child_hessian,
            max_depth=hp.boost.max_depth,
        )
        scaled = _scale_leaves(node, eta)
        new_raw = raw + apply_tree(scaled, z)
        new_loss = mean_logistic_loss(new_raw, y)
        if new_loss > loss + 1e-12:
            break
        roots.append(scaled)
        raw, loss = new_raw, new_loss
        losses.append(loss)
    return BoostedTreesModel(
        kind=ClassifierKind.BOOSTED_TREES,
        scaling=scaling,
        base_score=base,
        roots=tuple(roots),
        training_loss=tuple(losses),
    )
