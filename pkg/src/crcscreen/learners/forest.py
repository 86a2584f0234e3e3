"""Random forest: bootstrap-resampled Gini trees with per-node feature
subsampling.

Each tree gets its own substream seeded from the master seed and its index,
so the ensemble is independent of training order. The forest score is the
mean of the member trees' leaf posteriors. With one tree, no bootstrap, and
the subsample covering all five features, the forest reproduces the plain
decision tree exactly.
"""

from dataclasses import dataclass

import numpy as np

from ..data import ScalingParams
from ..seeds import substream
from .base import (
    ClassifierKind,
    TrainedClassifier,
    as_kind,
    common_state,
    register_model,
    scaling_from_state,
)
from .params import Hyperparams
from .tree import _check_node, apply_tree, grow_tree


@register_model("random_forest")
@dataclass(frozen=True, eq=False)
class RandomForestModel(TrainedClassifier):
    kind: ClassifierKind
    scaling: ScalingParams
    roots: tuple
    warning: str | None = None

    def _score_standardized(self, z):
        total = np.zeros(z.shape[0], dtype=np.float64)
        for root in self.roots:
            total += apply_tree(root, z)
        return total / len(self.roots)

    def state_dict(self):
        return {**common_state(self), "roots": list(self.roots)}

    @classmethod
    def _from_state(cls, state):
        return cls(
            kind=as_kind(state["kind"]),
            scaling=scaling_from_state(state["scaling"]),
            roots=tuple(_check_node(r) for r in state["roots"]),
            warning=state.get("warning"),
        )


def fit_forest(zds, scaling, hp: Hyperparams) -> RandomForestModel:
    z = zds.features
    y = zds.labels.astype(np.float64)
    n = y.size
    subsample = hp.forest.feature_subsample
    roots = []
    for i in range(hp.forest.trees):
        rng = substream(hp.seed, "forest", f"tree{i}")
        if hp.forest.bootstrap:
            idx = rng.integers(0, n, size=n)
            z_i, y_i = z[idx], y[idx]
        else:
            z_i, y_i = z, y

        def pick_features(d, rng=rng):
            chosen = rng.choice(d, size=min(subsample, d), replace=False)
            return np.sort(chosen)

        roots.append(
            grow_tree(
                z_i,
                y_i,
                max_depth=hp.tree.max_depth,
                min_samples_split=hp.tree.min_samples_split,
                pick_features=pick_features,
            )
        )
    return RandomForestModel(
        kind=ClassifierKind.RANDOM_FOREST, scaling=scaling, roots=tuple(roots)
    )
