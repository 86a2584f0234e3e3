"""Deterministic no-signal scorer for exercising selection logic.

Scores come from hashing the raw feature values with the seed, so they look
uniform on [0, 1), carry no information about the label, and are perfectly
reproducible — a classifier that should always lose to the real members
and therefore get pruned. Not part of the default roster.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from ..data import ScalingParams
from .base import (
    ClassifierKind,
    TrainedClassifier,
    _as_matrix,
    as_kind,
    common_state,
    register_model,
    scaling_from_state,
)
from .params import Hyperparams


def _row_score(seed: int, row: np.ndarray) -> float:
    payload = f"{seed}:" + ",".join(repr(float(v)) for v in row)
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2.0**64


@register_model("coin_flip")
@dataclass(frozen=True)
class CoinFlipModel(TrainedClassifier):
    kind: ClassifierKind
    scaling: ScalingParams
    seed: int
    warning: str | None = None

    def score_many(self, features) -> np.ndarray:
        # Hashes the raw inputs: standardization would change nothing but
        # the bytes being hashed, and raw inputs keep scores fold-stable.
        raw = _as_matrix(features)
        return np.array([_row_score(self.seed, row) for row in raw])

    def _score_standardized(self, z):
        return np.array([_row_score(self.seed, row) for row in z])

    def state_dict(self):
        return {**common_state(self), "seed": self.seed}

    @classmethod
    def _from_state(cls, state):
        return cls(
            kind=as_kind(state["kind"]),
            scaling=scaling_from_state(state["scaling"]),
            seed=int(state["seed"]),
            warning=state.get("warning"),
        )


def fit_coin(zds, scaling, hp: Hyperparams) -> CoinFlipModel:
    return CoinFlipModel(kind=ClassifierKind.COIN_FLIP, scaling=scaling, seed=hp.seed)
