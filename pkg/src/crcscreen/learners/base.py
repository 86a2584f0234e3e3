"""Common classifier contract.

Every trained model scores a feature vector to a class-posterior in [0, 1]
and predicts positive exactly when the score is >= 0.5 (ties resolve to
positive: in a screening setting sensitivity wins). Models are immutable,
carry the ScalingParams fitted on their training data, and serialize to
JSON-ready state dicts through a small registry keyed by a ``model`` tag.
"""

import abc
import enum
from dataclasses import dataclass

import numpy as np

from ..data import FeatureVector, ScalingParams

THRESHOLD = 0.5


class ClassifierKind(enum.Enum):
    BOOSTED_TREES = "boosted_trees"
    LOGISTIC_REGRESSION = "logistic_regression"
    RANDOM_FOREST = "random_forest"
    DECISION_TREE = "decision_tree"
    NEURAL_NETWORK = "neural_network"
    LINEAR_SVM = "linear_svm"
    # Diagnostic kind: deterministic pseudo-random scores carrying no signal.
    # Exists so selection tests can inject a known-useless candidate.
    COIN_FLIP = "coin_flip"


DEFAULT_KINDS = (
    ClassifierKind.BOOSTED_TREES,
    ClassifierKind.LOGISTIC_REGRESSION,
    ClassifierKind.RANDOM_FOREST,
    ClassifierKind.DECISION_TREE,
    ClassifierKind.NEURAL_NETWORK,
    ClassifierKind.LINEAR_SVM,
)


def as_kind(value) -> ClassifierKind:
    if isinstance(value, ClassifierKind):
        return value
    try:
        return ClassifierKind(value)
    except ValueError:
        names = ", ".join(k.value for k in ClassifierKind)
        raise ValueError(f"unknown classifier kind {value!r}; expected one of {names}") from None


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, FeatureVector):
        return x.as_array()[None, :]
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 5:
        raise ValueError(f"expected a length-5 feature vector or (n, 5) matrix, got shape {arr.shape}")
    return arr


class TrainedClassifier(abc.ABC):
    """Immutable fitted model: raw features in, posterior score out."""

    kind: ClassifierKind
    scaling: ScalingParams
    warning: str | None

    def score_many(self, features) -> np.ndarray:
        """Posterior scores for raw (unstandardized) feature rows."""
        raw = _as_matrix(features)
        return self._score_standardized(self.scaling.apply_matrix(raw))

    def score(self, x) -> float:
        return float(self.score_many(x)[0])

    def predict_many(self, features) -> np.ndarray:
        return (self.score_many(features) >= THRESHOLD).astype(np.int64)

    def predict(self, x) -> int:
        return int(self.score(x) >= THRESHOLD)

    @abc.abstractmethod
    def _score_standardized(self, z: np.ndarray) -> np.ndarray:
        """Scores for already-standardized rows ``z`` of shape (n, 5)."""

    @abc.abstractmethod
    def state_dict(self) -> dict:
        """JSON-ready fitted state, including the ``model`` registry tag."""


_MODEL_REGISTRY: dict = {}


def register_model(tag: str):
    def decorate(cls):
        cls.MODEL_TAG = tag
        _MODEL_REGISTRY[tag] = cls
        return cls

    return decorate


def scaling_state(scaling: ScalingParams) -> dict:
    return {"means": list(scaling.means), "stds": list(scaling.stds)}


def scaling_from_state(state: dict) -> ScalingParams:
    return ScalingParams(means=tuple(state["means"]), stds=tuple(state["stds"]))


def common_state(model: TrainedClassifier) -> dict:
    return {
        "model": model.MODEL_TAG,
        "kind": model.kind.value,
        "scaling": scaling_state(model.scaling),
        "warning": model.warning,
    }


def model_from_state(state: dict) -> TrainedClassifier:
    try:
        tag = state["model"]
    except (TypeError, KeyError):
        raise ValueError("model state must be a mapping with a 'model' tag") from None
    cls = _MODEL_REGISTRY.get(tag)
    if cls is None:
        raise ValueError(f"unknown model tag {tag!r}")
    return cls._from_state(state)


@register_model("constant")
@dataclass(frozen=True)
class ConstantModel(TrainedClassifier):
    """Fallback for single-class training data: one fixed posterior."""

    kind: ClassifierKind
    scaling: ScalingParams
    value: float
    warning: str | None = None

    def __post_init__(self):
        if not 0.0 < self.value < 1.0:
            raise ValueError("constant score must lie strictly inside (0, 1)")

    def _score_standardized(self, z):
        return np.full(z.shape[0], self.value, dtype=np.float64)

    def state_dict(self):
        return {**common_state(self), "value": self.value}

    @classmethod
    def _from_state(cls, state):
        return cls(
            kind=as_kind(state["kind"]),
            scaling=scaling_from_state(state["scaling"]),
            value=float(state["value"]),
            warning=state.get("warning"),
        )
