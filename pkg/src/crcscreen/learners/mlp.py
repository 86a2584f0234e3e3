"""One-hidden-layer tanh network with a sigmoid output unit.

Loss: mean cross-entropy plus an L2 weight-decay penalty on the two weight
matrices (biases are not decayed). Training runs the quasi-Newton kernel
from several seeded small-uniform initializations — U(+-1/sqrt(fan_in)) per
layer — and keeps the restart with the lowest final loss. Everything is
deterministic given the master seed.
"""

from dataclasses import dataclass

import numpy as np

from ..data import ScalingParams
from ..optim import LbfgsOptions, lbfgs_minimize
from ..seeds import substream
from ..util import log1pexp, sigmoid
from .base import (
    ClassifierKind,
    TrainedClassifier,
    as_kind,
    common_state,
    register_model,
    scaling_from_state,
)
from .params import Hyperparams

_INPUT_DIM = 5


def _unpack(params: np.ndarray, hidden: int):
    d = _INPUT_DIM
    w1 = params[: d * hidden].reshape(d, hidden)
    b1 = params[d * hidden : d * hidden + hidden]
    w2 = params[d * hidden + hidden : d * hidden + 2 * hidden]
    b2 = params[-1]
    return w1, b1, w2, b2


def mlp_objective(params: np.ndarray, z: np.ndarray, y: np.ndarray, hidden: int, weight_decay: float):
    """(loss, gradient) of the decayed cross-entropy at flat ``params``.

    Layout: W1 (5*hidden), b1 (hidden), w2 (hidden), b2 (1). Exposed so the
    backprop gradient can be validated against central differences.
    """
    w1, b1, w2, b2 = _unpack(params, hidden)
    n = y.size
    hidden_act = np.tanh(z @ w1 + b1)
    u = hidden_act @ w2 + b2
    loss = float(
        np.mean(log1pexp(u) - y * u)
        + 0.5 * weight_decay * (float(np.sum(w1 * w1)) + float(w2 @ w2))
    )
    residual = (sigmoid(u) - y) / n
    grad_w2 = hidden_act.T @ residual + weight_decay * w2
    grad_b2 = float(residual.sum())
    back = residual[:, None] * w2[None, :] * (1.0 - hidden_act * hidden_act)
    grad_w1 = z.T @ back + weight_decay * w1
    grad_b1 = back.sum(axis=0)
    grad = np.concatenate([grad_w1.ravel(), grad_b1, grad_w2, [grad_b2]])
    return loss, grad


def _init_params(rng: np.random.Generator, hidden: int) -> np.ndarray:
    d = _INPUT_DIM
    scale1 = 1.0 / np.sqrt(d)
    scale2 = 1.0 / np.sqrt(hidden)
    return np.concatenate([
        rng.uniform(-scale1, scale1, size=d * hidden),  # W1
        rng.uniform(-scale1, scale1, size=hidden),      # b1
        rng.uniform(-scale2, scale2, size=hidden),      # w2
        rng.uniform(-scale2, scale2, size=1),           # b2
    ])


@register_model("neural_network")
@dataclass(frozen=True, eq=False)
class MlpModel(TrainedClassifier):
    kind: ClassifierKind
    scaling: ScalingParams
    hidden_width: int
    parameters: np.ndarray
    warning: str | None = None

    def __post_init__(self):
        self.parameters.setflags(write=False)

    def _score_standardized(self, z):
        w1, b1, w2, b2 = _unpack(self.parameters, self.hidden_width)
        return sigmoid(np.tanh(z @ w1 + b1) @ w2 + b2)

    def state_dict(self):
        return {
            **common_state(self),
            "hidden_width": self.hidden_width,
            "parameters": self.parameters.tolist(),
        }

    @classmethod
    def _from_state(cls, state):
        return cls(
            kind=as_kind(state["kind"]),
            scaling=scaling_from_state(state["scaling"]),
            hidden_width=int(state["hidden_width"]),
            parameters=np.asarray(state["parameters"], dtype=np.float64),
            warning=state.get("warning"),
        )


_LBFGS_OPTIONS = LbfgsOptions(grad_tolerance=1e-7, max_iterations=300)


def fit_mlp(zds, scaling, hp: Hyperparams) -> MlpModel:
    z = zds.features
    y = zds.labels.astype(np.float64)
    hidden = hp.mlp.hidden_width
    decay = hp.mlp.weight_decay

    def objective(params):
        return mlp_objective(params, z, y, hidden, decay)

    best = None
    for restart in range(hp.mlp.restarts):
        rng = substream(hp.seed, "mlp", f"restart{restart}")
        solution = lbfgs_minimize(objective, _init_params(rng, hidden), _LBFGS_OPTIONS)
        if best is None or solution.final_loss < best.final_loss:
            best = solution
    return MlpModel(
        kind=ClassifierKind.NEURAL_NETWORK,
        scaling=scaling,
        hidden_width=hidden,
        parameters=best.parameters,
    )
