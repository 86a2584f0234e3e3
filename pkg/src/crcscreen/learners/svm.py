"""Linear SVM trained in the dual, with Platt-scaled posterior scores.

The primal objective is 1/2 ||w_aug||^2 + C * sum hinge(1 - s_i * m_i) over
labels s in {-1, +1}, where w_aug includes the bias through an augmented
constant feature (so the bias is regularized too — the usual trick that
keeps the dual box-constrained without an equality constraint). Coordinate
descent sweeps seeded permutations of the rows and stops when the absolute
duality gap drops to ``gap_tolerance`` or after ``max_passes`` sweeps.

Raw margins are unbounded, so the posterior score is sigmoid(a*m + c) with
(a, c) fitted by Platt scaling on the training margins against smoothed
targets (n_pos + 1)/(n_pos + 2) and 1/(n_neg + 2).
"""

import math
from dataclasses import dataclass

import numpy as np

from ..data import ScalingParams
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


def _dual_cd(z, s, c_penalty, gap_tolerance, max_passes, seed):
    n = z.shape[0]
    xa = np.hstack([z, np.ones((n, 1))])
    q_diag = np.einsum("ij,ij->i", xa, xa)
    alpha = np.zeros(n)
    w = np.zeros(xa.shape[1])
    rng = substream(seed, "svm")
    for _ in range(max_passes):
        for i in rng.permutation(n):
            row = xa[i]
            grad = s[i] * float(row @ w) - 1.0
            new_alpha = min(max(alpha[i] - grad / q_diag[i], 0.0), c_penalty)
            delta = new_alpha - alpha[i]
            if delta != 0.0:
                w = w + (delta * s[i]) * row
                alpha[i] = new_alpha
        margins = xa @ w
        hinge = np.maximum(0.0, 1.0 - s * margins)
        ww = float(w @ w)
        gap = ww + c_penalty * float(hinge.sum()) - float(alpha.sum())
        if gap <= gap_tolerance:
            break
    return w


def platt_fit(margins: np.ndarray, labels: np.ndarray):
    """Fit (a, c) so that sigmoid(a * margin + c) tracks the labels.

    Targets are the smoothed frequencies (n_pos + 1)/(n_pos + 2) and
    1/(n_neg + 2) rather than hard 0/1, which keeps the cross-entropy
    bounded even on separable data. Newton iterations with step halving.
    """
    y = np.asarray(labels, dtype=np.float64)
    n_pos = float(y.sum())
    n_neg = y.size - n_pos
    t_pos = (n_pos + 1.0) / (n_pos + 2.0)
    t_neg = 1.0 / (n_neg + 2.0)
    targets = np.where(y == 1.0, t_pos, t_neg)

    def objective(a, c):
        u = a * margins + c
        return float(np.sum(log1pexp(u) - targets * u))

    a = 0.0
    c = math.log((n_pos + 1.0) / (n_neg + 1.0))
    loss = objective(a, c)
    for _ in range(100):
        u = a * margins + c
        p = sigmoid(u)
        residual = p - targets
        grad = np.array([float(residual @ margins), float(residual.sum())])
        if np.max(np.abs(grad)) < 1e-10:
            break
        weight = p * (1.0 - p)
        h11 = float(weight @ (margins * margins)) + 1e-12
        h12 = float(weight @ margins)
        h22 = float(weight.sum()) + 1e-12
        hessian = np.array([[h11, h12], [h12, h22]])
        direction = np.linalg.solve(hessian, -grad)
        step = 1.0
        for _ in range(60):
            na, nc = a + step * direction[0], c + step * direction[1]
            new_loss = objective(na, nc)
            if new_loss <= loss:
                break
            step *= 0.5
        else:
            break
        a, c, loss = na, nc, new_loss
    return float(a), float(c)


@register_model("linear_svm")
@dataclass(frozen=True, eq=False)
class LinearSvmModel(TrainedClassifier):
    kind: ClassifierKind
    scaling: ScalingParams
    weights: np.ndarray
    intercept: float
    platt_a: float
    platt_c: float
    warning: str | None = None

    def __post_init__(self):
        self.weights.setflags(write=False)

    def margins_standardized(self, z: np.ndarray) -> np.ndarray:
        return z @ self.weights + self.intercept

    def margin(self, x) -> float:
        """Raw decision value w . z + b for one raw feature vector."""
        from .base import _as_matrix

        z = self.scaling.apply_matrix(_as_matrix(x))
        return float(self.margins_standardized(z)[0])

    def _score_standardized(self, z):
        return sigmoid(self.platt_a * self.margins_standardized(z) + self.platt_c)

    def state_dict(self):
        return {
            **common_state(self),
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "platt_a": self.platt_a,
            "platt_c": self.platt_c,
        }

    @classmethod
    def _from_state(cls, state):
        return cls(
            kind=as_kind(state["kind"]),
            scaling=scaling_from_state(state["scaling"]),
            weights=np.asarray(state["weights"], dtype=np.float64),
            intercept=float(state["intercept"]),
            platt_a=float(state["platt_a"]),
            platt_c=float(state["platt_c"]),
            warning=state.get("warning"),
        )


def fit_svm(zds, scaling, hp: Hyperparams) -> LinearSvmModel:
    z = zds.features
    y = zds.labels.astype(np.float64)
    s = 2.0 * y - 1.0
    w_aug = _dual_cd(
        z, s,
        c_penalty=hp.svm.c,
        gap_tolerance=hp.svm.gap_tolerance,
        max_passes=hp.svm.max_passes,
        seed=hp.seed,
    )
    weights = w_aug[:-1]
    intercept = float(w_aug[-1])
    margins = z @ weights + intercept
    a, c = platt_fit(margins, y)
    return LinearSvmModel(
        kind=ClassifierKind.LINEAR_SVM,
        scaling=scaling,
        weights=weights,
        intercept=intercept,
        platt_a=a,
        platt_c=c,
    )
