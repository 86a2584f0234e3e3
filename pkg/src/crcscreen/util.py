"""Small numeric helpers shared across modules."""

import numpy as np


def sigmoid(x):
    """Numerically stable logistic function, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    if out.ndim == 0:
        return float(out)
    return out


def log1pexp(x):
    """log(1 + exp(x)) without overflow, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x > 0, x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    if out.ndim == 0:
        return float(out)
    return out


def mean_logistic_loss(raw_scores, labels) -> float:
    """Mean cross-entropy of sigmoid(raw_scores) against binary labels, in nats."""
    raw = np.asarray(raw_scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    return float(np.mean(log1pexp(raw) - y * raw))
