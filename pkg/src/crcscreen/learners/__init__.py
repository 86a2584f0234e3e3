"""The six base classifiers plus a diagnostic coin-flip scorer.

``train`` standardizes the continuous features, dispatches to the fitting
routine for the requested kind, and returns an immutable TrainedClassifier
whose ``score`` lies in [0, 1] and whose ``predict`` applies the 0.5
threshold (ties positive). Training is deterministic given (kind, dataset,
hyperparameters). Single-class training data never raises: it produces a
constant classifier at the Laplace-smoothed prevalence with a warning set.
"""

from ..data import DatasetError, LabeledDataset, ScalingParams, standardize
from .base import (
    DEFAULT_KINDS,
    THRESHOLD,
    ClassifierKind,
    ConstantModel,
    TrainedClassifier,
    as_kind,
    model_from_state,
)
from .boost import BoostedTreesModel, fit_boosted
from .coin import CoinFlipModel, fit_coin
from .forest import RandomForestModel, fit_forest
from .logistic import LogisticModel, fit_logistic, logistic_objective
from .mlp import MlpModel, fit_mlp, mlp_objective
from .params import (
    DEFAULT_HYPERPARAMS,
    BoostParams,
    ForestParams,
    Hyperparams,
    LogisticParams,
    MlpParams,
    SvmParams,
    TreeParams,
)
from .svm import LinearSvmModel, fit_svm, platt_fit
from .tree import DecisionTreeModel, fit_tree

_FITTERS = {
    ClassifierKind.BOOSTED_TREES: fit_boosted,
    ClassifierKind.LOGISTIC_REGRESSION: fit_logistic,
    ClassifierKind.RANDOM_FOREST: fit_forest,
    ClassifierKind.DECISION_TREE: fit_tree,
    ClassifierKind.NEURAL_NETWORK: fit_mlp,
    ClassifierKind.LINEAR_SVM: fit_svm,
    ClassifierKind.COIN_FLIP: fit_coin,
}


def train_on_standardized(kind, zds: LabeledDataset, scaling: ScalingParams,
                          hp: Hyperparams = DEFAULT_HYPERPARAMS) -> TrainedClassifier:
    """Fit on an already-standardized dataset with known scaling.

    The ensemble trainer standardizes once and shares the result across
    members; ``train`` is the public single-classifier entry point.
    """
    kind = as_kind(kind)
    neg, pos = zds.class_counts()
    if neg == 0 or pos == 0:
        present = 1 if pos else 0
        return ConstantModel(
            kind=kind,
            scaling=scaling,
            value=(pos + 1.0) / (zds.n + 2.0),
            warning=(
                f"training data contained only class {present}; "
                "falling back to a constant classifier at the "
                "Laplace-smoothed prevalence"
            ),
        )
    return _FITTERS[kind](zds, scaling, hp)


def train(kind, ds: LabeledDataset, hp: Hyperparams = DEFAULT_HYPERPARAMS) -> TrainedClassifier:
    """Standardize, fit, and wrap the requested classifier kind."""
    if ds.n == 0:
        raise DatasetError("training data must be non-empty")
    zds, scaling = standardize(ds)
    return train_on_standardized(kind, zds, scaling, hp)


def train_logistic(ds, hp=DEFAULT_HYPERPARAMS):
    return train(ClassifierKind.LOGISTIC_REGRESSION, ds, hp)


def train_tree(ds, hp=DEFAULT_HYPERPARAMS):
    return train(ClassifierKind.DECISION_TREE, ds, hp)


def train_forest(ds, hp=DEFAULT_HYPERPARAMS):
    return train(ClassifierKind.RANDOM_FOREST, ds, hp)


def train_boosted(ds, hp=DEFAULT_HYPERPARAMS):
    return train(ClassifierKind.BOOSTED_TREES, ds, hp)


def train_svm(ds, hp=DEFAULT_HYPERPARAMS):
    return train(ClassifierKind.LINEAR_SVM, ds, hp)


def train_mlp(ds, hp=DEFAULT_HYPERPARAMS):
    return train(ClassifierKind.NEURAL_NETWORK, ds, hp)
