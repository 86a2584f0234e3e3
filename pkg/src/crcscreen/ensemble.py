"""Majority-vote ensemble, backward-search pruning, and model persistence.

An ensemble holds an ordered list of trained members sharing one
ScalingParams. Its hard prediction is the plurality of member votes; an
even split falls back to the mean member score against the 0.5 threshold
(and exact 0.5 resolves positive — screening favors sensitivity). The mean
member score is also the ensemble's graded score for ROC/AUC purposes.

Backward search starts from all candidate kinds and greedily removes the
member whose removal most improves mean stratified k-fold CV AUC of the
soft ensemble score, stopping when no removal improves it by more than a
1e-9 floating-point guard. Ties between removals break by CV F1, then by
removing the kind that sorts last alphabetically, so the result does not
depend on evaluation order.

Model files are versioned JSON: a header with the format version, creating
package, feature schema, shared scaling, tie rule, and optional
fit-binarization threshold, plus one state block per member. Floats
serialize at full round-trip precision.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import CREATED_WITH
from .data import (
    FEATURE_COLUMNS,
    FeatureVector,
    LabeledDataset,
    ScalingParams,
    standardize,
    stratified_folds,
)
from .learners import (
    DEFAULT_HYPERPARAMS,
    THRESHOLD,
    Hyperparams,
    TrainedClassifier,
    as_kind,
    model_from_state,
    train_on_standardized,
)
from .metrics import SingleClassError, auc, confusion, f1

FORMAT_VERSION = "1"
TIE_BREAK_MEAN_SCORE = "mean_score_then_positive"
SELECTION_CRITERION = "cv_auc"
_IMPROVEMENT_GUARD = 1e-9


class ModelFormatError(ValueError):
    """Model file is corrupted, truncated, or violates the schema."""


class UnsupportedVersionError(ModelFormatError):
    """Model file declares a format version this package cannot read."""


def _as_raw_matrix(features) -> np.ndarray:
    if isinstance(features, FeatureVector):
        return features.as_array()[None, :]
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 5:
        raise ValueError(f"expected length-5 feature rows, got shape {arr.shape}")
    return arr


def soft_score_rows(member_scores: np.ndarray) -> np.ndarray:
    """Row means of an (n, L) score matrix, summed in sorted order so the
    result is bit-identical under any permutation of the members. The
    contiguous copy pins the summation traversal, which otherwise varies
    with the input's memory layout."""
    ordered = np.ascontiguousarray(np.sort(member_scores, axis=1))
    return ordered.mean(axis=1)


def vote_labels(member_scores: np.ndarray) -> np.ndarray:
    """Majority label per row of an (n, L) member-score matrix.

    Strict pluralities win outright; even splits fall back to the mean
    member score against the 0.5 threshold, positive on exact 0.5.
    """
    votes = member_scores >= THRESHOLD
    positive = votes.sum(axis=1)
    negative = votes.shape[1] - positive
    labels = np.where(positive > negative, 1, 0)
    tied = positive == negative
    if tied.any():
        labels[tied] = (soft_score_rows(member_scores[tied]) >= THRESHOLD).astype(labels.dtype)
    return labels.astype(np.int64)


@dataclass(frozen=True, eq=False)
class MajorityVoteEnsemble:
    members: tuple
    tie_break: str = TIE_BREAK_MEAN_SCORE
    version: str = FORMAT_VERSION
    # When set, incoming fit_result values are binarized at this threshold
    # before scoring, mirroring the transform applied to the training data.
    fit_binarize_threshold: float | None = None

    def __post_init__(self):
        if len(self.members) == 0:
            raise ValueError("ensemble needs at least one member")
        if self.tie_break != TIE_BREAK_MEAN_SCORE:
            raise ValueError(f"unknown tie_break {self.tie_break!r}")
        object.__setattr__(self, "members", tuple(self.members))

    @property
    def kinds(self) -> tuple:
        return tuple(m.kind for m in self.members)

    def _prepare(self, features) -> np.ndarray:
        raw = _as_raw_matrix(features)
        if self.fit_binarize_threshold is not None:
            raw = raw.copy()
            raw[:, 0] = (raw[:, 0] >= self.fit_binarize_threshold).astype(np.float64)
        return raw

    def member_scores_many(self, features) -> np.ndarray:
        """(n, L) matrix of member posterior scores for raw feature rows."""
        raw = self._prepare(features)
        return np.column_stack([m.score_many(raw) for m in self.members])

    def soft_scores_many(self, features) -> np.ndarray:
        return soft_score_rows(self.member_scores_many(features))

    def predict_many(self, features) -> np.ndarray:
        return vote_labels(self.member_scores_many(features))

    def score(self, x) -> float:
        return float(self.soft_scores_many(x)[0])

    def predict(self, x) -> int:
        return int(self.predict_many(x)[0])


@dataclass(frozen=True)
class EnsemblePrediction:
    votes: tuple
    member_scores: tuple
    majority_label: int
    soft_score: float
    tie_broken: bool

    def __post_init__(self):
        if len(self.votes) != len(self.member_scores) or not self.votes:
            raise ValueError("votes and member_scores must be equal-length and non-empty")


def majority_vote(votes) -> tuple:
    """(plurality label, tie flag). On a tie the label defaults positive;
    ensemble_predict overrides it with the mean-score rule."""
    votes = list(votes)
    if not votes:
        raise ValueError("vote list must be non-empty")
    positive = sum(1 for v in votes if v == 1)
    negative = len(votes) - positive
    if positive == negative:
        return 1, True
    return (1 if positive > negative else 0), False


def ensemble_predict(e: MajorityVoteEnsemble, x) -> EnsemblePrediction:
    scores = e.member_scores_many(x)[0]
    votes = tuple(int(s >= THRESHOLD) for s in scores)
    soft = float(soft_score_rows(scores[None, :])[0])
    label, tied = majority_vote(votes)
    if tied:
        label = int(soft >= THRESHOLD)
    return EnsemblePrediction(
        votes=votes,
        member_scores=tuple(float(s) for s in scores),
        majority_label=label,
        soft_score=soft,
        tie_broken=tied,
    )


def fit_ensemble(kinds, ds: LabeledDataset, hp: Hyperparams = DEFAULT_HYPERPARAMS,
                 fit_binarize_threshold: float | None = None) -> MajorityVoteEnsemble:
    """Train one member per kind on ``ds`` with shared scaling.

    ``ds`` must already reflect any fit-binarization; the threshold passed
    here is only recorded so scoring can apply the same transform to new
    inputs.
    """
    kinds = [as_kind(k) for k in kinds]
    if not kinds:
        raise ValueError("at least one classifier kind is required")
    zds, scaling = standardize(ds)
    members = tuple(train_on_standardized(k, zds, scaling, hp) for k in kinds)
    return MajorityVoteEnsemble(
        members=members, fit_binarize_threshold=fit_binarize_threshold
    )


# ---------------------------------------------------------------------------
# Backward-search selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SelectionTrace:
    """Removal history: (removed kind value, criterion after removal)."""

    steps: tuple
    final_members: tuple
    initial_criterion: float
    criterion: str = SELECTION_CRITERION

    def __post_init__(self):
        last = self.initial_criterion
        for _, value in self.steps:
            if value < last:
                raise ValueError("selection trace criterion must be non-decreasing")
            last = value


@dataclass(frozen=True, eq=False)
class FoldScores:
    """Per-fold held-out member scores, cached so subset criteria are cheap."""

    kinds: tuple
    fold_labels: tuple  # one int64 array per fold
    fold_scores: tuple  # one dict kind -> float64 array per fold


def fold_member_scores(kinds, ds: LabeledDataset, hp: Hyperparams, k: int, seed: int) -> FoldScores:
    """Train every candidate kind once per fold; collect held-out scores.

    Fold scaling is fitted on each training portion only, so cached scores
    are leakage-free; every subset of kinds can then be evaluated without
    retraining.
    """
    kinds = tuple(as_kind(kind) for kind in kinds)
    folds = stratified_folds(ds, k, seed)
    labels_per_fold = []
    scores_per_fold = []
    for fold in range(k):
        train_ds = ds.subset(folds.train_indices(fold))
        test_ds = ds.subset(folds.test_indices(fold))
        zds, scaling = standardize(train_ds)
        scores = {}
        for kind in kinds:
            model = train_on_standardized(kind, zds, scaling, hp)
            scores[kind] = model.score_many(test_ds.features)
        labels_per_fold.append(test_ds.labels)
        scores_per_fold.append(scores)
    return FoldScores(kinds=kinds, fold_labels=tuple(labels_per_fold),
                      fold_scores=tuple(scores_per_fold))


def subset_criterion(cache: FoldScores, subset) -> tuple:
    """(mean CV AUC, mean CV F1) of the majority-vote ensemble over
    ``subset``, from cached fold scores. Folds where a metric is undefined
    are excluded from its mean."""
    subset = tuple(as_kind(kind) for kind in subset)
    if not subset:
        raise ValueError("subset must be non-empty")
    aucs = []
    f1s = []
    for labels, scores in zip(cache.fold_labels, cache.fold_scores):
        member = np.column_stack([scores[kind] for kind in subset])
        soft = soft_score_rows(member)
        try:
            aucs.append(auc(soft, labels))
        except SingleClassError:
            pass
        fold_f1 = f1(confusion(vote_labels(member), labels))
        if fold_f1 is not None:
            f1s.append(fold_f1)
    if not aucs:
        raise SingleClassError("selection criterion undefined: no fold had both classes")
    mean_f1 = float(np.mean(f1s)) if f1s else 0.0
    return float(np.mean(aucs)), mean_f1


def select_kinds(candidate_kinds, ds: LabeledDataset, hp: Hyperparams = DEFAULT_HYPERPARAMS,
                 k: int = 10, seed: int = 0) -> tuple:
    """Greedy backward elimination on mean CV AUC; returns (kinds, trace)."""
    kinds = [as_kind(kind) for kind in candidate_kinds]
    if not kinds:
        raise ValueError("candidate_kinds must be non-empty")
    if len(set(kinds)) != len(kinds):
        raise ValueError("candidate kinds must be distinct")
    cache = fold_member_scores(kinds, ds, hp, k, seed)
    current = list(kinds)
    current_auc, _ = subset_criterion(cache, current)
    initial = current_auc
    steps = []
    while len(current) > 1:
        best = None  # (auc, f1, kind value, reduced list)
        for kind in current:
            reduced = [c for c in current if c is not kind]
            cand_auc, cand_f1 = subset_criterion(cache, reduced)
            if best is not None:
                tied_auc = abs(cand_auc - best[0]) <= _IMPROVEMENT_GUARD
                if tied_auc:
                    if cand_f1 < best[1]:
                        continue
                    if cand_f1 == best[1] and kind.value < best[2]:
                        continue
                elif cand_auc < best[0]:
                    continue
            best = (cand_auc, cand_f1, kind.value, reduced)
        if best is None or best[0] <= current_auc + _IMPROVEMENT_GUARD:
            break
        current = best[3]
        current_auc = best[0]
        steps.append((best[2], current_auc))
    trace = SelectionTrace(
        steps=tuple(steps),
        final_members=tuple(kind.value for kind in current),
        initial_criterion=initial,
    )
    return tuple(current), trace


def backward_search(candidate_kinds, ds: LabeledDataset, hp: Hyperparams = DEFAULT_HYPERPARAMS,
                    k: int = 10, seed: int = 0,
                    fit_binarize_threshold: float | None = None) -> tuple:
    """Prune candidates by CV, then fit the surviving kinds on all of ``ds``."""
    kept, trace = select_kinds(candidate_kinds, ds, hp, k=k, seed=seed)
    ensemble = fit_ensemble(kept, ds, hp, fit_binarize_threshold=fit_binarize_threshold)
    return ensemble, trace


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_model(e: MajorityVoteEnsemble, path) -> None:
    scalings = {m.scaling for m in e.members}
    if len(scalings) != 1:
        raise ValueError("all members must share one ScalingParams to be saved")
    scaling = e.members[0].scaling
    members = []
    for m in e.members:
        state = {key: value for key, value in m.state_dict().items() if key != "scaling"}
        members.append({"kind": m.kind.value, "state": state})
    doc = {
        "format_version": FORMAT_VERSION,
        "created_with": CREATED_WITH,
        "feature_schema": list(FEATURE_COLUMNS),
        "scaling": {"means": list(scaling.means), "stds": list(scaling.stds)},
        "tie_break": e.tie_break,
        "fit_binarize_threshold": e.fit_binarize_threshold,
        "members": members,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _require(doc: dict, key: str):
    if key not in doc:
        raise ModelFormatError(f"model file is missing the '{key}' field")
    return doc[key]


def load_model(path) -> MajorityVoteEnsemble:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"corrupted or truncated model file: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelFormatError("model file must contain a JSON object")
    version = _require(doc, "format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"model format version {version!r} is not supported (expected {FORMAT_VERSION!r})"
        )
    schema = _require(doc, "feature_schema")
    if schema != list(FEATURE_COLUMNS):
        raise ModelFormatError(
            f"feature schema mismatch: expected {list(FEATURE_COLUMNS)}, got {schema}"
        )
    raw_scaling = _require(doc, "scaling")
    try:
        scaling_state = {
            "means": [float(v) for v in raw_scaling["means"]],
            "stds": [float(v) for v in raw_scaling["stds"]],
        }
        scaling = ScalingParams(
            means=tuple(scaling_state["means"]), stds=tuple(scaling_state["stds"])
        )
    except (TypeError, KeyError, ValueError) as exc:
        raise ModelFormatError(f"invalid scaling block: {exc}") from None
    tie_break = _require(doc, "tie_break")
    threshold = doc.get("fit_binarize_threshold")
    if threshold is not None:
        try:
            threshold = float(threshold)
        except (TypeError, ValueError):
            raise ModelFormatError("fit_binarize_threshold must be numeric or null") from None
        if not np.isfinite(threshold):
            raise ModelFormatError("fit_binarize_threshold must be finite")
    raw_members = _require(doc, "members")
    if not isinstance(raw_members, list) or not raw_members:
        raise ModelFormatError("model file must declare a non-empty member list")
    members = []
    for i, block in enumerate(raw_members):
        try:
            kind = block["kind"]
            state = dict(block["state"])
        except (TypeError, KeyError):
            raise ModelFormatError(f"member {i} must carry 'kind' and 'state'") from None
        if state.get("kind") != kind:
            raise ModelFormatError(f"member {i}: kind mismatch between block and state")
        state["scaling"] = scaling_state
        try:
            members.append(model_from_state(state))
        except (ValueError, TypeError, KeyError) as exc:
            raise ModelFormatError(f"member {i} ({kind}): invalid state: {exc}") from None
    try:
        return MajorityVoteEnsemble(
            members=tuple(members),
            tie_break=tie_break,
            version=version,
            fit_binarize_threshold=threshold,
        )
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from None
