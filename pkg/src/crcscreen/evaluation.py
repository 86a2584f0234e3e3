"""Cross-validated evaluation, text reports, and ROC export.

The driver trains every candidate classifier inside each stratified fold
(scaling fitted on the training portion only), scores the held-out rows,
and aggregates per-fold metrics as mean +/- sample standard deviation.
Folds where a metric is undefined are excluded from the aggregate and
counted instead of being silently zeroed.

The text rendering follows the screening-study table layout: one score
block per classifier (Precision / Sensitivity / AUC / Specificity, with
F1 added for the majority vote) and a comparison section that places the
computed ensemble next to published figures for established methods.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset, ScalingParams, standardize, stratified_folds
from .ensemble import select_kinds, soft_score_rows, vote_labels
from .learners import train_on_standardized
from .learners.base import THRESHOLD, as_kind, scaling_from_state, scaling_state
from .learners.params import DEFAULT_HYPERPARAMS, Hyperparams
from .metrics import (
    METRIC_NAMES,
    MetricSet,
    RocCurve,
    SingleClassError,
    auc,
    confusion,
    metric_set,
    roc_curve,
)
from .seeds import substream_seed

#: Key used for the ensemble's pooled ROC curve alongside per-classifier keys.
ENSEMBLE_KEY = "majority_vote"

REPORT_FORMAT = "crcscreen-evaluation"
REPORT_VERSION = "1"

_AGGREGATE_TOLERANCE = 1e-12


class ReportFormatError(ValueError):
    """A serialized evaluation report could not be decoded."""


@dataclass(frozen=True)
class MetricAggregate:
    """Mean and sample (n-1) standard deviation of one metric across folds.

    Folds where the metric was undefined are excluded from both statistics
    and counted in ``undefined_folds``.  ``mean`` is None when no fold
    defined the metric; ``std`` is None when fewer than two folds did.
    """

    mean: float | None
    std: float | None
    undefined_folds: int

    def __post_init__(self) -> None:
        if self.undefined_folds < 0:
            raise ValueError("undefined_folds must be non-negative")
        if self.mean is None and self.std is not None:
            raise ValueError("std cannot be defined without a mean")


def aggregate(values) -> MetricAggregate:
    """Aggregate per-fold metric values, skipping ``None`` entries."""
    defined = [float(v) for v in values if v is not None]
    undefined = len(values) - len(defined)
    if not defined:
        return MetricAggregate(None, None, undefined)
    mean = float(np.mean(defined))
    std = float(np.std(defined, ddof=1)) if len(defined) > 1 else None
    return MetricAggregate(mean, std, undefined)


@dataclass(frozen=True)
class FoldDetail:
    """Everything observed on one held-out fold."""

    fold: int
    test_size: int
    selected_kinds: tuple[str, ...]
    per_classifier: dict[str, MetricSet]
    ensemble: MetricSet
    scaling: ScalingParams


@dataclass(frozen=True)
class EvaluationReport:
    """Aggregated cross-validation results for a candidate roster.

    ``per_classifier`` and ``ensemble`` map metric names to aggregates;
    ``roc`` holds pooled out-of-fold curves (the tabulated AUC is the
    fold-average, which generally differs from the pooled curve's area).
    Construction re-derives every aggregate from ``folds`` and refuses
    inconsistent inputs.
    """

    k: int
    seed: int
    n: int
    select: bool
    candidate_kinds: tuple[str, ...]
    per_classifier: dict[str, dict[str, MetricAggregate]]
    ensemble: dict[str, MetricAggregate]
    folds: tuple[FoldDetail, ...]
    roc: dict[str, RocCurve]

    def __post_init__(self) -> None:
        if len(self.folds) != self.k:
            raise ValueError(f"expected {self.k} fold details, got {len(self.folds)}")
        if set(self.per_classifier) != set(self.candidate_kinds):
            raise ValueError("per_classifier keys must match candidate_kinds")
        for kind in self.candidate_kinds:
            sets = [detail.per_classifier[kind] for detail in self.folds]
            _require_consistent(kind, self.per_classifier[kind], _fold_aggregates(sets))
        sets = [detail.ensemble for detail in self.folds]
        _require_consistent(ENSEMBLE_KEY, self.ensemble, _fold_aggregates(sets))


def _fold_aggregates(metric_sets) -> dict[str, MetricAggregate]:
    return {
        name: aggregate([getattr(ms, name) for ms in metric_sets])
        for name in METRIC_NAMES
    }


def _require_consistent(label: str, stored, recomputed) -> None:
    for name in METRIC_NAMES:
        if name not in stored:
            raise ValueError(f"missing aggregate {label}.{name}")
        got, want = stored[name], recomputed[name]
        if got.undefined_folds != want.undefined_folds or not (
            _close(got.mean, want.mean) and _close(got.std, want.std)
        ):
            raise ValueError(f"aggregate {label}.{name} does not match its folds")


def _close(a: float | None, b: float | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return abs(a - b) <= _AGGREGATE_TOLERANCE


def _safe_auc(scores: np.ndarray, labels: np.ndarray) -> float | None:
    try:
        return auc(scores, labels)
    except SingleClassError:
        return None


def _fold_metric_set(scores: np.ndarray, labels: np.ndarray) -> MetricSet:
    preds = (scores >= THRESHOLD).astype(np.int64)
    return metric_set(confusion(preds, labels), _safe_auc(scores, labels))


def cross_validate(
    candidate_kinds,
    ds: LabeledDataset,
    hp: Hyperparams = DEFAULT_HYPERPARAMS,
    k: int = 10,
    seed: int = 0,
    select: bool = False,
) -> EvaluationReport:
    """Evaluate every candidate and the majority vote under stratified k-fold CV.

    Each fold standardizes on its training portion only, trains all
    candidates there, and scores the held-out rows.  With ``select=True``
    a backward search runs on an inner 5-fold split of each training
    portion (seeded per fold), so the ensemble columns of different folds
    may use different member subsets; the per-classifier columns always
    cover the full roster.
    """
    kinds = tuple(as_kind(kind) for kind in candidate_kinds)
    if not kinds:
        raise ValueError("candidate_kinds must be non-empty")
    if len(set(kinds)) != len(kinds):
        raise ValueError("candidate kinds must be distinct")
    folds = stratified_folds(ds, k, seed)
    labels = ds.labels
    pooled = {kind: np.zeros(ds.n) for kind in kinds}
    pooled_soft = np.zeros(ds.n)
    details = []
    for f in range(k):
        train_idx = folds.train_indices(f)
        test_idx = folds.test_indices(f)
        train_ds = ds.subset(train_idx)
        zds, scaling = standardize(train_ds)
        models = {kind: train_on_standardized(kind, zds, scaling, hp) for kind in kinds}
        test_features = ds.features[test_idx]
        test_labels = labels[test_idx]
        member = np.column_stack(
            [models[kind].score_many(test_features) for kind in kinds]
        )
        if select:
            fold_seed = substream_seed(seed, "select", f"fold{f}")
            selected, _ = select_kinds(kinds, train_ds, hp, k=5, seed=fold_seed)
        else:
            selected = kinds
        per_cls = {}
        for j, kind in enumerate(kinds):
            scores = member[:, j]
            per_cls[kind.value] = _fold_metric_set(scores, test_labels)
            pooled[kind][test_idx] = scores
        sel_scores = member[:, [kinds.index(kind) for kind in selected]]
        ens_soft = soft_score_rows(sel_scores)
        ens_ms = metric_set(
            confusion(vote_labels(sel_scores), test_labels),
            _safe_auc(ens_soft, test_labels),
        )
        pooled_soft[test_idx] = ens_soft
        details.append(
            FoldDetail(
                fold=f,
                test_size=int(test_idx.size),
                selected_kinds=tuple(kind.value for kind in selected),
                per_classifier=per_cls,
                ensemble=ens_ms,
                scaling=scaling,
            )
        )
    roc = {kind.value: roc_curve(pooled[kind], labels) for kind in kinds}
    roc[ENSEMBLE_KEY] = roc_curve(pooled_soft, labels)
    per_agg = {
        kind.value: _fold_aggregates([d.per_classifier[kind.value] for d in details])
        for kind in kinds
    }
    return EvaluationReport(
        k=k,
        seed=seed,
        n=ds.n,
        select=select,
        candidate_kinds=tuple(kind.value for kind in kinds),
        per_classifier=per_agg,
        ensemble=_fold_aggregates([d.ensemble for d in details]),
        folds=tuple(details),
        roc=roc,
    )


# --------------------------------------------------------------------------
# text report


_DISPLAY_NAMES = {
    "boosted_trees": "eXtreme Gradient Boosted Trees",
    "logistic_regression": "Logistic Regression",
    "random_forest": "Random Forest",
    "decision_tree": "Decision Tree",
    "linear_svm": "Support Vector Machine",
    "neural_network": "Artificial Neural Network",
    "coin_flip": "Coin Flip (diagnostic)",
}

_ROW_ORDER = (
    "boosted_trees",
    "logistic_regression",
    "random_forest",
    "decision_tree",
    "linear_svm",
    "neural_network",
)

_METRIC_LABELS = {
    "precision": "Precision",
    "sensitivity": "Sensitivity",
    "auc": "AUC",
    "specificity": "Specificity",
    "f1": "F1",
}

# Published operating characteristics of established screening methods
# (specificity, sensitivity, per-test cost, turnaround), quoted for the
# comparison section.
_LITERATURE_METHODS = (
    ("Fecal Occult Blood Tests", ".96", ".74", "$15", "5 minutes"),
    ("CT Colonography", ".88", ".84", "$439", "30 minutes"),
    ("Stool DNA Test", ".89", ".92", "$600", "2 weeks"),
)

_ENSEMBLE_METHOD_NAME = "CounteractIO"
_ENSEMBLE_METHOD_COST = "$10"
_ENSEMBLE_METHOD_TIME = "5 minutes"


def format_score(value: float | None) -> str:
    """Two-decimal score in the journal style (leading zero dropped)."""
    if value is None:
        return "n/a"
    text = f"{float(value):.2f}"
    return text[1:] if text.startswith("0.") else text


def _stat_line(label: str, value: str) -> str:
    return f"  {label + ':':<12} {value}"


def _score_block(title: str, aggs: dict[str, MetricAggregate], include_f1: bool) -> list[str]:
    names = ("precision", "sensitivity", "auc", "specificity")
    if include_f1:
        names += ("f1",)
    lines = [title]
    for name in names:
        agg = aggs[name]
        value = format_score(agg.mean)
        if agg.undefined_folds:
            plural = "s" if agg.undefined_folds != 1 else ""
            value += f"  (undefined in {agg.undefined_folds} fold{plural})"
        lines.append(_stat_line(_METRIC_LABELS[name], value))
    return lines


def report_table(r: EvaluationReport) -> str:
    """Render the report as fixed-layout text (stable across releases)."""
    lines = [f"Stratified {r.k}-fold cross-validation (seed {r.seed}, n={r.n})"]
    lines.append("")
    lines.append("Classifier | Scores")
    lines.append("-------------------")
    ordered = [kv for kv in _ROW_ORDER if kv in r.per_classifier]
    ordered += [kv for kv in r.candidate_kinds if kv not in ordered]
    for kind_value in ordered:
        lines.append("")
        block = _score_block(
            _DISPLAY_NAMES.get(kind_value, kind_value),
            r.per_classifier[kind_value],
            include_f1=False,
        )
        lines.extend(block)
    lines.append("")
    lines.extend(_score_block("Majority Vote", r.ensemble, include_f1=True))
    lines.append("")
    lines.append("Method | Statistics")
    lines.append("-------------------")
    for name, specificity, sensitivity, cost, turnaround in _LITERATURE_METHODS:
        lines.append("")
        lines.append(f"{name} (literature)")
        lines.append(_stat_line("Specificity", specificity))
        lines.append(_stat_line("Sensitivity", sensitivity))
        lines.append(_stat_line("Cost", cost))
        lines.append(_stat_line("Time", turnaround))
    lines.append("")
    lines.append(f"{_ENSEMBLE_METHOD_NAME} (this run)")
    lines.append(_stat_line("Specificity", format_score(r.ensemble["specificity"].mean)))
    lines.append(_stat_line("Sensitivity", format_score(r.ensemble["sensitivity"].mean)))
    lines.append(_stat_line("Cost", _ENSEMBLE_METHOD_COST))
    lines.append(_stat_line("Time", _ENSEMBLE_METHOD_TIME))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# ROC CSV


_ROC_HEADER = "classifier,threshold,fpr,tpr"


def _format_threshold(value: float) -> str:
    return "inf" if math.isinf(value) else repr(float(value))


def emit_roc(r: EvaluationReport, path) -> None:
    """Write every pooled ROC curve as CSV blocks, one header per classifier."""
    blocks = []
    for name, curve in r.roc.items():
        rows = [_ROC_HEADER]
        for t, x, y in zip(curve.thresholds, curve.fpr, curve.tpr):
            rows.append(f"{name},{_format_threshold(t)},{float(x)!r},{float(y)!r}")
        blocks.append("\n".join(rows))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(blocks) + "\n")


def parse_roc_csv(path) -> dict[str, RocCurve]:
    """Read an ``emit_roc`` file back into curves (exact float round-trip)."""
    rows_by_name: dict[str, list[tuple[float, float, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for raw_line in fh:
            line = raw_line.strip()
            if not line or line == _ROC_HEADER:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ReportFormatError(f"malformed ROC row: {line!r}")
            name, threshold, fpr, tpr = parts
            value = math.inf if threshold == "inf" else float(threshold)
            rows_by_name.setdefault(name, []).append((value, float(fpr), float(tpr)))
    curves = {}
    for name, rows in rows_by_name.items():
        arr = np.array(rows, dtype=float)
        curves[name] = RocCurve(arr[:, 0], arr[:, 1], arr[:, 2])
    return curves


# --------------------------------------------------------------------------
# JSON persistence


def _aggs_to_dict(aggs: dict[str, MetricAggregate]) -> dict:
    return {
        name: {"mean": agg.mean, "std": agg.std, "undefined_folds": agg.undefined_folds}
        for name, agg in aggs.items()
    }


def _aggs_from_dict(payload: dict) -> dict[str, MetricAggregate]:
    out = {}
    for name in METRIC_NAMES:
        entry = payload[name]
        out[name] = MetricAggregate(
            mean=entry["mean"], std=entry["std"], undefined_folds=entry["undefined_folds"]
        )
    return out


def _curve_to_dict(curve: RocCurve) -> dict:
    return {
        "thresholds": [_format_threshold(t) for t in curve.thresholds],
        "fpr": [float(x) for x in curve.fpr],
        "tpr": [float(y) for y in curve.tpr],
    }


def _curve_from_dict(payload: dict) -> RocCurve:
    thresholds = np.array(
        [math.inf if t == "inf" else float(t) for t in payload["thresholds"]]
    )
    return RocCurve(
        thresholds,
        np.asarray(payload["fpr"], dtype=float),
        np.asarray(payload["tpr"], dtype=float),
    )


def report_to_dict(r: EvaluationReport) -> dict:
    folds = [
        {
            "fold": d.fold,
            "test_size": d.test_size,
            "selected_kinds": list(d.selected_kinds),
            "per_classifier": {k: ms.as_dict() for k, ms in d.per_classifier.items()},
            "ensemble": d.ensemble.as_dict(),
            "scaling": scaling_state(d.scaling),
        }
        for d in r.folds
    ]
    return {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "k": r.k,
        "seed": r.seed,
        "n": r.n,
        "select": r.select,
        "candidate_kinds": list(r.candidate_kinds),
        "per_classifier": {k: _aggs_to_dict(v) for k, v in r.per_classifier.items()},
        "ensemble": _aggs_to_dict(r.ensemble),
        "folds": folds,
        "roc": {name: _curve_to_dict(curve) for name, curve in r.roc.items()},
    }


def report_to_json(r: EvaluationReport) -> str:
    """Canonical serialization: identical reports produce identical bytes."""
    return json.dumps(report_to_dict(r), indent=1, sort_keys=True) + "\n"


def report_from_dict(payload: dict) -> EvaluationReport:
    if not isinstance(payload, dict):
        raise ReportFormatError("evaluation report must be a JSON object")
    if payload.get("format") != REPORT_FORMAT:
        raise ReportFormatError("not an evaluation report file")
    if payload.get("version") != REPORT_VERSION:
        raise ReportFormatError(
            f"unsupported report version {payload.get('version')!r}"
        )
    try:
        candidate_kinds = tuple(str(k) for k in payload["candidate_kinds"])
        per_classifier = {
            kind: _aggs_from_dict(payload["per_classifier"][kind])
            for kind in candidate_kinds
        }
        folds = []
        for entry in payload["folds"]:
            folds.append(
                FoldDetail(
                    fold=int(entry["fold"]),
                    test_size=int(entry["test_size"]),
                    selected_kinds=tuple(str(k) for k in entry["selected_kinds"]),
                    per_classifier={
                        kind: MetricSet(**entry["per_classifier"][kind])
                        for kind in candidate_kinds
                    },
                    ensemble=MetricSet(**entry["ensemble"]),
                    scaling=scaling_from_state(entry["scaling"]),
                )
            )
        roc_names = list(payload["roc"])
        roc = {name: _curve_from_dict(payload["roc"][name]) for name in roc_names}
        return EvaluationReport(
            k=int(payload["k"]),
            seed=int(payload["seed"]),
            n=int(payload["n"]),
            select=bool(payload["select"]),
            candidate_kinds=candidate_kinds,
            per_classifier=per_classifier,
            ensemble=_aggs_from_dict(payload["ensemble"]),
            folds=tuple(folds),
            roc=roc,
        )
    except ReportFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ReportFormatError(f"invalid evaluation report: {exc}") from exc


def save_report(r: EvaluationReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report_to_json(r))


def load_report(path) -> EvaluationReport:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ReportFormatError(f"corrupted or truncated report file: {exc}") from exc
    return report_from_dict(payload)
