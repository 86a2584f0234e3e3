import json
import math
from pathlib import Path

import numpy as np
import pytest

from crcscreen.data import LabeledDataset, ScalingParams, generate_synthetic
from crcscreen.evaluation import (
    ENSEMBLE_KEY,
    REPORT_FORMAT,
    REPORT_VERSION,
    EvaluationReport,
    FoldDetail,
    MetricAggregate,
    ReportFormatError,
    aggregate,
    cross_validate,
    emit_roc,
    format_score,
    load_report,
    parse_roc_csv,
    report_from_dict,
    report_table,
    report_to_dict,
    report_to_json,
    save_report,
)
from crcscreen.learners import ClassifierKind
from crcscreen.metrics import METRIC_NAMES, MetricSet

FIXTURES = Path(__file__).parent / "fixtures"

SCALING = ScalingParams(means=(50.0, 27.0, 60.0), stds=(30.0, 4.0, 10.0))


def repeated_aggs(values: dict, k: int) -> dict:
    return {name: aggregate([values.get(name)] * k) for name in METRIC_NAMES}


def build_report(per_classifier_values: dict, ensemble_values: dict, *, k: int = 2,
                 seed: int = 7, n: int = 8) -> EvaluationReport:
    """A k-fold report whose folds all repeat the same metric values."""
    kinds = tuple(per_classifier_values)
    fold_sets = {kind: MetricSet(**vals) for kind, vals in per_classifier_values.items()}
    ensemble_set = MetricSet(**ensemble_values)
    folds = tuple(
        FoldDetail(
            fold=i,
            test_size=n // k,
            selected_kinds=kinds,
            per_classifier=dict(fold_sets),
            ensemble=ensemble_set,
            scaling=SCALING,
        )
        for i in range(k)
    )
    return EvaluationReport(
        k=k,
        seed=seed,
        n=n,
        select=False,
        candidate_kinds=kinds,
        per_classifier={kind: repeated_aggs(vals, k) for kind, vals in per_classifier_values.items()},
        ensemble=repeated_aggs(ensemble_values, k),
        folds=folds,
        roc={},
    )


def metrics_named(precision, sensitivity, auc, specificity, f1=None):
    return {
        "precision": precision,
        "sensitivity": sensitivity,
        "specificity": specificity,
        "f1": f1 if f1 is not None else precision,
        "auc": auc,
    }


PUBLISHED_SCORES = {
    "boosted_trees": metrics_named(0.89, 0.86, 0.95, 0.91),
    "logistic_regression": metrics_named(0.89, 0.86, 0.94, 0.92),
    "random_forest": metrics_named(0.92, 0.89, 0.93, 0.91),
    "decision_tree": metrics_named(0.88, 0.85, 0.91, 0.90),
    "linear_svm": metrics_named(0.89, 0.86, 0.95, 0.92),
    "neural_network": metrics_named(0.90, 0.89, 0.95, 0.89),
}
PUBLISHED_ENSEMBLE = metrics_named(0.90, 0.89, 0.95, 0.92, f1=0.88)


@pytest.fixture(scope="module")
def cv_report(light_hp):
    ds = generate_synthetic(120, seed=11)
    return cross_validate(
        [ClassifierKind.DECISION_TREE, ClassifierKind.LOGISTIC_REGRESSION,
         ClassifierKind.LINEAR_SVM],
        ds,
        light_hp,
        k=3,
        seed=2,
    )


class TestAggregate:
    def test_mean_and_sample_std(self):
        agg = aggregate([0.5, 0.7, 0.6])
        assert agg.mean == pytest.approx(0.6)
        assert agg.std == pytest.approx(float(np.std([0.5, 0.7, 0.6], ddof=1)))
        assert agg.undefined_folds == 0

    def test_single_defined_fold_has_no_std(self):
        agg = aggregate([0.4, None, None])
        assert agg == MetricAggregate(0.4, None, 2)

    def test_all_undefined(self):
        assert aggregate([None, None]) == MetricAggregate(None, None, 2)

    def test_validation(self):
        with pytest.raises(ValueError, match="non-negative"):
            MetricAggregate(0.5, None, -1)
        with pytest.raises(ValueError, match="without a mean"):
            MetricAggregate(None, 0.1, 0)


class TestCrossValidate:
    def test_report_shape(self, cv_report):
        assert cv_report.k == 3
        assert cv_report.seed == 2
        assert cv_report.n == 120
        assert cv_report.select is False
        assert set(cv_report.candidate_kinds) == {
            "decision_tree", "logistic_regression", "linear_svm"
        }
        assert len(cv_report.folds) == 3

    def test_folds_partition_dataset(self, cv_report):
        assert sum(d.test_size for d in cv_report.folds) == cv_report.n

    def test_scaling_fitted_per_fold(self, cv_report):
        scalings = {d.scaling for d in cv_report.folds}
        assert len(scalings) == 3

    def test_roc_covers_candidates_and_ensemble(self, cv_report):
        assert set(cv_report.roc) == set(cv_report.candidate_kinds) | {ENSEMBLE_KEY}
        for curve in cv_report.roc.values():
            assert (curve.fpr[0], curve.tpr[0]) == (0.0, 0.0)
            assert (curve.fpr[-1], curve.tpr[-1]) == (1.0, 1.0)
            assert math.isinf(curve.thresholds[0])

    def test_deterministic_bytes(self, cv_report, light_hp):
        ds = generate_synthetic(120, seed=11)
        again = cross_validate(
            [ClassifierKind.DECISION_TREE, ClassifierKind.LOGISTIC_REGRESSION,
             ClassifierKind.LINEAR_SVM],
            ds, light_hp, k=3, seed=2,
        )
        assert report_to_json(again) == report_to_json(cv_report)

    def test_single_member_ensemble_equals_that_member(self, light_hp):
        ds = generate_synthetic(100, seed=19)
        report = cross_validate([ClassifierKind.DECISION_TREE], ds, light_hp, k=2, seed=0)
        assert report.ensemble == report.per_classifier["decision_tree"]

    def test_constant_scorer_hand_example(self, light_hp):
        # identical feature rows force every trained tree to a single
        # Laplace leaf at 0.5, so predictions are all-positive
        rows = np.tile([50.0, 27.0, 60.0, 0.0, 1.0], (8, 1))
        labels = np.array([0, 1, 0, 1, 0, 1, 0, 1])
        ds = LabeledDataset(rows, labels)
        report = cross_validate([ClassifierKind.DECISION_TREE], ds, light_hp, k=2, seed=0)
        tree = report.per_classifier["decision_tree"]
        assert tree["precision"].mean == pytest.approx(0.5, abs=1e-12)
        assert tree["sensitivity"].mean == pytest.approx(1.0, abs=1e-12)
        assert tree["specificity"].mean == pytest.approx(0.0, abs=1e-12)
        assert tree["auc"].mean == pytest.approx(0.5, abs=1e-12)
        assert tree["precision"].std == pytest.approx(0.0, abs=1e-12)

    def test_selection_inside_folds(self, light_hp):
        ds = generate_synthetic(120, seed=29)
        candidates = [
            ClassifierKind.LOGISTIC_REGRESSION,
            ClassifierKind.DECISION_TREE,
            ClassifierKind.COIN_FLIP,
        ]
        report = cross_validate(candidates, ds, light_hp, k=2, seed=3, select=True)
        assert report.select is True
        # metrics still cover every candidate, selection only affects votes
        assert set(report.per_classifier) == {k.value for k in candidates}
        for detail in report.folds:
            assert detail.selected_kinds
            assert set(detail.selected_kinds) <= {k.value for k in candidates}

    def test_tampered_aggregate_rejected(self, cv_report):
        bad_ensemble = dict(cv_report.ensemble)
        old = bad_ensemble["auc"]
        bad_ensemble["auc"] = MetricAggregate(
            (old.mean or 0.5) / 2.0, old.std, old.undefined_folds
        )
        with pytest.raises(ValueError, match="does not match its folds"):
            EvaluationReport(
                k=cv_report.k,
                seed=cv_report.seed,
                n=cv_report.n,
                select=cv_report.select,
                candidate_kinds=cv_report.candidate_kinds,
                per_classifier=cv_report.per_classifier,
                ensemble=bad_ensemble,
                folds=cv_report.folds,
                roc=cv_report.roc,
            )

    def test_wrong_fold_count_rejected(self, cv_report):
        with pytest.raises(ValueError, match="fold details"):
            EvaluationReport(
                k=cv_report.k + 1,
                seed=cv_report.seed,
                n=cv_report.n,
                select=cv_report.select,
                candidate_kinds=cv_report.candidate_kinds,
                per_classifier=cv_report.per_classifier,
                ensemble=cv_report.ensemble,
                folds=cv_report.folds,
                roc=cv_report.roc,
            )

    def test_k_below_two_rejected(self, light_hp):
        ds = generate_synthetic(60, seed=0)
        with pytest.raises(Exception):
            cross_validate([ClassifierKind.DECISION_TREE], ds, light_hp, k=1, seed=0)


class TestFormatScore:
    def test_journal_style(self):
        assert format_score(0.9) == ".90"
        assert format_score(0.895) == ".90"
        assert format_score(1.0) == "1.00"
        assert format_score(0.046) == ".05"
        assert format_score(None) == "n/a"


class TestReportTable:
    def test_matches_golden_file(self):
        report = build_report(PUBLISHED_SCORES, PUBLISHED_ENSEMBLE)
        golden = (FIXTURES / "report_golden.txt").read_text()
        assert report_table(report) == golden

    def test_undefined_fold_suffixes(self):
        values = dict(PUBLISHED_SCORES)
        report = build_report(values, PUBLISHED_ENSEMBLE)
        # rebuild with one ensemble precision fold undefined
        folds = list(report.folds)
        broken = MetricSet(**{**PUBLISHED_ENSEMBLE, "precision": None})
        folds[0] = FoldDetail(
            fold=0,
            test_size=folds[0].test_size,
            selected_kinds=folds[0].selected_kinds,
            per_classifier=folds[0].per_classifier,
            ensemble=broken,
            scaling=folds[0].scaling,
        )
        new_ensemble = dict(report.ensemble)
        new_ensemble["precision"] = MetricAggregate(PUBLISHED_ENSEMBLE["precision"], None, 1)
        patched = EvaluationReport(
            k=report.k, seed=report.seed, n=report.n, select=report.select,
            candidate_kinds=report.candidate_kinds,
            per_classifier=report.per_classifier,
            ensemble=new_ensemble,
            folds=tuple(folds),
            roc={},
        )
        text = report_table(patched)
        assert "  Precision:   .90  (undefined in 1 fold)\n" in text

    def test_all_undefined_renders_na_with_plural(self):
        values = {"decision_tree": metrics_named(0.8, 0.8, 0.8, 0.8)}
        ens = dict(PUBLISHED_ENSEMBLE)
        ens["auc"] = None
        report = build_report(values, ens)
        text = report_table(report)
        assert "  AUC:         n/a  (undefined in 2 folds)" in text

    def test_ensemble_only_table(self):
        report = build_report({}, PUBLISHED_ENSEMBLE)
        text = report_table(report)
        assert "Majority Vote" in text
        assert "Decision Tree" not in text
        assert "Method | Statistics" in text
        assert text.startswith("Stratified 2-fold cross-validation (seed 7, n=8)\n")

    def test_extra_kind_appended_after_core_six(self):
        values = dict(PUBLISHED_SCORES)
        values["coin_flip"] = metrics_named(0.5, 0.5, 0.5, 0.5)
        report = build_report(values, PUBLISHED_ENSEMBLE)
        text = report_table(report)
        assert text.index("Coin Flip (diagnostic)") > text.index("Artificial Neural Network")
        assert text.index("Coin Flip (diagnostic)") < text.index("Majority Vote")


class TestRocCsv:
    def test_round_trip_exact(self, cv_report, tmp_path):
        path = tmp_path / "roc.csv"
        emit_roc(cv_report, path)
        parsed = parse_roc_csv(path)
        assert set(parsed) == set(cv_report.roc)
        for name, curve in cv_report.roc.items():
            got = parsed[name]
            assert np.array_equal(got.thresholds, curve.thresholds)
            assert np.array_equal(got.fpr, curve.fpr)
            assert np.array_equal(got.tpr, curve.tpr)

    def test_one_header_per_classifier(self, cv_report, tmp_path):
        path = tmp_path / "roc.csv"
        emit_roc(cv_report, path)
        text = path.read_text()
        assert text.count("classifier,threshold,fpr,tpr\n") == len(cv_report.roc)
        assert ",inf," in text

    def test_malformed_row_rejected(self, tmp_path):
        path = tmp_path / "roc.csv"
        path.write_text("classifier,threshold,fpr,tpr\nmajority_vote,inf,0.0\n")
        with pytest.raises(ReportFormatError, match="malformed ROC row"):
            parse_roc_csv(path)


class TestJsonPersistence:
    def test_round_trip(self, cv_report, tmp_path):
        path = tmp_path / "report.json"
        save_report(cv_report, path)
        loaded = load_report(path)
        assert report_to_json(loaded) == report_to_json(cv_report)
        assert report_table(loaded) == report_table(cv_report)

    def test_truncated_file_rejected(self, cv_report, tmp_path):
        path = tmp_path / "report.json"
        save_report(cv_report, path)
        path.write_text(path.read_text()[:90])
        with pytest.raises(ReportFormatError, match="corrupted or truncated"):
            load_report(path)

    def test_wrong_format_tag_rejected(self, cv_report):
        payload = report_to_dict(cv_report)
        payload["format"] = "something-else"
        with pytest.raises(ReportFormatError, match="not an evaluation report"):
            report_from_dict(payload)

    def test_unsupported_version_rejected(self, cv_report):
        payload = report_to_dict(cv_report)
        payload["version"] = "99"
        with pytest.raises(ReportFormatError, match="unsupported report version"):
            report_from_dict(payload)

    def test_tampered_mean_rejected_on_load(self, cv_report):
        payload = report_to_dict(cv_report)
        payload["ensemble"]["auc"]["mean"] = 0.123
        with pytest.raises(ReportFormatError, match="invalid evaluation report"):
            report_from_dict(payload)

    def test_format_constants(self):
        assert REPORT_FORMAT == "crcscreen-evaluation"
        assert REPORT_VERSION == "1"
