"""Dataset schema, CSV ingestion, standardization, stratified folds, and the
seeded synthetic population generator with an analytically known posterior."""

import csv
import math
from dataclasses import dataclass, fields

import numpy as np

from .seeds import substream
from .util import sigmoid

FEATURE_COLUMNS = ("fit_result", "bmi", "age", "diabetes", "smoking")
LABEL_COLUMN = "label"
CSV_HEADER = FEATURE_COLUMNS + (LABEL_COLUMN,)

CONTINUOUS_INDICES = (0, 1, 2)  # fit_result, bmi, age
BINARY_INDICES = (3, 4)  # diabetes, smoking

# Closed ranges for the continuous fields (upper bound may be inf).
CONTINUOUS_RANGES = {
    "fit_result": (0.0, math.inf),
    "bmi": (10.0, 80.0),
    "age": (18.0, 120.0),
}
BINARY_FIELDS = ("diabetes", "smoking")


class DatasetError(ValueError):
    """Schema, parse, or range violation in dataset handling."""


class InvalidParamsError(ValueError):
    """Generator parameters outside their legal ranges."""


def check_feature_value(field: str, value) -> str | None:
    """Validate one feature field; returns an error message or None.

    This is the single source of truth for input range rules; the CSV
    loader, the prediction service, and the web client's fixture all
    follow it.
    """
    try:
        v = float(value)
    except (TypeError, ValueError):
        return f"{field} must be a number"
    if not math.isfinite(v):
        return f"{field} must be finite"
    if field in CONTINUOUS_RANGES:
        lo, hi = CONTINUOUS_RANGES[field]
        if v < lo or v > hi:
            if math.isinf(hi):
                return f"{field} must be >= {lo:g}, got {value}"
            return f"{field} must be in [{lo:g}, {hi:g}], got {value}"
        return None
    if field in BINARY_FIELDS:
        if v not in (0.0, 1.0):
            return f"{field} must be 0 or 1, got {value}"
        return None
    raise ValueError(f"unknown feature field {field!r}")


@dataclass(frozen=True)
class FeatureVector:
    """One subject's five risk inputs, in fixed field order."""

    fit_result: float  # occult-blood hemoglobin, ng/mL stool
    bmi: float  # kg/m^2
    age: float  # years
    diabetes: int  # {0, 1}
    smoking: int  # {0, 1}

    def __post_init__(self):
        for name in FEATURE_COLUMNS:
            msg = check_feature_value(name, getattr(self, name))
            if msg is not None:
                raise DatasetError(msg)

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.fit_result, self.bmi, self.age, float(self.diabetes), float(self.smoking)],
            dtype=np.float64,
        )

    @classmethod
    def from_array(cls, arr) -> "FeatureVector":
        a = np.asarray(arr, dtype=np.float64)
        if a.shape != (5,):
            raise DatasetError(f"feature vector must have exactly 5 entries, got shape {a.shape}")
        return cls(float(a[0]), float(a[1]), float(a[2]), int(a[3]), int(a[4]))


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature rows plus binary lesion labels.

    ``standardized`` datasets hold z-scored continuous columns and are exempt
    from the raw-value range rules; raw datasets are validated on
    construction.
    """

    features: np.ndarray  # (n, 5) float64
    labels: np.ndarray  # (n,) int64 in {0, 1}
    standardized: bool = False

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64)
        y = np.array(self.labels, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] != len(FEATURE_COLUMNS):
            raise DatasetError(f"features must be (n, 5), got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DatasetError("labels length must match feature rows")
        if y.size and not np.isin(y, (0, 1)).all():
            bad = int(np.flatnonzero(~np.isin(y, (0, 1)))[0])
            raise DatasetError(f"row {bad + 1}: label must be 0 or 1, got {y[bad]}")
        if not np.isfinite(X).all():
            bad_row, bad_col = map(int, np.argwhere(~np.isfinite(X))[0])
            raise DatasetError(
                f"row {bad_row + 1}, column '{FEATURE_COLUMNS[bad_col]}': value must be finite"
            )
        if not self.standardized and X.size:
            self._check_ranges(X)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @staticmethod
    def _check_ranges(X: np.ndarray) -> None:
        for j, name in enumerate(FEATURE_COLUMNS):
            col = X[:, j]
            if name in CONTINUOUS_RANGES:
                lo, hi = CONTINUOUS_RANGES[name]
                bad = (col < lo) | (col > hi)
            else:
                bad = ~np.isin(col, (0.0, 1.0))
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise DatasetError(
                    f"row {i + 1}, column '{name}': "
                    f"{check_feature_value(name, col[i])}"
                )

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def column_names(self) -> tuple:
        return CSV_HEADER

    @property
    def prevalence(self) -> float:
        if self.n == 0:
            raise DatasetError("prevalence of an empty dataset is undefined")
        return float(self.labels.mean())

    def row(self, i: int) -> tuple:
        return FeatureVector.from_array(self.features[i]), int(self.labels[i])

    def subset(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.features[idx], self.labels[idx], self.standardized)

    def class_counts(self) -> tuple:
        return int(np.sum(self.labels == 0)), int(np.sum(self.labels == 1))


def datasets_equal(a: LabeledDataset, b: LabeledDataset) -> bool:
    return (
        a.standardized == b.standardized
        and np.array_equal(a.features, b.features)
        and np.array_equal(a.labels, b.labels)
    )


def load_dataset(path) -> LabeledDataset:
    """Parse a dataset CSV; rows keep file order.

    Raises DatasetError naming the line and column for any schema, parse, or
    range violation. Line numbers are 1-based file lines (the header is
    line 1).
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError("empty file: missing header row") from None
        if tuple(header) != CSV_HEADER:
            raise DatasetError(
                "missing or renamed column: header must be exactly "
                f"{','.join(CSV_HEADER)}, got {','.join(header)}"
            )
        feature_rows = []
        labels = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise DatasetError(
                    f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}"
                )
            values = []
            for name, cell in zip(CSV_HEADER, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"line {lineno}, column '{name}': non-numeric cell {cell!r}"
                    ) from None
                values.append(v)
            for j, name in enumerate(FEATURE_COLUMNS):
                msg = check_feature_value(name, values[j])
                if msg is not None:
                    raise DatasetError(f"line {lineno}, column '{name}': {msg}")
            label = values[-1]
            if label not in (0.0, 1.0):
                raise DatasetError(
                    f"line {lineno}, column 'label': label must be 0 or 1, got {row[-1]}"
                )
            feature_rows.append(values[:-1])
            labels.append(int(label))
    if not feature_rows:
        raise DatasetError("empty data section")
    return LabeledDataset(np.array(feature_rows, dtype=np.float64), np.array(labels))


def _format_number(v: float) -> str:
    # repr round-trips float64 exactly; integral values print without '.0'
    # only for the binary/label columns, handled by the caller.
    return repr(float(v))


def save_dataset(ds: LabeledDataset, path) -> None:
    """Write a dataset CSV that load_dataset parses back identically."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for i in range(ds.n):
            row = [_format_number(v) for v in ds.features[i, :3]]
            row.append(str(int(ds.features[i, 3])))
            row.append(str(int(ds.features[i, 4])))
            row.append(str(int(ds.labels[i])))
            writer.writerow(row)


@dataclass(frozen=True)
class ScalingParams:
    """Per-feature z-score parameters for the three continuous columns.

    Population (divide-by-n) standard deviations; a constant column records
    stddev 0 and maps to all zeros when applied.
    """

    means: tuple  # (fit, bmi, age)
    stds: tuple

    def __post_init__(self):
        if len(self.means) != 3 or len(self.stds) != 3:
            raise DatasetError("scaling params cover exactly the 3 continuous features")
        if any(s < 0 for s in self.stds):
            raise DatasetError("scaling stddev must be >= 0")
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "stds", tuple(float(s) for s in self.stds))

    def apply_matrix(self, X: np.ndarray) -> np.ndarray:
        Z = np.array(X, dtype=np.float64)
        for j, (m, s) in enumerate(zip(self.means, self.stds)):
            if s > 0:
                Z[:, j] = (Z[:, j] - m) / s
            else:
                Z[:, j] = 0.0
        return Z

    def apply_vector(self, x) -> np.ndarray:
        return self.apply_matrix(np.asarray(x, dtype=np.float64).reshape(1, -1))[0]


def standardize(ds: LabeledDataset) -> tuple:
    """Z-score the continuous features; binary columns pass through.

    Returns the standardized dataset and the ScalingParams that reproduce
    the transform on new data.
    """
    if ds.n == 0:
        raise DatasetError("cannot standardize an empty dataset")
    cont = ds.features[:, list(CONTINUOUS_INDICES)]
    means = cont.mean(axis=0)
    stds = cont.std(axis=0)  # population convention (ddof=0)
    params = ScalingParams(tuple(means), tuple(stds))
    return (
        LabeledDataset(params.apply_matrix(ds.features), ds.labels, standardized=True),
        params,
    )


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    """Per-row fold indices for stratified k-fold cross-validation."""

    k: int
    assignment: np.ndarray  # (n,) int64 in [0, k)

    def __post_init__(self):
        a = np.array(self.assignment, dtype=np.int64)
        if self.k < 2:
            raise DatasetError("fold count must be at least 2")
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise DatasetError("fold indices must lie in [0, k)")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)


def stratified_folds(ds: LabeledDataset, k: int, seed: int) -> FoldAssignment:
    """Deal each class round-robin into k folds after a seeded shuffle.

    Keeps per-fold class counts within one of proportional. Deterministic
    for identical (ds, k, seed).
    """
    if not 2 <= k <= ds.n:
        raise DatasetError(f"fold count k={k} must satisfy 2 <= k <= {ds.n}")
    neg, pos = ds.class_counts()
    if neg == 0 or pos == 0:
        raise DatasetError("stratified folds need at least one row of each class")
    rng = np.random.default_rng(seed)
    assignment = np.empty(ds.n, dtype=np.int64)
    for cls in (0, 1):
        idx = np.flatnonzero(ds.labels == cls)
        idx = rng.permutation(idx)
        assignment[idx] = np.arange(idx.size) % k
    return FoldAssignment(k, assignment)


# Default synthetic-population constants. These are versioned artifacts:
# the acceptance fixtures record Monte-Carlo statistics of exactly these
# values, so any change must regenerate tests/fixtures/synthetic_oracle.json
# and configs/generator_default.cfg.
_DEFAULT_FIT_LOG_MEAN = 2.995732273553991  # ln 20
_DEFAULT_FIT_LOG_SD = 1.2
_DEFAULT_FIT_MEAN = 41.08866421287776  # lognormal mean for the defaults above
_DEFAULT_FIT_SD = 73.73893778083773  # lognormal sd for the defaults above
_DEFAULT_AGE_SD = 10.103629710818451  # uniform(50, 85) sd = 35 / sqrt(12)


@dataclass(frozen=True)
class GeneratorParams:
    """Constants of the synthetic population and its generative risk model.

    Labels are Bernoulli draws of sigmoid(beta0 + beta . z) where z holds
    the continuous features standardized by the fixed norm_* constants
    (defaults are the marginal moments of the sampling distributions) and
    the binary features raw. The posterior is therefore known exactly at
    every point, which is what makes the generator usable as a test oracle.
    """

    beta0: float = -0.6
    beta_fit: float = 3.5
    beta_bmi: float = 0.35
    beta_age: float = 0.9
    beta_diabetes: float = 0.5
    beta_smoking: float = 0.4
    age_min: float = 50.0
    age_max: float = 85.0
    bmi_mean: float = 27.0
    bmi_sd: float = 5.0
    fit_log_mean: float = _DEFAULT_FIT_LOG_MEAN
    fit_log_sd: float = _DEFAULT_FIT_LOG_SD
    diabetes_rate: float = 0.15
    smoking_rate: float = 0.25
    norm_fit_mean: float = _DEFAULT_FIT_MEAN
    norm_fit_sd: float = _DEFAULT_FIT_SD
    norm_bmi_mean: float = 27.0
    norm_bmi_sd: float = 5.0
    norm_age_mean: float = 67.5
    norm_age_sd: float = _DEFAULT_AGE_SD

    def validate(self) -> None:
        if self.bmi_sd < 0 or self.fit_log_sd < 0:
            raise InvalidParamsError("sampling stddev must be >= 0")
        for name in ("diabetes_rate", "smoking_rate"):
            r = getattr(self, name)
            if not 0.0 <= r <= 1.0:
                raise InvalidParamsError(f"{name} must lie in [0, 1], got {r}")
        if not 18.0 <= self.age_min <= self.age_max <= 120.0:
            raise InvalidParamsError("age range must satisfy 18 <= min <= max <= 120")
        for name in ("norm_fit_sd", "norm_bmi_sd", "norm_age_sd"):
            if getattr(self, name) <= 0:
                raise InvalidParamsError(f"{name} must be > 0")

    def to_config(self) -> dict:
        return {f.name: repr(float(getattr(self, f.name))) for f in fields(self)}

    @classmethod
    def from_config(cls, items: dict) -> "GeneratorParams":
        known = {f.name for f in fields(cls)}
        unknown = set(items) - known
        if unknown:
            raise InvalidParamsError(
                f"unknown generator parameter(s): {', '.join(sorted(unknown))}"
            )
        try:
            kwargs = {k: float(v) for k, v in items.items()}
        except ValueError as exc:
            raise InvalidParamsError(f"non-numeric generator parameter: {exc}") from None
        params = cls(**kwargs)
        params.validate()
        return params


DEFAULT_GENERATOR_PARAMS = GeneratorParams()


def risk_scores(features: np.ndarray, params: GeneratorParams) -> np.ndarray:
    """Linear generative risk score for each row of a raw feature matrix."""
    X = np.asarray(features, dtype=np.float64)
    z_fit = (X[:, 0] - params.norm_fit_mean) / params.norm_fit_sd
    z_bmi = (X[:, 1] - params.norm_bmi_mean) / params.norm_bmi_sd
    z_age = (X[:, 2] - params.norm_age_mean) / params.norm_age_sd
    return (
        params.beta0
        + params.beta_fit * z_fit
        + params.beta_bmi * z_bmi
        + params.beta_age * z_age
        + params.beta_diabetes * X[:, 3]
        + params.beta_smoking * X[:, 4]
    )


def posterior_scores(features: np.ndarray, params: GeneratorParams) -> np.ndarray:
    """Exact generative posterior P(label=1 | x) for each row."""
    return sigmoid(risk_scores(features, params))


def bayes_posterior(x: FeatureVector, params: GeneratorParams) -> float:
    """Exact generative posterior for a single subject."""
    return float(posterior_scores(x.as_array().reshape(1, -1), params)[0])


def generate_synthetic(n: int, seed: int, params: GeneratorParams = DEFAULT_GENERATOR_PARAMS) -> LabeledDataset:
    """Sample a synthetic screening population of n subjects.

    Deterministic for identical (n, seed, params); the label of each row is
    a Bernoulli draw of its exact posterior.
    """
    if n < 0:
        raise InvalidParamsError(f"sample count must be >= 0, got {n}")
    params.validate()
    rng = substream(seed, "synthetic")
    fit = rng.lognormal(params.fit_log_mean, params.fit_log_sd, size=n)
    bmi = np.clip(rng.normal(params.bmi_mean, params.bmi_sd, size=n), 10.0, 80.0)
    age = rng.uniform(params.age_min, params.age_max, size=n)
    diabetes = (rng.random(n) < params.diabetes_rate).astype(np.float64)
    smoking = (rng.random(n) < params.smoking_rate).astype(np.float64)
    X = np.column_stack([fit, bmi, age, diabetes, smoking])
    if n == 0:
        X = X.reshape(0, 5)
    p = posterior_scores(X, params)
    labels = (rng.random(n) < p).astype(np.int64)
    return LabeledDataset(X, labels)


def binarize_fit(ds: LabeledDataset, threshold: float) -> LabeledDataset:
    """Replace the quantitative FIT value with a 0/1 reading at ``threshold``."""
    if ds.standardized:
        raise DatasetError("binarize_fit applies to raw datasets only")
    X = np.array(ds.features)
    X[:, 0] = (X[:, 0] >= threshold).astype(np.float64)
    return LabeledDataset(X, ds.labels)
