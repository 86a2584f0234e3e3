"""Hyperparameter bundles for the six classifier kinds.

One frozen ``Hyperparams`` object carries every kind's settings plus the
master seed, so a single value threads through training, selection, and
cross-validation. Flat ``section.key`` strings (the config-file syntax)
round-trip via ``to_config`` / ``from_config``.
"""

import dataclasses
from dataclasses import dataclass, field

from ..data import InvalidParamsError


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 4
    min_samples_split: int = 4

    def __post_init__(self):
        if self.max_depth < 1:
            raise InvalidParamsError("tree.max_depth must be >= 1")
        if self.min_samples_split < 1:
            raise InvalidParamsError("tree.min_samples_split must be >= 1")


@dataclass(frozen=True)
class ForestParams:
    trees: int = 100
    feature_subsample: int = 3
    bootstrap: bool = True

    def __post_init__(self):
        if self.trees < 1:
            raise InvalidParamsError("forest.trees must be >= 1")
        if not 1 <= self.feature_subsample <= 5:
            raise InvalidParamsError("forest.feature_subsample must be in 1..5")


@dataclass(frozen=True)
class BoostParams:
    # rounds=0 and learning_rate=0 are legal degenerate settings: both leave
    # the model constant at the base score.
    rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    l2: float = 1.0
    min_child_hessian: float = 1.0

    def __post_init__(self):
        if self.rounds < 0:
            raise InvalidParamsError("boost.rounds must be >= 0")
        if not self.learning_rate >= 0:
            raise InvalidParamsError("boost.learning_rate must be >= 0")
        if self.max_depth < 0:
            raise InvalidParamsError("boost.max_depth must be >= 0")
        if not self.l2 > 0:
            raise InvalidParamsError("boost.l2 must be > 0")
        if not self.min_child_hessian >= 0:
            raise InvalidParamsError("boost.min_child_hessian must be >= 0")


@dataclass(frozen=True)
class LogisticParams:
    l2: float = 1.0
    grad_tolerance: float = 1e-8
    max_iterations: int = 100

    def __post_init__(self):
        if not self.l2 > 0:
            raise InvalidParamsError("logistic.l2 must be > 0")
        if not self.grad_tolerance > 0:
            raise InvalidParamsError("logistic.grad_tolerance must be > 0")
        if self.max_iterations < 1:
            raise InvalidParamsError("logistic.max_iterations must be >= 1")


@dataclass(frozen=True)
class SvmParams:
    c: float = 1.0
    gap_tolerance: float = 1e-6
    max_passes: int = 200

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidParamsError("svm.c must be > 0")
        if not self.gap_tolerance > 0:
            raise InvalidParamsError("svm.gap_tolerance must be > 0")
        if self.max_passes < 1:
            raise InvalidParamsError("svm.max_passes must be >= 1")


@dataclass(frozen=True)
class MlpParams:
    hidden_width: int = 8
    weight_decay: float = 1e-4
    restarts: int = 5

    def __post_init__(self):
        if self.hidden_width < 1:
            raise InvalidParamsError("mlp.hidden_width must be >= 1")
        if not self.weight_decay > 0:
            raise InvalidParamsError("mlp.weight_decay must be > 0")
        if self.restarts < 1:
            raise InvalidParamsError("mlp.restarts must be >= 1")


@dataclass(frozen=True)
class Hyperparams:
    seed: int = 0
    tree: TreeParams = field(default_factory=TreeParams)
    forest: ForestParams = field(default_factory=ForestParams)
    boost: BoostParams = field(default_factory=BoostParams)
    logistic: LogisticParams = field(default_factory=LogisticParams)
    svm: SvmParams = field(default_factory=SvmParams)
    mlp: MlpParams = field(default_factory=MlpParams)

    _SECTIONS = ("tree", "forest", "boost", "logistic", "svm", "mlp")

    def to_config(self) -> dict:
        """Flatten to ``section.key -> string`` plus the bare ``seed`` key."""
        out = {"seed": str(self.seed)}
        for section in self._SECTIONS:
            sub = getattr(self, section)
            for f in dataclasses.fields(sub):
                v = getattr(sub, f.name)
                if isinstance(v, bool):
                    text = "true" if v else "false"
                elif isinstance(v, float):
                    text = repr(v)
                else:
                    text = str(v)
                out[f"{section}.{f.name}"] = text
        return out

    @classmethod
    def from_config(cls, items) -> "Hyperparams":
        """Build from flat ``section.key`` strings; unknown keys are errors."""
        by_section: dict = {section: {} for section in cls._SECTIONS}
        seed = 0
        for key, raw in dict(items).items():
            if key == "seed":
                seed = _parse_typed(key, raw, int)
                continue
            section, _, name = key.partition(".")
            if section not in by_section:
                raise InvalidParamsError(f"unknown hyperparameter key '{key}'")
            sub_fields = {f.name: f.type for f in dataclasses.fields(_SECTION_TYPES[section])}
            if name not in sub_fields:
                raise InvalidParamsError(f"unknown hyperparameter key '{key}'")
            declared = sub_fields[name]
            target = declared if isinstance(declared, type) else _PY_TYPES[declared]
            by_section[section][name] = _parse_typed(key, raw, target)
        kwargs = {
            section: _SECTION_TYPES[section](**vals)
            for section, vals in by_section.items()
        }
        return cls(seed=seed, **kwargs)


_SECTION_TYPES = {
    "tree": TreeParams,
    "forest": ForestParams,
    "boost": BoostParams,
    "logistic": LogisticParams,
    "svm": SvmParams,
    "mlp": MlpParams,
}

_PY_TYPES = {"int": int, "float": float, "bool": bool}


def _parse_typed(key, raw, target):
    text = str(raw).strip()
    if target is bool:
        low = text.lower()
        if low in ("true", "1"):
            return True
        if low in ("false", "0"):
            return False
        raise InvalidParamsError(f"{key}: expected true/false, got '{text}'")
    try:
        return target(text)
    except ValueError:
        raise InvalidParamsError(
            f"{key}: expected {target.__name__}, got '{text}'"
        ) from None


DEFAULT_HYPERPARAMS = Hyperparams()
