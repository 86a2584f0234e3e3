import dataclasses
import json
import pathlib

import pytest

from crcscreen.data import generate_synthetic
from crcscreen.ensemble import fit_ensemble, save_model
from crcscreen.learners import DEFAULT_KINDS
from crcscreen.learners.params import (
    DEFAULT_HYPERPARAMS,
    BoostParams,
    ForestParams,
    MlpParams,
)

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def synthetic_oracle():
    """Frozen Monte-Carlo statistics of the default generator."""
    with open(FIXTURES / "synthetic_oracle.json", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def light_hp():
    """Smaller training budgets so multi-model tests stay quick.

    Same algorithms and contracts as the defaults, just fewer trees,
    rounds, and restarts.
    """
    return dataclasses.replace(
        DEFAULT_HYPERPARAMS,
        forest=ForestParams(trees=20),
        boost=BoostParams(rounds=30),
        mlp=MlpParams(restarts=2),
    )


@pytest.fixture(scope="session")
def ds300():
    return generate_synthetic(300, seed=17)


@pytest.fixture(scope="session")
def trained_model(ds300, light_hp):
    return fit_ensemble(DEFAULT_KINDS, ds300, light_hp)


@pytest.fixture(scope="session")
def model_path(tmp_path_factory, trained_model):
    path = tmp_path_factory.mktemp("model") / "model.json"
    save_model(trained_model, path)
    return path
