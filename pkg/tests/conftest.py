import json
import pathlib

import pytest

from bddts import modelio
from bddts.scenario import parse_scenario

ROOT = pathlib.Path(__file__).resolve().parent.parent
MODELS = ROOT / "models"


@pytest.fixture(scope="session")
def door():
    return modelio.load_model(str(MODELS / "door.json"))


@pytest.fixture(scope="session")
def door_mutant():
    return modelio.load_model(str(MODELS / "door_mutant.json"))


@pytest.fixture(scope="session")
def door_ini(door):
    with open(MODELS / "door_ini.json") as fh:
        return modelio.ini_from_json(json.load(fh), door)


@pytest.fixture(scope="session")
def door_scenario_text():
    return (MODELS / "door.scenario").read_text()


@pytest.fixture(scope="session")
def door_from_scenario(door_scenario_text):
    return parse_scenario(door_scenario_text, name="door")


@pytest.fixture(scope="session")
def door_dom(door):
    return door.domain()
