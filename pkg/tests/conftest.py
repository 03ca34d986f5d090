import json
import pathlib

import pytest

GOLDEN_PATH = pathlib.Path(__file__).parent / "oracles" / "goldens.json"


@pytest.fixture(scope="session")
def goldens():
    with open(GOLDEN_PATH, encoding="utf-8") as fh:
        raw = json.load(fh)
    return {k: complex(*v) if isinstance(v, list) else v for k, v in raw.items()}
