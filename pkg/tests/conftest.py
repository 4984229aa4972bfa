from __future__ import annotations

import json
from pathlib import Path

import pytest

from semnav.building import load_building_file, rasterize

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_building_path() -> Path:
    return FIXTURES / "building_4room.json"


@pytest.fixture(scope="session")
def fixture_hazard_path() -> Path:
    return FIXTURES / "building_4room_hazard.json"


@pytest.fixture(scope="session")
def fixture_graph(fixture_building_path):
    return load_building_file(fixture_building_path)


@pytest.fixture(scope="session")
def fixture_hazard_graph(fixture_hazard_path):
    return load_building_file(fixture_hazard_path)


@pytest.fixture(scope="session")
def fixture_grid(fixture_graph):
    return rasterize(fixture_graph, 0.1)


@pytest.fixture(scope="session")
def fixture_doc(fixture_building_path) -> dict:
    return json.loads(fixture_building_path.read_text())
