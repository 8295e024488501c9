import json

import pytest

from mar.fixtures import fixture_path
from mar.memory import Screenshot
from mar.scenario import load_scenario


@pytest.fixture(scope="session")
def ramen_dir():
    return fixture_path("ramen")


@pytest.fixture(scope="session")
def ramen_task(ramen_dir):
    return json.loads((ramen_dir / "task.json").read_text())["task"]


@pytest.fixture()
def ramen_scenario(ramen_dir):
    return load_scenario(ramen_dir / "scenario.json")


@pytest.fixture()
def screen_1080x2400():
    return Screenshot(image=b"{}", width=1080, height=2400, source="sim", screen_id="home")


def make_scenario(extra_transitions=(), oracle_outcomes=()):
    """Two-app toy scenario used by simulator and orchestrator tests."""
    data = {
        "apps": ["Alpha", "Beta"],
        "entry_screens": {"Alpha": "alpha_main", "Beta": "beta_main"},
        "initial_screen": "home",
        "screens": {
            "home": {
                "app": "home",
                "width": 100,
                "height": 200,
                "elements": [
                    {"id": "alpha_icon", "text": "Alpha", "bbox": [0, 0, 50, 50], "kind": "icon"},
                    {"id": "beta_icon", "text": "Beta", "bbox": [50, 0, 100, 50], "kind": "icon"},
                ],
            },
            "alpha_main": {
                "app": "Alpha",
                "width": 100,
                "height": 200,
                "elements": [
                    {"id": "field", "text": "Search", "bbox": [10, 10, 90, 30], "kind": "input"},
                    {"id": "go_btn", "text": "Go", "bbox": [10, 40, 50, 60], "kind": "text"},
                ],
            },
            "alpha_done": {
                "app": "Alpha",
                "width": 100,
                "height": 200,
                "elements": [
                    {"id": "done_label", "text": "Done", "bbox": [10, 10, 90, 30], "kind": "text"},
                ],
            },
            "beta_main": {
                "app": "Beta",
                "width": 100,
                "height": 200,
                "elements": [],
            },
        },
        "transitions": [
            {"from": "alpha_main", "on": {"action": "Tap", "element": "go_btn"}, "to": "alpha_done"},
            {"from": "alpha_main", "on": {"action": "Enter"}, "to": "alpha_done"},
        ]
        + list(extra_transitions),
        "oracle_outcomes": list(oracle_outcomes),
    }
    from mar.scenario import scenario_from_dict

    return scenario_from_dict(data)
