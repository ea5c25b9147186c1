import os
import json

import numpy as np
import pytest

from network_model import (Arc, ArcKind, DemandSet, Layer, MobilityNetwork, NetworkParams, Node,
                           TravelRequest, load_demand_file, load_network_file)

REPO_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_DIR = os.path.join(REPO_DIR, "data")
SCENARIO_DIR = os.path.join(REPO_DIR, "scenarios")
NETWORK_FILE = os.path.join(DATA_DIR, "synthetic_city", "network.json")
DEMAND_FILE = os.path.join(DATA_DIR, "synthetic_city", "demand.csv")

# walking A -> B takes 1161 s at 3.1 mph
HAND_WALK_MILES = 1161 * 3.1 / 3600


def hand_network(capacity: float = 1000.0) -> MobilityNetwork:
    """Two walking nodes joined by a walk arc and by a 1-mile AV road (limit 25 mph)."""
    nodes = [Node("A", Layer.WALK), Node("B", Layer.WALK),
             Node("VA", Layer.ROAD_AV), Node("VB", Layer.ROAD_AV)]
    arcs = [
        Arc("A", "B", ArcKind.WALK, length=HAND_WALK_MILES),
        Arc("B", "A", ArcKind.WALK, length=HAND_WALK_MILES),
        Arc("VA", "VB", ArcKind.ROAD_AV, length=1.0, speed_limit_av=25.0, capacity=capacity, baseline_usage=0.0),
        Arc("VB", "VA", ArcKind.ROAD_AV, length=1.0, speed_limit_av=25.0, capacity=capacity, baseline_usage=0.0),
        Arc("A", "VA", ArcKind.SWITCH),
        Arc("VA", "A", ArcKind.SWITCH),
        Arc("B", "VB", ArcKind.SWITCH),
        Arc("VB", "B", ArcKind.SWITCH),
    ]
    return MobilityNetwork(nodes, arcs)


@pytest.fixture
def hand_params():
    return NetworkParams(v_V_a=20.0, t_WV=300.0, t_VW=60.0)


@pytest.fixture
def hand_net():
    return hand_network()


@pytest.fixture
def one_request():
    return DemandSet((TravelRequest("A", "B", 100.0),))


@pytest.fixture
def city_network():
    return load_network_file(NETWORK_FILE)


@pytest.fixture
def city_demand():
    return load_demand_file(DEMAND_FILE)


@pytest.fixture
def city_graph_data():
    with open(NETWORK_FILE, "r", encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def write_config(tmp_path, name="tiny", **changes):
    """Scenario config on the synthetic city with absolute paths; ``changes`` replace top-level keys."""
    config = {
        "name": name,
        "network": NETWORK_FILE,
        "demand": DEMAND_FILE,
        "catalog": "S1",
        "grids": {"av_speeds_mph": [30, 50], "av_fleet": [0, 2000], "subway_levels": [1.0, 2.0]},
        "params": {"beta": 1 / 1.3, "walk_speed_mph": 3.1},
        "solver": {"backend": "simplex", "jobs": 1},
        "output_dir": str(tmp_path / f"results_{name}"),
    }
    config.update(changes)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return str(path)
