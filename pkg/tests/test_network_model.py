import json

import networkx as nx
import pytest

from codesign_utils import ConfigurationError, NetworkBuildError
from network_model import (Arc, ArcKind, DemandSet, EnergyModel, Layer, MobilityNetwork, NetworkParams, Node,
                           TravelRequest, arc_emissions_kg, arc_energy, boarding_time, compute_travel_times,
                           filter_av_arcs, load_demand_file, load_network_file, network_from_dict,
                           prepare_network, validate_demand, validate_network)

from conftest import HAND_WALK_MILES


def av_road(limit, length=1.0, capacity=1000.0, baseline=0.0):
    nodes = [Node("V1", Layer.ROAD_AV), Node("V2", Layer.ROAD_AV)]
    arcs = [Arc("V1", "V2", ArcKind.ROAD_AV, length=length, speed_limit_av=limit, capacity=capacity,
                baseline_usage=baseline)]
    return MobilityNetwork(nodes, arcs)


class TestFilter:
    @pytest.mark.parametrize("v, beta, limit, kept", [
        (20.0, 1 / 1.3, 25.0, True),
        (20.0, 1 / 1.3, 30.0, False),
        (30.0, 1.0, 30.0, True),
        (29.0, 1.0, 30.0, False),
    ])
    def test_examples(self, v, beta, limit, kept):
        network = filter_av_arcs(av_road(limit), NetworkParams(beta=beta, v_V_a=v))
        assert (len(network.arcs) == 1) == kept

    def test_other_arcs_untouched(self, city_network):
        filtered = filter_av_arcs(city_network, NetworkParams(v_V_a=0.0))
        assert filtered.arcs_of(ArcKind.ROAD_AV) == []
        assert len(filtered.arcs) == len(city_network.arcs) - len(city_network.arcs_of(ArcKind.ROAD_AV))

    def test_monotone_in_speed(self, city_network):
        kept = [{a.key for a in filter_av_arcs(city_network, NetworkParams(v_V_a=v)).arcs}
                for v in range(0, 55, 5)]
        for slower, faster in zip(kept, kept[1:]):
            assert slower <= faster


class TestTravelTimes:
    def test_boarding_time(self):
        assert boarding_time(60.0, 1 / 6) == pytest.approx(240.0)
        # twice the trains, twice the frequency
        assert boarding_time(60.0, 2 / 6) == pytest.approx(150.0)

    def test_road_speed_is_capped_by_the_limit(self):
        network = compute_travel_times(av_road(30.0), NetworkParams(v_V_a=45.0))
        arc = network.arcs[0]
        assert arc.speed == 30.0
        assert arc.travel_time == pytest.approx(120.0)

    def test_hand_network(self, hand_net, hand_params):
        network = compute_travel_times(hand_net, hand_params)
        times = {a.key: a.travel_time for a in network.arcs}
        assert times[("A", "B")] == pytest.approx(1161.0)
        assert times[("VA", "VB")] == pytest.approx(180.0)
        assert times[("A", "VA")] == 300.0
        assert times[("VB", "B")] == 60.0
        assert network.has_travel_times
        assert not hand_net.has_travel_times

    def test_boarding_uses_frequency_multiplier(self, city_network):
        params = NetworkParams(v_V_a=50.0, v_M_a=15.0, frequency_multiplier=2.0)
        network = compute_travel_times(city_network, params)
        boarding = [a for a in network.arcs if network.switch_layers(a) == (Layer.WALK, Layer.TRANSIT)]
        alighting = [a for a in network.arcs if network.switch_layers(a) == (Layer.TRANSIT, Layer.WALK)]
        assert boarding and all(a.travel_time == pytest.approx(150.0) for a in boarding)
        assert alighting and all(a.travel_time == 60.0 for a in alighting)

    def test_missing_frequency(self, city_network):
        with pytest.raises(ConfigurationError):
            compute_travel_times(city_network, NetworkParams(v_V_a=50.0, v_M_a=15.0, phi_base=None))

    def test_per_station_frequency(self, city_network):
        params = NetworkParams(v_V_a=50.0, v_M_a=15.0, phi_base={"S0": 1 / 6, "S1": 1 / 3})
        network = compute_travel_times(city_network, params)
        times = {a.head: a.travel_time for a in network.arcs
                 if network.switch_layers(a) == (Layer.WALK, Layer.TRANSIT)}
        assert times["S0"] == pytest.approx(240.0)
        assert times["S1"] == pytest.approx(150.0)

    def test_times_antitone_in_speed(self, city_network):
        slow = prepare_network(city_network, NetworkParams(v_V_a=45.0, v_M_a=10.0))
        fast = prepare_network(city_network, NetworkParams(v_V_a=50.0, v_M_a=15.0))
        fast_times = {a.key: a.travel_time for a in fast.arcs}
        for arc in slow.arcs:
            assert fast_times[arc.key] <= arc.travel_time

    def test_zero_speed_on_kept_road(self):
        with pytest.raises(ConfigurationError):
            compute_travel_times(av_road(25.0), NetworkParams(v_V_a=0.0))

    def test_prepare_drops_micromobility_without_speed(self, city_network):
        network = prepare_network(city_network, NetworkParams(v_V_a=50.0, v_M_a=0.0))
        assert network.nodes_in(Layer.ROAD_MM) == []
        assert network.arcs_of(ArcKind.ROAD_MM) == []
        assert len(network.nodes) == 14
        assert network.has_travel_times


class TestEnergy:
    def test_default_table(self):
        arc = Arc("V1", "V2", ArcKind.ROAD_AV, length=2.0, speed=20.0)
        assert arc_energy(arc, EnergyModel()) == pytest.approx(1800.0)
        assert arc_emissions_kg(arc, EnergyModel()) * 1000 == pytest.approx(252.0)

    def test_zero_length(self):
        arc = Arc("V1", "V2", ArcKind.ROAD_AV, length=0.0, speed=20.0)
        assert arc_energy(arc, EnergyModel()) == 0.0

    def test_custom_buckets(self):
        model = EnergyModel(av_energy_per_mile={20: 800.0, 25: 1000.0})
        assert model.av_rate(24.9) == 800.0
        assert model.av_rate(25.0) == 1000.0
        with pytest.raises(ConfigurationError):
            model.av_rate(40.0)

    def test_micromobility_rate(self):
        arc = Arc("M1", "M2", ArcKind.ROAD_MM, length=3.0, speed=15.0)
        assert arc_energy(arc, EnergyModel(mm_energy_per_mile=100.0)) == pytest.approx(300.0)

    def test_walk_arc_has_no_vehicle_energy(self):
        with pytest.raises(ConfigurationError):
            arc_energy(Arc("A", "B", ArcKind.WALK, length=1.0), EnergyModel())


class TestValidation:
    def test_synthetic_city_passes(self, city_network, city_demand):
        report = validate_network(city_network)
        assert report.ok, report.errors
        assert validate_demand(city_network, city_demand).ok
        assert len(city_network.nodes) == 20
        assert len(city_network.arcs) == 72

    def test_split_walk_layer(self, city_graph_data):
        data = dict(city_graph_data)
        # cut every arc touching W5 except its own outgoing walk arcs
        data["arcs"] = [a for a in data["arcs"] if a["head"] != "W5"]
        report = validate_network(network_from_dict(data))
        assert not report.ok
        assert any("strongly connected" in e for e in report.errors)

    def test_baseline_above_capacity_names_the_arc(self, city_graph_data):
        data = json.loads(json.dumps(city_graph_data))
        target = next(a for a in data["arcs"] if a["kind"] == "road_av")
        target["baseline_vph"] = target["capacity_vph"] + 1
        report = validate_network(network_from_dict(data))
        assert not report.ok
        assert any(f"{target['tail']} -> {target['head']}" in e and "capacity" in e for e in report.errors)

    def test_illegal_switch(self):
        nodes = [Node("V", Layer.ROAD_AV), Node("M", Layer.ROAD_MM)]
        arcs = [Arc("V", "M", ArcKind.SWITCH), Arc("M", "V", ArcKind.SWITCH)]
        report = validate_network(MobilityNetwork(nodes, arcs))
        assert any("illegal mode switch" in e for e in report.errors)

    def test_kind_must_match_layer(self):
        nodes = [Node("A", Layer.WALK), Node("B", Layer.WALK)]
        arcs = [Arc("A", "B", ArcKind.ROAD_AV, length=1.0, speed_limit_av=25, capacity=10),
                Arc("B", "A", ArcKind.WALK, length=1.0)]
        report = validate_network(MobilityNetwork(nodes, arcs))
        assert any("does not match layers" in e for e in report.errors)

    def test_demand_on_unknown_and_non_walk_nodes(self, city_network):
        demand = DemandSet((TravelRequest("W0", "X9", 10.0), TravelRequest("V0", "W1", 5.0)))
        report = validate_demand(city_network, demand)
        assert any("X9" in e for e in report.errors)
        assert any("V0" in e and "walking" in e for e in report.errors)


class TestDemand:
    def test_inclusion_order(self):
        small = DemandSet((TravelRequest("A", "B", 10.0),))
        large = DemandSet((TravelRequest("A", "B", 20.0), TravelRequest("B", "A", 5.0)))
        assert small <= large
        assert not large <= small
        assert small <= small
        assert small.scaled(2.0) <= large
        assert not small.scaled(3.0) <= large

    def test_request_checks(self):
        with pytest.raises(NetworkBuildError):
            TravelRequest("A", "A", 1.0)
        with pytest.raises(NetworkBuildError):
            TravelRequest("A", "B", 0.0)
        with pytest.raises(NetworkBuildError):
            DemandSet((TravelRequest("A", "B", 1.0), TravelRequest("A", "B", 2.0)))

    def test_load_shipped_demand(self, city_demand):
        assert [r.od for r in city_demand] == [("W0", "W5"), ("W5", "W0"), ("W2", "W3")]
        assert city_demand.total_rate == 260.0

    def test_unknown_columns_rejected(self, tmp_path):
        path = tmp_path / "demand.csv"
        path.write_text("origin,destination,rate_per_hour,mode\nW0,W5,10,car\n", encoding="utf-8")
        with pytest.raises(NetworkBuildError):
            load_demand_file(str(path))


class TestGraphFile:
    def test_graph_view(self, city_network):
        graph = city_network.graph
        assert graph.number_of_nodes() == 20
        assert graph.number_of_edges() == 72
        assert graph.nodes["S0"]["layer"] == Layer.TRANSIT
        assert graph.edges["S0", "S1"]["arc"].transit_time == 240.0

    def test_unknown_arc_field(self, tmp_path, city_graph_data):
        data = json.loads(json.dumps(city_graph_data))
        data["arcs"][0]["lanes"] = 2
        path = tmp_path / "network.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(NetworkBuildError, match="lanes"):
            load_network_file(str(path))

    def test_unknown_top_level_field(self, city_graph_data):
        with pytest.raises(NetworkBuildError):
            network_from_dict({**city_graph_data, "zones": []})

    def test_dangling_arc(self):
        with pytest.raises(NetworkBuildError):
            MobilityNetwork([Node("A", Layer.WALK)], [Arc("A", "B", ArcKind.WALK, length=1.0)])

    def test_duplicate_arc(self):
        nodes = [Node("A", Layer.WALK), Node("B", Layer.WALK)]
        with pytest.raises(NetworkBuildError):
            MobilityNetwork(nodes, [Arc("A", "B", ArcKind.WALK, length=1.0), Arc("A", "B", ArcKind.WALK, length=2.0)])

    def test_bad_json(self, tmp_path):
        path = tmp_path / "network.json"
        path.write_text("{nodes: [", encoding="utf-8")
        with pytest.raises(NetworkBuildError):
            load_network_file(str(path))

    def test_hand_walk_length(self):
        assert HAND_WALK_MILES / 3.1 * 3600 == pytest.approx(1161.0)

    def test_shortest_path_on_prepared_city(self, city_network):
        network = prepare_network(city_network, NetworkParams(v_V_a=50.0, v_M_a=15.0))
        assert nx.has_path(network.graph, "W0", "W5")
        assert nx.shortest_path_length(network.graph, "W0", "W5", weight="travel_time") > 0
