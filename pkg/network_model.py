#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
多模式交通网络模型

Four-layer intermodal digraph (walking, AV road, micromobility road, transit)
joined by mode-switch arcs. Networks are immutable: filtering and travel-time
computation return new networks.
"""

import json
import math
import logging
from enum import Enum
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import networkx as nx
import pandas as pd

from codesign_kernel import OrderedSpace
from codesign_utils import ConfigurationError, NetworkBuildError

logger = logging.getLogger("network_model")

SECONDS_PER_HOUR = 3600.0
SPEED_BUCKET_MPH = 5


class Layer(str, Enum):
    WALK = "walk"
    ROAD_AV = "road_av"
    ROAD_MM = "road_mm"
    TRANSIT = "transit"


class ArcKind(str, Enum):
    WALK = "walk"
    ROAD_AV = "road_av"
    ROAD_MM = "road_mm"
    TRANSIT = "transit"
    SWITCH = "switch"


# in-layer arc kind per layer
LAYER_ARC_KIND = {
    Layer.WALK: ArcKind.WALK,
    Layer.ROAD_AV: ArcKind.ROAD_AV,
    Layer.ROAD_MM: ArcKind.ROAD_MM,
    Layer.TRANSIT: ArcKind.TRANSIT,
}

# legal mode switches (tail layer, head layer)
SWITCH_LAYERS = {
    (Layer.WALK, Layer.ROAD_AV), (Layer.ROAD_AV, Layer.WALK),
    (Layer.WALK, Layer.ROAD_MM), (Layer.ROAD_MM, Layer.WALK),
    (Layer.WALK, Layer.TRANSIT), (Layer.TRANSIT, Layer.WALK),
}

NODE_FIELDS = {"id", "layer", "x", "y"}
ARC_FIELDS = {"tail", "head", "kind", "length_miles", "limit_av_mph", "limit_mm_mph",
              "capacity_vph", "baseline_vph", "transit_time_s", "station_frequency_per_min"}
DEMAND_COLUMNS = ["origin", "destination", "rate_per_hour"]


@dataclass(frozen=True)
class Node:
    id: str
    layer: Layer
    x: float = 0.0
    y: float = 0.0


@dataclass(frozen=True)
class Arc:
    tail: str
    head: str
    kind: ArcKind
    length: Optional[float] = None
    speed_limit_av: Optional[float] = None
    speed_limit_mm: Optional[float] = None
    capacity: Optional[float] = None
    baseline_usage: Optional[float] = None
    transit_time: Optional[float] = None
    station_frequency: Optional[float] = None
    # filled by compute_travel_times
    travel_time: Optional[float] = None
    speed: Optional[float] = None

    @property
    def key(self) -> Tuple[str, str]:
        return (self.tail, self.head)

    @property
    def travel_time_hours(self) -> float:
        return self.travel_time / SECONDS_PER_HOUR


@dataclass(frozen=True)
class NetworkParams:
    """
    网络参数

    Times in seconds, speeds in mph, frequencies per minute. ``phi_base`` is
    either one frequency for every station or a mapping station -> frequency;
    ``frequency_multiplier`` scales all of them (n_S / n_S_base).
    """
    walk_speed: float = 3.1
    beta: float = 1 / 1.3
    t_WS: float = 60.0
    t_WV: float = 300.0
    t_VW: float = 60.0
    t_WM: float = 60.0
    t_MW: float = 60.0
    t_SW: float = 60.0
    phi_base: Union[float, Mapping[str, float], None] = 1 / 6
    frequency_multiplier: float = 1.0
    v_V_a: float = 0.0
    v_M_a: float = 0.0

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ConfigurationError(f"beta must lie in (0, 1], got {self.beta}")
        if self.walk_speed <= 0:
            raise ConfigurationError("walking speed must be positive")
        for name in ("t_WS", "t_WV", "t_VW", "t_WM", "t_MW", "t_SW"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be nonnegative")
        if self.frequency_multiplier <= 0:
            raise ConfigurationError("frequency multiplier must be positive")
        if self.v_V_a < 0 or self.v_M_a < 0:
            raise ConfigurationError("achievable speeds must be nonnegative")
        if isinstance(self.phi_base, Mapping):
            # frozen dataclass must stay hashable
            object.__setattr__(self, "phi_base", tuple(sorted(self.phi_base.items())))

    def station_frequency(self, station: str) -> Optional[float]:
        if self.phi_base is None:
            return None
        if isinstance(self.phi_base, tuple):
            return dict(self.phi_base).get(station)
        return self.phi_base


def default_av_energy_table() -> Dict[int, float]:
    return {bucket: 900.0 for bucket in range(0, 55, SPEED_BUCKET_MPH)}


@dataclass(frozen=True)
class EnergyModel:
    """
    Energy per mile as a function of speed (5 mph buckets, keyed by the lower
    bound) for AVs, a constant rate for micromobility, CO2 intensity in g/kJ
    and per-train emissions in kg/year.
    """
    av_energy_per_mile: Tuple[Tuple[int, float], ...] = tuple(sorted(default_av_energy_table().items()))
    mm_energy_per_mile: float = 0.0
    gamma: float = 0.14
    train_emissions: float = 140000.0

    def __post_init__(self):
        table = self.av_energy_per_mile
        if isinstance(table, Mapping):
            table = tuple(sorted((int(k), float(v)) for k, v in table.items()))
            object.__setattr__(self, "av_energy_per_mile", table)
        for bucket, rate in table:
            if bucket % SPEED_BUCKET_MPH or rate < 0:
                raise ConfigurationError(f"bad energy table entry {bucket}: {rate}")
        if self.mm_energy_per_mile < 0 or self.gamma < 0 or self.train_emissions < 0:
            raise ConfigurationError("energy model entries must be nonnegative")

    def av_rate(self, speed: float) -> float:
        bucket = int(math.floor(speed / SPEED_BUCKET_MPH)) * SPEED_BUCKET_MPH
        rate = dict(self.av_energy_per_mile).get(bucket)
        if rate is None:
            raise ConfigurationError(f"AV energy table does not cover {speed} mph")
        return rate


def arc_energy(arc: Arc, energy_model: EnergyModel) -> float:
    """
    Energy (kJ) of one vehicle traversing ``arc``.

    Args:
        arc: RoadAV or RoadMM arc with a computed speed
        energy_model: energy rates

    Returns:
        float: kJ per traversal
    """
    if arc.kind == ArcKind.ROAD_AV:
        if arc.speed is None:
            raise ConfigurationError(f"arc {arc.key} has no computed speed")
        return energy_model.av_rate(arc.speed) * arc.length
    if arc.kind == ArcKind.ROAD_MM:
        return energy_model.mm_energy_per_mile * arc.length
    raise ConfigurationError(f"arc {arc.key} of kind {arc.kind.value} has no vehicle energy")


def arc_emissions_kg(arc: Arc, energy_model: EnergyModel) -> float:
    """CO2 (kg) of one traversal."""
    return energy_model.gamma * arc_energy(arc, energy_model) / 1000.0


@dataclass(frozen=True)
class TravelRequest:
    origin: str
    destination: str
    rate: float

    def __post_init__(self):
        if self.origin == self.destination:
            raise NetworkBuildError(f"request {self.origin} -> {self.destination}: origin equals destination")
        if not self.rate > 0:
            raise NetworkBuildError(f"request {self.origin} -> {self.destination}: rate must be positive")

    @property
    def od(self) -> Tuple[str, str]:
        return (self.origin, self.destination)


@dataclass(frozen=True)
class DemandSet:
    """
    出行需求集合

    Ordered by inclusion: D1 <= D2 iff every request of D1 appears in D2
    (same origin/destination) with at least the same rate.
    """
    requests: Tuple[TravelRequest, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "requests", tuple(self.requests))
        ods = [r.od for r in self.requests]
        if len(set(ods)) != len(ods):
            raise NetworkBuildError("demand lists the same origin/destination pair twice")

    def __len__(self):
        return len(self.requests)

    def __iter__(self):
        return iter(self.requests)

    def __le__(self, other: "DemandSet") -> bool:
        rates = {r.od: r.rate for r in other.requests}
        return all(r.od in rates and r.rate <= rates[r.od] for r in self.requests)

    def __ge__(self, other: "DemandSet") -> bool:
        return other <= self

    @property
    def total_rate(self) -> float:
        return sum(r.rate for r in self.requests)

    def scaled(self, factor: float) -> "DemandSet":
        return DemandSet(tuple(replace(r, rate=r.rate * factor) for r in self.requests))


class DemandSpace(OrderedSpace):
    """Functionality space of demand sets."""

    def __init__(self):
        super().__init__("demand")


class MobilityNetwork:
    """
    多模式网络

    Nodes and arcs in file order plus a ``networkx.DiGraph`` view (one arc
    per ordered node pair, arc object under the ``arc`` edge attribute).
    """

    def __init__(self, nodes: Iterable[Node], arcs: Iterable[Arc]):
        self.nodes: Dict[str, Node] = {}
        for node in nodes:
            if node.id in self.nodes:
                raise NetworkBuildError(f"duplicate node id {node.id!r}")
            self.nodes[node.id] = node
        self.arcs: Tuple[Arc, ...] = tuple(arcs)

        self.graph = nx.DiGraph()
        for node in self.nodes.values():
            self.graph.add_node(node.id, layer=node.layer)
        for arc in self.arcs:
            for end in arc.key:
                if end not in self.nodes:
                    raise NetworkBuildError(f"arc {arc.tail} -> {arc.head} references unknown node {end!r}")
            if self.graph.has_edge(*arc.key):
                raise NetworkBuildError(f"duplicate arc {arc.tail} -> {arc.head}")
            self.graph.add_edge(arc.tail, arc.head, arc=arc, travel_time=arc.travel_time)

    def __repr__(self):
        return f"MobilityNetwork({len(self.nodes)} nodes, {len(self.arcs)} arcs)"

    def layer_of(self, node_id: str) -> Layer:
        return self.nodes[node_id].layer

    def nodes_in(self, layer: Layer) -> List[str]:
        return [n.id for n in self.nodes.values() if n.layer == layer]

    def arcs_of(self, kind: ArcKind) -> List[Arc]:
        return [a for a in self.arcs if a.kind == kind]

    def switch_layers(self, arc: Arc) -> Tuple[Layer, Layer]:
        return (self.layer_of(arc.tail), self.layer_of(arc.head))

    def with_arcs(self, arcs: Iterable[Arc]) -> "MobilityNetwork":
        return MobilityNetwork(self.nodes.values(), arcs)

    def without_layer(self, layer: Layer) -> "MobilityNetwork":
        """Drop every node of ``layer`` together with its arcs."""
        keep = {n.id for n in self.nodes.values() if n.layer != layer}
        return MobilityNetwork([self.nodes[n] for n in self.nodes if n in keep],
                               [a for a in self.arcs if a.tail in keep and a.head in keep])

    @property
    def has_travel_times(self) -> bool:
        return all(a.travel_time is not None for a in self.arcs)


def _optional_float(record: Mapping[str, Any], key: str) -> Optional[float]:
    value = record.get(key)
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise NetworkBuildError(f"field {key!r} must be a number, got {value!r}") from None


def _reject_unknown(record: Mapping[str, Any], allowed: set, what: str) -> None:
    unknown = sorted(set(record) - allowed)
    if unknown:
        raise NetworkBuildError(f"{what}: unknown fields {unknown}")


def network_from_dict(data: Mapping[str, Any]) -> MobilityNetwork:
    """Build a network from the parsed graph document."""
    _reject_unknown(data, {"nodes", "arcs"}, "graph file")
    nodes = []
    for record in data.get("nodes", []):
        _reject_unknown(record, NODE_FIELDS, f"node {record.get('id')}")
        try:
            layer = Layer(record["layer"])
        except (KeyError, ValueError):
            raise NetworkBuildError(f"node {record.get('id')}: bad layer {record.get('layer')!r}") from None
        if "id" not in record:
            raise NetworkBuildError("node without id")
        nodes.append(Node(str(record["id"]), layer, float(record.get("x", 0.0)), float(record.get("y", 0.0))))

    arcs = []
    for record in data.get("arcs", []):
        what = f"arc {record.get('tail')} -> {record.get('head')}"
        _reject_unknown(record, ARC_FIELDS, what)
        try:
            kind = ArcKind(record["kind"])
            tail, head = str(record["tail"]), str(record["head"])
        except (KeyError, ValueError):
            raise NetworkBuildError(f"{what}: missing tail/head or bad kind {record.get('kind')!r}") from None
        arcs.append(Arc(tail, head, kind,
                        length=_optional_float(record, "length_miles"),
                        speed_limit_av=_optional_float(record, "limit_av_mph"),
                        speed_limit_mm=_optional_float(record, "limit_mm_mph"),
                        capacity=_optional_float(record, "capacity_vph"),
                        baseline_usage=_optional_float(record, "baseline_vph"),
                        transit_time=_optional_float(record, "transit_time_s"),
                        station_frequency=_optional_float(record, "station_frequency_per_min")))
    return MobilityNetwork(nodes, arcs)


def load_network_file(path: str) -> MobilityNetwork:
    """
    读取网络文件 (JSON)

    Raises:
        OSError: file cannot be read
        NetworkBuildError: malformed document or unknown fields
    """
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise NetworkBuildError(f"{path}: not valid JSON ({e})") from None
    network = network_from_dict(data)
    logger.info(f"网络已加载: {path} ({len(network.nodes)} nodes, {len(network.arcs)} arcs)")
    return network


def load_demand_file(path: str) -> DemandSet:
    """
    读取需求文件 (CSV: origin, destination, rate_per_hour)

    Raises:
        OSError: file cannot be read
        NetworkBuildError: wrong columns or bad values
    """
    df = pd.read_csv(path, dtype={"origin": str, "destination": str})
    if list(df.columns) != DEMAND_COLUMNS:
        raise NetworkBuildError(f"{path}: expected columns {DEMAND_COLUMNS}, got {list(df.columns)}")
    requests = [TravelRequest(row.origin, row.destination, float(row.rate_per_hour))
                for row in df.itertuples(index=False)]
    logger.info(f"需求已加载: {path} ({len(requests)} requests)")
    return DemandSet(tuple(requests))


def filter_av_arcs(network: MobilityNetwork, params: NetworkParams) -> MobilityNetwork:
    """
    Keep a RoadAV arc iff the achievable AV speed reaches beta times its limit.
    Every other arc is untouched.
    """
    kept = []
    dropped = 0
    for arc in network.arcs:
        if arc.kind == ArcKind.ROAD_AV:
            if arc.speed_limit_av is None:
                raise ConfigurationError(f"AV arc {arc.key} has no speed limit")
            if params.v_V_a < params.beta * arc.speed_limit_av - 1e-9:
                dropped += 1
                continue
        kept.append(arc)
    logger.debug(f"AV filter at {params.v_V_a} mph: dropped {dropped} arcs")
    return network.with_arcs(kept)


def boarding_time(t_WS: float, frequency_per_min: float) -> float:
    """Seconds from the platform into the train: t_WS plus half a headway."""
    if not frequency_per_min or frequency_per_min <= 0:
        raise ConfigurationError("station frequency must be positive")
    return t_WS + 60.0 / (2.0 * frequency_per_min)


def _road_time(arc: Arc, achievable: float, limit: Optional[float]) -> Tuple[float, float]:
    if limit is None:
        raise ConfigurationError(f"road arc {arc.key} has no speed limit")
    speed = min(achievable, limit)
    if speed <= 0:
        raise ConfigurationError(f"road arc {arc.key}: no positive speed (achievable {achievable} mph)")
    return arc.length / speed * SECONDS_PER_HOUR, speed


def compute_travel_times(network: MobilityNetwork, params: NetworkParams) -> MobilityNetwork:
    """
    计算每条弧的通行时间（秒）

    Walk arcs at walking speed, road arcs at min(achievable, limit), transit
    in-vehicle times from the data, switch arcs from the waiting/transfer
    times (boarding adds half the scaled headway).
    """
    arcs = []
    for arc in network.arcs:
        speed = None
        if arc.kind == ArcKind.WALK:
            t = arc.length / params.walk_speed * SECONDS_PER_HOUR
        elif arc.kind == ArcKind.ROAD_AV:
            t, speed = _road_time(arc, params.v_V_a, arc.speed_limit_av)
        elif arc.kind == ArcKind.ROAD_MM:
            t, speed = _road_time(arc, params.v_M_a, arc.speed_limit_mm)
        elif arc.kind == ArcKind.TRANSIT:
            if arc.transit_time is None:
                raise ConfigurationError(f"transit arc {arc.key} has no in-vehicle time")
            t = arc.transit_time
        else:
            tail, head = network.switch_layers(arc)
            if (tail, head) == (Layer.WALK, Layer.TRANSIT):
                phi = arc.station_frequency or params.station_frequency(arc.head)
                if phi is None:
                    raise ConfigurationError(f"boarding arc {arc.key}: no station frequency")
                t = boarding_time(params.t_WS, phi * params.frequency_multiplier)
            elif (tail, head) == (Layer.TRANSIT, Layer.WALK):
                t = params.t_SW
            elif (tail, head) == (Layer.WALK, Layer.ROAD_AV):
                t = params.t_WV
            elif (tail, head) == (Layer.ROAD_AV, Layer.WALK):
                t = params.t_VW
            elif (tail, head) == (Layer.WALK, Layer.ROAD_MM):
                t = params.t_WM
            elif (tail, head) == (Layer.ROAD_MM, Layer.WALK):
                t = params.t_MW
            else:
                raise NetworkBuildError(f"illegal mode switch {arc.key}: {tail.value} -> {head.value}")
        if not t > 0:
            raise NetworkBuildError(f"arc {arc.key} has nonpositive travel time {t}")
        arcs.append(replace(arc, travel_time=float(t), speed=speed))
    return network.with_arcs(arcs)


def prepare_network(network: MobilityNetwork, params: NetworkParams) -> MobilityNetwork:
    """
    Network as seen by one design point: micromobility layer removed when no
    micromobility speed is operated, AV arcs filtered, travel times computed.
    """
    if params.v_M_a <= 0:
        network = network.without_layer(Layer.ROAD_MM)
    return compute_travel_times(filter_av_arcs(network, params), params)


@dataclass
class ValidationReport:
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def extend(self, other: "ValidationReport") -> None:
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)


def validate_network(network: MobilityNetwork) -> ValidationReport:
    """
    检查网络

    Strong connectivity, layer legality of every arc, road arc attributes and
    capacity >= baseline usage. Problems are collected, never raised.
    """
    report = ValidationReport()

    if not network.nodes:
        report.errors.append("network has no nodes")
        return report
    if not nx.is_strongly_connected(network.graph):
        components = list(nx.strongly_connected_components(network.graph))
        smallest = min(components, key=len)
        report.errors.append(f"network is not strongly connected: {len(components)} components "
                             f"(e.g. {sorted(smallest)})")

    for arc in network.arcs:
        tail, head = network.switch_layers(arc)
        name = f"{arc.tail} -> {arc.head}"
        if arc.kind == ArcKind.SWITCH:
            if (tail, head) not in SWITCH_LAYERS:
                report.errors.append(f"arc {name}: illegal mode switch {tail.value} -> {head.value}")
            continue
        if tail != head or LAYER_ARC_KIND[tail] != arc.kind:
            report.errors.append(f"arc {name}: kind {arc.kind.value} does not match layers "
                                 f"{tail.value} -> {head.value}")
            continue
        if arc.kind != ArcKind.TRANSIT and (arc.length is None or arc.length < 0):
            report.errors.append(f"arc {name}: missing or negative length")
        if arc.kind == ArcKind.TRANSIT and arc.transit_time is None:
            report.errors.append(f"arc {name}: transit arc without in-vehicle time")
        if arc.kind == ArcKind.ROAD_AV:
            if arc.speed_limit_av is None or arc.capacity is None:
                report.errors.append(f"arc {name}: AV arc needs a speed limit and a capacity")
            elif (arc.baseline_usage or 0.0) > arc.capacity:
                report.errors.append(f"arc {name}: baseline usage {arc.baseline_usage} exceeds "
                                     f"capacity {arc.capacity}")
        if arc.kind == ArcKind.ROAD_MM and arc.speed_limit_mm is None:
            report.errors.append(f"arc {name}: micromobility arc needs a speed limit")
        if arc.travel_time is not None and not arc.travel_time > 0:
            report.errors.append(f"arc {name}: nonpositive travel time")

    for tid, node in network.nodes.items():
        if network.graph.degree(tid) == 0:
            report.warnings.append(f"node {tid} ({node.layer.value}) has no arcs")
    return report


def validate_demand(network: MobilityNetwork, demand: DemandSet) -> ValidationReport:
    """Every request must start and end on a walking node of ``network``."""
    report = ValidationReport()
    if not demand.requests:
        report.errors.append("demand is empty")
    for request in demand:
        for end in request.od:
            if end not in network.nodes:
                report.errors.append(f"request {request.origin} -> {request.destination}: unknown node {end}")
            elif network.layer_of(end) != Layer.WALK:
                report.errors.append(f"request {request.origin} -> {request.destination}: "
                                     f"node {end} is not on the walking layer")
    return report
