#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Mobility design problems

AV and micromobility vehicle catalogs, the subway fleet, the intermodal flow
problem and the cost/emission aggregation, wired into one co-design diagram
whose sinks are (average travel time, monthly cost, monthly CO2).
"""

import os
import logging
import itertools
from functools import partial
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from codesign_kernel import (CatalogDP, CoDesignDiagram, ComputedDP, Edge, Evaluation, Implementation,
                             OK, Sink, Source)
from codesign_utils import ConfigurationError, ensure_dir
from flow_lp import FlowProblem, FlowSolution, solve_flow
from lp_solver import get_solver
from network_model import (DemandSet, DemandSpace, EnergyModel, MobilityNetwork, NetworkParams,
                           prepare_network)
from poset_core import NAT, REAL, ProductPoint, Space

logger = logging.getLogger("mobility_dps")

HOURS_PER_MONTH = 730.0
EMISSION_PRICE_USD_PER_KG = 40.0
MM_TYPES = ("e-scooter", "shared bike", "moped", "four-wheeled")

AV_CATALOG_COLUMNS = ["catalog", "speed_mph", "vehicle_cost_usd", "automation_cost_usd",
                      "op_cost_usd_per_mile", "life_years"]
MM_CATALOG_COLUMNS = ["mm_type", "speed_mph", "fixed_cost_usd", "op_cost_usd_per_mile",
                      "life_years", "co2_kg_per_mile"]
SUBWAY_COLUMNS = ["level", "op_cost_usd_per_year"]


@dataclass(frozen=True)
class VehicleCatalogEntry:
    id: str
    achievable_speed: float
    fixed_cost: float
    op_cost: float
    life: float
    vehicle_cost: Optional[float] = None
    automation_cost: Optional[float] = None
    mm_type: Optional[str] = None
    emissions_per_mile: float = 0.0

    def __post_init__(self):
        if self.fixed_cost < 0 or self.op_cost < 0 or self.emissions_per_mile < 0:
            raise ConfigurationError(f"{self.id}: costs and emissions must be nonnegative")
        if not self.life > 0:
            raise ConfigurationError(f"{self.id}: life must be positive")
        if self.achievable_speed < 0:
            raise ConfigurationError(f"{self.id}: negative speed")


# stands in for "no micromobility service" in scenarios without an MM catalog
NO_MM_ENTRY = VehicleCatalogEntry("none", 0.0, 0.0, 0.0, 1.0)


def load_av_catalog(path: str, name: Optional[str] = None) -> List[VehicleCatalogEntry]:
    """
    读取AV车辆目录

    Args:
        path: CSV with one row per (catalog, speed)
        name: catalog id (S1, S2-2020, ...); may be omitted when the file
            holds a single catalog

    Returns:
        entries sorted by speed
    """
    df = pd.read_csv(path, dtype={"catalog": str})
    if list(df.columns) != AV_CATALOG_COLUMNS:
        raise ConfigurationError(f"{path}: expected columns {AV_CATALOG_COLUMNS}, got {list(df.columns)}")
    available = list(dict.fromkeys(df["catalog"]))
    if name is None:
        if len(available) != 1:
            raise ConfigurationError(f"{path}: choose one of the catalogs {available}")
        name = available[0]
    if name not in available:
        raise ConfigurationError(f"unknown AV catalog {name!r}, available: {available}")

    entries = []
    for row in df[df["catalog"] == name].sort_values("speed_mph", kind="stable").itertuples(index=False):
        entries.append(VehicleCatalogEntry(
            id=f"{name}@{row.speed_mph:g}mph",
            achievable_speed=float(row.speed_mph),
            fixed_cost=float(row.vehicle_cost_usd) + float(row.automation_cost_usd),
            op_cost=float(row.op_cost_usd_per_mile),
            life=float(row.life_years),
            vehicle_cost=float(row.vehicle_cost_usd),
            automation_cost=float(row.automation_cost_usd)))
    lives = {e.life for e in entries}
    if len(lives) != 1:
        raise ConfigurationError(f"AV catalog {name}: vehicle life must be the same for every entry, got {sorted(lives)}")
    return entries


def load_mm_catalog(path: str) -> List[VehicleCatalogEntry]:
    """Micromobility catalog: one row per vehicle type."""
    df = pd.read_csv(path, dtype={"mm_type": str})
    if list(df.columns) != MM_CATALOG_COLUMNS:
        raise ConfigurationError(f"{path}: expected columns {MM_CATALOG_COLUMNS}, got {list(df.columns)}")
    return [VehicleCatalogEntry(id=row.mm_type,
                                achievable_speed=float(row.speed_mph),
                                fixed_cost=float(row.fixed_cost_usd),
                                op_cost=float(row.op_cost_usd_per_mile),
                                life=float(row.life_years),
                                mm_type=row.mm_type,
                                emissions_per_mile=float(row.co2_kg_per_mile))
            for row in df.itertuples(index=False)]


def load_subway_table(path: str) -> Dict[float, float]:
    """Frequency level -> yearly operating cost."""
    df = pd.read_csv(path)
    if list(df.columns) != SUBWAY_COLUMNS:
        raise ConfigurationError(f"{path}: expected columns {SUBWAY_COLUMNS}, got {list(df.columns)}")
    return {float(r.level): float(r.op_cost_usd_per_year) for r in df.itertuples(index=False)}


@dataclass(frozen=True)
class SubwayDesign:
    """
    地铁车队设计

    The frequency multiplier equals n_S / n_S_base; only the levels of the
    operating-cost table are admissible.
    """
    level: float = 1.0
    n_S_base: int = 112
    train_cost: float = 14.5e6
    life: float = 30.0
    op_cost_by_level: Tuple[Tuple[float, float], ...] = ((1.0, 148e6), (1.5, 222e6), (2.0, 295e6))
    phi_base: float = 1 / 6

    def __post_init__(self):
        if isinstance(self.op_cost_by_level, dict):
            object.__setattr__(self, "op_cost_by_level", tuple(sorted(self.op_cost_by_level.items())))
        if self.level not in self.levels:
            raise ConfigurationError(f"unknown subway level {self.level}, admissible: {list(self.levels)}")
        if self.n_S_base <= 0 or self.train_cost < 0 or self.life <= 0 or self.phi_base <= 0:
            raise ConfigurationError("bad subway constants")
        acquired = self.n_S_base * (self.level - 1.0)
        if acquired < 0 or abs(acquired - round(acquired)) > 1e-9:
            raise ConfigurationError(f"level {self.level} does not give a whole number of trains")

    @property
    def levels(self) -> Tuple[float, ...]:
        return tuple(level for level, _ in self.op_cost_by_level)

    @property
    def n_S_a(self) -> int:
        return int(round(self.n_S_base * (self.level - 1.0)))

    @property
    def n_S(self) -> int:
        return self.n_S_base + self.n_S_a

    @property
    def op_cost(self) -> float:
        return dict(self.op_cost_by_level)[self.level]

    def at_level(self, level: float) -> "SubwayDesign":
        return replace(self, level=level)


def monthly_fixed_cost(fixed_cost: float, life_years: float) -> float:
    """Purchase price spread over the vehicle life, per month."""
    return fixed_cost / (life_years * 12.0)


def subway_cost(design: SubwayDesign) -> float:
    """C_S in $/month: amortized acquired trains plus operations."""
    return (design.train_cost / design.life * design.n_S_a + design.op_cost) / 12.0


@dataclass(frozen=True)
class DesignPoint:
    av_entry: VehicleCatalogEntry
    n_V_max: int
    mm_entry: Optional[VehicleCatalogEntry]
    n_M_max: int
    subway_level: float
    v_V_a: Optional[float] = None
    v_M_a: Optional[float] = None

    def __post_init__(self):
        if self.v_V_a is None:
            object.__setattr__(self, "v_V_a", self.av_entry.achievable_speed)
        if self.v_M_a is None:
            object.__setattr__(self, "v_M_a", self.mm_entry.achievable_speed if self.mm_entry else 0.0)
        if self.v_V_a > self.av_entry.achievable_speed:
            raise ConfigurationError(f"{self.av_entry.id} cannot be operated at {self.v_V_a} mph")
        if self.mm_entry is not None and self.v_M_a > self.mm_entry.achievable_speed:
            raise ConfigurationError(f"{self.mm_entry.id} cannot be operated at {self.v_M_a} mph")

    @property
    def grid_point(self) -> "FlowGridPoint":
        return FlowGridPoint(self.v_V_a, self.n_V_max, self.v_M_a, self.n_M_max, self.subway_level)

    def as_row(self) -> Dict[str, object]:
        mm = self.mm_entry or NO_MM_ENTRY
        return {"av_entry": self.av_entry.id, "v_V_a_mph": self.v_V_a, "n_V_max": self.n_V_max,
                "mm_entry": mm.id, "v_M_a_mph": self.v_M_a, "n_M_max": self.n_M_max,
                "subway_level": self.subway_level}


@dataclass(frozen=True)
class ResourceTriple:
    t_avg: float                # s
    C_tot: float                # $/month
    m_CO2_tot: float            # kg/month
    C_V: float = 0.0
    C_M: float = 0.0
    C_S: float = 0.0

    def as_point(self) -> ProductPoint:
        return ProductPoint((self.t_avg, self.C_tot, self.m_CO2_tot))


def _fleet_cost(monthly_fixed_per_vehicle: float, n_max: int, op_cost: float, mileage_per_hour: float,
                hours_per_month: float) -> float:
    return monthly_fixed_per_vehicle * n_max + op_cost * mileage_per_hour * hours_per_month


def _monthly_emissions(m_CO2_V: float, mm_kg_per_mile: float, s_M_tot: float, n_S: int,
                       train_emissions: float, hours_per_month: float) -> float:
    return m_CO2_V * hours_per_month + mm_kg_per_mile * s_M_tot * hours_per_month + train_emissions * n_S / 12.0


def fleet_costs(solution: FlowSolution, point: DesignPoint,
                hours_per_month: float = HOURS_PER_MONTH) -> Tuple[float, float]:
    """(C_V, C_M) in $/month."""
    av = point.av_entry
    mm = point.mm_entry or NO_MM_ENTRY
    C_V = _fleet_cost(monthly_fixed_cost(av.fixed_cost, av.life), point.n_V_max, av.op_cost,
                      solution.s_V_tot, hours_per_month)
    C_M = _fleet_cost(monthly_fixed_cost(mm.fixed_cost, mm.life), point.n_M_max, mm.op_cost,
                      solution.s_M_tot, hours_per_month)
    return C_V, C_M


def total_resources(solution: FlowSolution, point: DesignPoint, subway: SubwayDesign,
                    energy_model: EnergyModel, hours_per_month: float = HOURS_PER_MONTH) -> ResourceTriple:
    """
    资源汇总

    C_tot = C_V + C_M + C_S; emissions add AV, micromobility (per-mile
    table values) and the whole train fleet.
    """
    C_V, C_M = fleet_costs(solution, point, hours_per_month)
    design = subway.at_level(point.subway_level)
    C_S = subway_cost(design)
    mm = point.mm_entry or NO_MM_ENTRY
    m_CO2 = _monthly_emissions(solution.m_CO2_V, mm.emissions_per_mile, solution.s_M_tot, design.n_S,
                               energy_model.train_emissions, hours_per_month)
    return ResourceTriple(solution.t_avg, C_V + C_M + C_S, m_CO2, C_V, C_M, C_S)


def monetize_2d(r: ResourceTriple, price: float = EMISSION_PRICE_USD_PER_KG) -> Tuple[float, float]:
    """(t_avg, C_tot + price * m_CO2_tot)."""
    if price < 0:
        raise ConfigurationError("emission price must be nonnegative")
    return r.t_avg, r.C_tot + price * r.m_CO2_tot


@dataclass(frozen=True)
class FlowGridPoint:
    v_V_a: float
    n_V_max: int
    v_M_a: float
    n_M_max: int
    subway_level: float

    def label(self) -> str:
        return f"v{self.v_V_a:g}_nV{self.n_V_max}_vM{self.v_M_a:g}_nM{self.n_M_max}_L{self.subway_level:g}"


@dataclass(frozen=True)
class DesignGrid:
    av_speeds: Tuple[float, ...]
    av_fleet: Tuple[int, ...]
    mm_speeds: Tuple[float, ...] = (0.0,)
    mm_fleet: Tuple[int, ...] = (0,)
    subway_levels: Tuple[float, ...] = (1.0,)

    def __post_init__(self):
        for name in ("av_speeds", "av_fleet", "mm_speeds", "mm_fleet", "subway_levels"):
            values = tuple(getattr(self, name))
            if not values:
                raise ConfigurationError(f"grid {name} is empty")
            if any(v < 0 for v in values):
                raise ConfigurationError(f"grid {name} has negative values")
            object.__setattr__(self, name, values)

    def points(self) -> List[FlowGridPoint]:
        return [FlowGridPoint(float(v), int(n), float(vm), int(nm), float(level))
                for v, n, vm, nm, level in itertools.product(self.av_speeds, self.av_fleet, self.mm_speeds,
                                                             self.mm_fleet, self.subway_levels)]

    def __len__(self):
        return (len(self.av_speeds) * len(self.av_fleet) * len(self.mm_speeds) * len(self.mm_fleet)
                * len(self.subway_levels))


@dataclass(frozen=True)
class FlowContext:
    """Everything the flow hook needs besides the demand; picklable."""
    network: MobilityNetwork
    params: NetworkParams
    energy_model: EnergyModel
    subway: SubwayDesign
    backend: str = "simplex"
    feasibility_tol: float = 1e-9
    dump_dir: Optional[str] = None


def solve_design_flow(context: FlowContext, demand: DemandSet, grid_point: FlowGridPoint) -> FlowSolution:
    """Prepare the network for one grid point and solve its flow problem."""
    design = context.subway.at_level(grid_point.subway_level)
    params = replace(context.params, v_V_a=grid_point.v_V_a, v_M_a=grid_point.v_M_a,
                     frequency_multiplier=design.n_S / design.n_S_base)
    network = prepare_network(context.network, params)
    problem = FlowProblem(network, demand, grid_point.n_V_max, grid_point.n_M_max,
                          context.energy_model, name=grid_point.label())
    options = {"feasibility_tol": context.feasibility_tol} if context.backend == "simplex" else {}
    dump_prefix = None
    if context.dump_dir:
        ensure_dir(context.dump_dir)
        dump_prefix = os.path.join(context.dump_dir, grid_point.label())
    return solve_flow(problem, get_solver(context.backend, **options), dump_prefix)


FLOW_RESOURCES = Space(("v_V_a", "n_V_max", "v_M_a", "n_M_max", "n_S_a", "t_avg", "s_V_tot", "s_M_tot", "m_CO2_V"),
                       (REAL, NAT, REAL, NAT, NAT, REAL, REAL, REAL, REAL),
                       ("mph", "veh", "mph", "veh", "trains", "s", "mile/h", "mile/h", "kg/h"))


def flow_hook(context: FlowContext, demand: DemandSet, grid_point: FlowGridPoint) -> List[Evaluation]:
    solution = solve_design_flow(context, demand, grid_point)
    if not solution.ok:
        return [Evaluation(None, solution, solution.status)]
    n_S_a = context.subway.at_level(grid_point.subway_level).n_S_a
    r = ProductPoint((grid_point.v_V_a, grid_point.n_V_max, grid_point.v_M_a, grid_point.n_M_max, n_S_a,
                      solution.t_avg, solution.s_V_tot, solution.s_M_tot, solution.m_CO2_V))
    return [Evaluation(r, solution, OK)]


AGG_FUNCTIONALITY = Space(
    ("n_V_max", "C_V_f", "C_V_o", "n_M_max", "C_M_f_month", "C_M_o", "e_M", "s_V_tot", "s_M_tot",
     "m_CO2_V", "n_S_a", "C_S"),
    (NAT, REAL, REAL, NAT, REAL, REAL, REAL, REAL, REAL, REAL, NAT, REAL),
    ("veh", "usd/veh", "usd/mile", "veh", "usd/veh/month", "usd/mile", "kg/mile", "mile/h", "mile/h",
     "kg/h", "trains", "usd/month"))
AGG_RESOURCES = Space(("C_tot", "m_CO2_tot"), (REAL, REAL), ("usd/month", "kg/month"))


@dataclass(frozen=True)
class AggregateContext:
    av_life: float
    n_S_base: int
    train_emissions: float
    hours_per_month: float = HOURS_PER_MONTH


def aggregate_hook(context: AggregateContext, f: ProductPoint, grid_point=None) -> List[Evaluation]:
    (n_V, C_V_f, C_V_o, n_M, C_M_month, C_M_o, e_M, s_V, s_M, m_V, n_S_a, C_S) = f.coords
    H = context.hours_per_month
    C_V = _fleet_cost(monthly_fixed_cost(C_V_f, context.av_life), n_V, C_V_o, s_V, H)
    C_M = _fleet_cost(C_M_month, n_M, C_M_o, s_M, H)
    m_CO2 = _monthly_emissions(m_V, e_M, s_M, context.n_S_base + n_S_a, context.train_emissions, H)
    return [Evaluation(ProductPoint((C_V + C_M + C_S, m_CO2)), "aggregate")]


def av_vehicle_dp(entries: Sequence[VehicleCatalogEntry], name: str = "av") -> CatalogDP:
    """speed -> (fixed cost per vehicle, operating cost per mile)."""
    return CatalogDP(name,
                     Space(("speed",), (REAL,), ("mph",)),
                     Space(("C_V_f", "C_V_o"), (REAL, REAL), ("usd/veh", "usd/mile")),
                     [Implementation(e.id, ProductPoint((e.achievable_speed,)),
                                     ProductPoint((e.fixed_cost, e.op_cost)), {"entry": e})
                      for e in entries])


def mm_vehicle_dp(entries: Sequence[VehicleCatalogEntry], name: str = "mm") -> CatalogDP:
    """speed -> (amortized monthly cost per vehicle, cost per mile, CO2 per mile)."""
    return CatalogDP(name,
                     Space(("speed",), (REAL,), ("mph",)),
                     Space(("C_M_f_month", "C_M_o", "e_M"), (REAL, REAL, REAL),
                           ("usd/veh/month", "usd/mile", "kg/mile")),
                     [Implementation(e.id, ProductPoint((e.achievable_speed,)),
                                     ProductPoint((monthly_fixed_cost(e.fixed_cost, e.life), e.op_cost,
                                                   e.emissions_per_mile)), {"entry": e})
                      for e in entries])


def subway_dp(subway: SubwayDesign, name: str = "subway") -> CatalogDP:
    """acquired trains -> C_S, one implementation per frequency level."""
    impls = []
    for level in subway.levels:
        design = subway.at_level(level)
        impls.append(Implementation(f"level{level:g}", ProductPoint((design.n_S_a,)),
                                    ProductPoint((subway_cost(design),)), {"design": design}))
    return CatalogDP(name, Space(("n_S_a",), (NAT,), ("trains",)),
                     Space(("C_S",), (REAL,), ("usd/month",)), impls)


def flow_dp(context: FlowContext, grid: DesignGrid, atol: float = 1e-6, name: str = "flow") -> ComputedDP:
    """demand -> operated design and its (time, mileage, emission) outcome, one entry per grid point."""
    space = replace(FLOW_RESOURCES, atol=atol)
    return ComputedDP(name, DemandSpace(), space, partial(flow_hook, context), grid.points())


def aggregation_dp(context: AggregateContext, name: str = "agg") -> ComputedDP:
    return ComputedDP(name, AGG_FUNCTIONALITY, AGG_RESOURCES, partial(aggregate_hook, context))


@dataclass
class MobilityScenario:
    """Inputs of one mobility co-design run."""
    network: MobilityNetwork
    demand: DemandSet
    av_catalog: List[VehicleCatalogEntry]
    grid: DesignGrid
    mm_catalog: List[VehicleCatalogEntry] = field(default_factory=list)
    subway: SubwayDesign = field(default_factory=SubwayDesign)
    params: NetworkParams = field(default_factory=NetworkParams)
    energy_model: EnergyModel = field(default_factory=EnergyModel)
    hours_per_month: float = HOURS_PER_MONTH
    emission_price: float = EMISSION_PRICE_USD_PER_KG
    backend: str = "simplex"
    feasibility_tol: float = 1e-9
    atol: float = 1e-6
    dump_dir: Optional[str] = None

    @property
    def flow_context(self) -> FlowContext:
        params = replace(self.params, phi_base=self.params.phi_base if self.params.phi_base is not None
                         else self.subway.phi_base)
        return FlowContext(self.network, params, self.energy_model, self.subway, self.backend,
                           self.feasibility_tol, self.dump_dir)

    @property
    def aggregate_context(self) -> AggregateContext:
        return AggregateContext(self.av_catalog[0].life, self.subway.n_S_base,
                                self.energy_model.train_emissions, self.hours_per_month)

    @property
    def mm_entries(self) -> List[VehicleCatalogEntry]:
        return self.mm_catalog or [NO_MM_ENTRY]

    def mm_design_choices(self) -> List[Tuple[VehicleCatalogEntry, float, int]]:
        """(type, operated speed, fleet size) combinations the grid enumerates."""
        dp = mm_vehicle_dp(self.mm_entries)
        return [(entry, float(speed), int(n))
                for speed in self.grid.mm_speeds
                for entry in mm_design_entries(dp, speed)
                for n in self.grid.mm_fleet]


def check_scenario(scenario: MobilityScenario) -> None:
    """Grid/catalog consistency; raises ConfigurationError."""
    if not scenario.av_catalog:
        raise ConfigurationError("AV catalog is empty")
    if len({e.life for e in scenario.av_catalog}) != 1:
        raise ConfigurationError("AV catalog entries must share one vehicle life")
    grid = scenario.grid
    top_av = max(e.achievable_speed for e in scenario.av_catalog)
    slow = [v for v in grid.av_speeds if v > top_av]
    if slow:
        raise ConfigurationError(f"no AV in the catalog reaches {slow} mph (fastest {top_av})")
    top_mm = max(e.achievable_speed for e in scenario.mm_entries)
    slow = [v for v in grid.mm_speeds if v > top_mm]
    if slow:
        raise ConfigurationError(f"no micromobility vehicle reaches {slow} mph")
    if not scenario.mm_catalog and any(n > 0 for n in grid.mm_fleet):
        raise ConfigurationError("micromobility fleet sizes need a micromobility catalog")
    for level in grid.subway_levels:
        if level not in scenario.subway.levels:
            raise ConfigurationError(f"unknown subway level {level}, admissible: {list(scenario.subway.levels)}")


def build_mobility_cdpi(scenario: MobilityScenario) -> CoDesignDiagram:
    """
    构建交通协同设计图

    flow (demand source) feeds the AV and micromobility catalogs with the
    operated speeds, the subway catalog with the acquired trains, and the
    aggregation with fleets, mileage and emissions. Sinks: t_avg, C_tot,
    m_CO2_tot.
    """
    check_scenario(scenario)
    nodes = {
        "flow": flow_dp(scenario.flow_context, scenario.grid, scenario.atol),
        "av": av_vehicle_dp(scenario.av_catalog),
        "mm": mm_vehicle_dp(scenario.mm_entries),
        "subway": subway_dp(scenario.subway),
        "agg": aggregation_dp(scenario.aggregate_context),
    }
    wiring = [
        ("flow", "v_V_a", "av", "speed"),
        ("flow", "v_M_a", "mm", "speed"),
        ("flow", "n_S_a", "subway", "n_S_a"),
        ("flow", "n_V_max", "agg", "n_V_max"),
        ("flow", "n_M_max", "agg", "n_M_max"),
        ("flow", "s_V_tot", "agg", "s_V_tot"),
        ("flow", "s_M_tot", "agg", "s_M_tot"),
        ("flow", "m_CO2_V", "agg", "m_CO2_V"),
        ("flow", "n_S_a", "agg", "n_S_a"),
        ("av", "C_V_f", "agg", "C_V_f"),
        ("av", "C_V_o", "agg", "C_V_o"),
        ("mm", "C_M_f_month", "agg", "C_M_f_month"),
        ("mm", "C_M_o", "agg", "C_M_o"),
        ("mm", "e_M", "agg", "e_M"),
        ("subway", "C_S", "agg", "C_S"),
    ]
    diagram = CoDesignDiagram(nodes, [Edge(*w) for w in wiring],
                              [Source("demand", "flow")],
                              [Sink("t_avg", "flow", "t_avg"), Sink("C_tot", "agg", "C_tot"),
                               Sink("m_CO2_tot", "agg", "m_CO2_tot")])
    logger.info(f"mobility diagram: {len(scenario.grid)} flow grid points, {len(scenario.av_catalog)} AV entries, "
                f"{len(scenario.mm_catalog)} micromobility types, {len(scenario.subway.levels)} subway levels")
    return diagram


def evaluate_design_point(scenario: MobilityScenario, point: DesignPoint) -> Tuple[FlowSolution, Optional[ResourceTriple]]:
    """Solve the flow problem of one design point and aggregate its resources."""
    solution = solve_design_flow(scenario.flow_context, scenario.demand, point.grid_point)
    if not solution.ok:
        return solution, None
    return solution, total_resources(solution, point, scenario.subway, scenario.energy_model,
                                     scenario.hours_per_month)


def catalog_query_entries(dp: CatalogDP, speed: float) -> List[VehicleCatalogEntry]:
    """Primary catalog entries of the query antichain at ``speed``."""
    antichain = dp.query(ProductPoint((float(speed),)))
    return [provs[0].attributes["entry"] for _, provs in antichain.items()]


def mm_design_entries(dp: CatalogDP, speed: float) -> List[VehicleCatalogEntry]:
    """
    Micromobility types of the design grid at ``speed``.

    Every type whose catalog speed is ``speed``, dominated ones included.
    A speed no type is rated at falls back to the query antichain.
    """
    at_speed = [impl.attributes["entry"] for impl in dp.implementations
                if impl.provides[0] == float(speed)]
    return at_speed or catalog_query_entries(dp, speed)
