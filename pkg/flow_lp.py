#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
多商品流线性规划

Node-arc formulation of the intermodal routing problem: one commodity per
travel request, AV and micromobility rebalancing flows, threshold congestion
on AV arcs and fleet-size budgets. Times are converted to hours at build.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import scipy.sparse as sp

from codesign_utils import NetworkBuildError, ConfigurationError
from lp_solver import (OPTIMAL, LinearProgram, LPResult, LPSolver, DenseRevisedSimplex,
                       write_lp_file)
from network_model import (ArcKind, DemandSet, EnergyModel, Layer, MobilityNetwork,
                           SECONDS_PER_HOUR, arc_emissions_kg)

logger = logging.getLogger("flow_lp")

STAGE2_RELATIVE_SLACK = 1e-12


@dataclass(frozen=True)
class FlowProblem:
    network: MobilityNetwork
    demand: DemandSet
    n_V_max: float
    n_M_max: float
    energy_model: EnergyModel = field(default_factory=EnergyModel)
    name: str = "flow"

    def __post_init__(self):
        if self.n_V_max < 0 or self.n_M_max < 0:
            raise ConfigurationError("fleet budgets must be nonnegative")


@dataclass
class FlowLayout:
    """Column/row bookkeeping of a built flow LP."""
    arcs: List
    av_arcs: List[int]          # indices into arcs
    mm_arcs: List[int]
    n_requests: int

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    def flow_col(self, m: int, a: int) -> int:
        return m * self.n_arcs + a

    def av_rebalance_col(self, k: int) -> int:
        return self.n_requests * self.n_arcs + k

    def mm_rebalance_col(self, k: int) -> int:
        return self.n_requests * self.n_arcs + len(self.av_arcs) + k

    @property
    def n_cols(self) -> int:
        return self.n_requests * self.n_arcs + len(self.av_arcs) + len(self.mm_arcs)


@dataclass
class FlowSolution:
    status: str
    flows: Optional[np.ndarray] = None              # (requests, arcs), customers/hour
    rebalancing_av: Optional[np.ndarray] = None     # per AV arc, vehicles/hour
    rebalancing_mm: Optional[np.ndarray] = None
    t_avg: Optional[float] = None                   # seconds
    s_V_tot: float = 0.0                            # miles/hour
    s_M_tot: float = 0.0
    m_CO2_V: float = 0.0                            # kg/hour
    m_CO2_M: float = 0.0
    n_V_used: float = 0.0
    n_M_used: float = 0.0
    iterations: int = 0
    tie_broken: bool = False
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _check_demand(problem: FlowProblem) -> None:
    if not problem.demand.requests:
        raise NetworkBuildError("demand is empty")
    for request in problem.demand:
        for end in request.od:
            if end not in problem.network.nodes or problem.network.layer_of(end) != Layer.WALK:
                raise NetworkBuildError(f"request {request.origin} -> {request.destination}: "
                                        f"{end} is not a walking node of the network")


def build_lp(problem: FlowProblem):
    """
    构建流量线性规划

    Columns: per-request flow on every arc, then AV rebalancing on AV arcs,
    then micromobility rebalancing on micromobility arcs.
    Equality rows: conservation per (request, node), vehicle balance per AV
    node and per micromobility node. Inequality rows: one congestion row per
    AV arc, then the AV and micromobility fleet rows.

    Returns:
        (LinearProgram, FlowLayout); the objective is the average travel
        time in hours
    """
    network = problem.network
    if not network.has_travel_times:
        raise NetworkBuildError("compute travel times before building the LP")
    _check_demand(problem)

    arcs = list(network.arcs)
    layout = FlowLayout(arcs,
                        [a for a, arc in enumerate(arcs) if arc.kind == ArcKind.ROAD_AV],
                        [a for a, arc in enumerate(arcs) if arc.kind == ArcKind.ROAD_MM],
                        len(problem.demand))
    node_ids = list(network.nodes)
    node_index = {n: i for i, n in enumerate(node_ids)}
    hours = np.array([arc.travel_time_hours for arc in arcs])
    requests = problem.demand.requests
    alpha_tot = problem.demand.total_rate

    eq_rows, eq_cols, eq_vals, b_eq, eq_names = [], [], [], [], []
    row = 0
    for m, request in enumerate(requests):
        for v in node_ids:
            eq_names.append(f"cons_r{m}_{v}")
            b_eq.append(request.rate if v == request.origin else
                        -request.rate if v == request.destination else 0.0)
        for a, arc in enumerate(arcs):
            col = layout.flow_col(m, a)
            eq_rows += [row + node_index[arc.tail], row + node_index[arc.head]]
            eq_cols += [col, col]
            eq_vals += [1.0, -1.0]
        row += len(node_ids)

    def balance_rows(layer: Layer, arc_ids: List[int], rebalance_col, prefix: str):
        nonlocal row
        layer_nodes = network.nodes_in(layer)
        local = {n: row + i for i, n in enumerate(layer_nodes)}
        for n in layer_nodes:
            eq_names.append(f"{prefix}_{n}")
            b_eq.append(0.0)
        for k, a in enumerate(arc_ids):
            arc = arcs[a]
            cols = [layout.flow_col(m, a) for m in range(len(requests))] + [rebalance_col(k)]
            for col in cols:
                eq_rows.extend((local[arc.head], local[arc.tail]))
                eq_cols.extend((col, col))
                eq_vals.extend((1.0, -1.0))
        row += len(layer_nodes)

    balance_rows(Layer.ROAD_AV, layout.av_arcs, layout.av_rebalance_col, "bal_av")
    balance_rows(Layer.ROAD_MM, layout.mm_arcs, layout.mm_rebalance_col, "bal_mm")

    ub_rows, ub_cols, ub_vals, b_ub, ub_names = [], [], [], [], []
    for k, a in enumerate(layout.av_arcs):
        arc = arcs[a]
        if arc.capacity is None:
            raise ConfigurationError(f"AV arc {arc.key} has no capacity")
        for m in range(len(requests)):
            ub_rows.append(k)
            ub_cols.append(layout.flow_col(m, a))
            ub_vals.append(1.0)
        ub_rows.append(k)
        ub_cols.append(layout.av_rebalance_col(k))
        ub_vals.append(1.0)
        b_ub.append(arc.capacity - (arc.baseline_usage or 0.0))
        ub_names.append(f"cap_{arc.tail}_{arc.head}")

    for fleet_row, (arc_ids, rebalance_col, budget, label) in enumerate(
            ((layout.av_arcs, layout.av_rebalance_col, problem.n_V_max, "fleet_av"),
             (layout.mm_arcs, layout.mm_rebalance_col, problem.n_M_max, "fleet_mm"))):
        r = len(layout.av_arcs) + fleet_row
        for k, a in enumerate(arc_ids):
            for m in range(len(requests)):
                ub_rows.append(r)
                ub_cols.append(layout.flow_col(m, a))
                ub_vals.append(hours[a])
            ub_rows.append(r)
            ub_cols.append(rebalance_col(k))
            ub_vals.append(hours[a])
        b_ub.append(float(budget))
        ub_names.append(label)

    n = layout.n_cols
    c = np.zeros(n)
    for m in range(len(requests)):
        c[m * layout.n_arcs:(m + 1) * layout.n_arcs] = hours / alpha_tot

    A_eq = sp.csr_matrix((eq_vals, (eq_rows, eq_cols)), shape=(len(b_eq), n))
    A_ub = sp.csr_matrix((ub_vals, (ub_rows, ub_cols)), shape=(len(b_ub), n))

    col_names = [f"f_r{m}_{arc.tail}_{arc.head}" for m in range(len(requests)) for arc in arcs]
    col_names += [f"f0v_{arcs[a].tail}_{arcs[a].head}" for a in layout.av_arcs]
    col_names += [f"f0m_{arcs[a].tail}_{arcs[a].head}" for a in layout.mm_arcs]

    lp = LinearProgram(c, A_ub, np.array(b_ub), A_eq, np.array(b_eq), None,
                       col_names, ub_names, eq_names, problem.name)
    logger.debug(f"{problem.name}: {lp.n_rows} rows, {lp.n_vars} columns")
    return lp, layout


def mileage_objective(layout: FlowLayout) -> np.ndarray:
    """Vehicle-miles per hour (AV plus micromobility, loaded plus rebalancing)."""
    c = np.zeros(layout.n_cols)
    for k, a in enumerate(layout.av_arcs):
        length = layout.arcs[a].length
        for m in range(layout.n_requests):
            c[layout.flow_col(m, a)] = length
        c[layout.av_rebalance_col(k)] = length
    for k, a in enumerate(layout.mm_arcs):
        length = layout.arcs[a].length
        for m in range(layout.n_requests):
            c[layout.flow_col(m, a)] = length
        c[layout.mm_rebalance_col(k)] = length
    return c


def _solution_from(problem: FlowProblem, layout: FlowLayout, x: np.ndarray, iterations: int,
                   tie_broken: bool) -> FlowSolution:
    arcs = layout.arcs
    flows = x[:layout.n_requests * layout.n_arcs].reshape(layout.n_requests, layout.n_arcs)
    reb_av = x[layout.n_requests * layout.n_arcs:layout.n_requests * layout.n_arcs + len(layout.av_arcs)]
    reb_mm = x[layout.n_requests * layout.n_arcs + len(layout.av_arcs):]
    customer = flows.sum(axis=0)
    hours = np.array([arc.travel_time_hours for arc in arcs])

    av_total = np.array([customer[a] + reb_av[k] for k, a in enumerate(layout.av_arcs)])
    mm_total = np.array([customer[a] + reb_mm[k] for k, a in enumerate(layout.mm_arcs)])
    av_len = np.array([arcs[a].length for a in layout.av_arcs])
    mm_len = np.array([arcs[a].length for a in layout.mm_arcs])
    energy = problem.energy_model

    return FlowSolution(
        status=OPTIMAL,
        flows=flows,
        rebalancing_av=reb_av,
        rebalancing_mm=reb_mm,
        t_avg=float(hours @ customer / problem.demand.total_rate * SECONDS_PER_HOUR),
        s_V_tot=float(av_total @ av_len) if av_total.size else 0.0,
        s_M_tot=float(mm_total @ mm_len) if mm_total.size else 0.0,
        m_CO2_V=float(sum(arc_emissions_kg(arcs[a], energy) * av_total[k]
                          for k, a in enumerate(layout.av_arcs))),
        m_CO2_M=float(sum(arc_emissions_kg(arcs[a], energy) * mm_total[k]
                          for k, a in enumerate(layout.mm_arcs))),
        n_V_used=float(av_total @ hours[layout.av_arcs]) if av_total.size else 0.0,
        n_M_used=float(mm_total @ hours[layout.mm_arcs]) if mm_total.size else 0.0,
        iterations=iterations,
        tie_broken=tie_broken,
    )


def solve_flow(problem: FlowProblem, solver: Optional[LPSolver] = None,
               dump_prefix: Optional[str] = None) -> FlowSolution:
    """
    两阶段求解

    Stage 1 minimizes the average travel time; stage 2 minimizes vehicle
    mileage with the stage-1 objective held at its optimum (relative slack
    1e-12). A stage-2 failure falls back to the stage-1 solution.

    Args:
        problem: flow problem on a prepared network
        solver: LP backend, embedded simplex by default
        dump_prefix: when set, both stages are written as ``<prefix>_stage{1,2}.lp``

    Returns:
        FlowSolution; status carries the LP status when stage 1 fails
    """
    solver = solver or DenseRevisedSimplex()
    lp, layout = build_lp(problem)
    if dump_prefix:
        write_lp_file(lp, f"{dump_prefix}_stage1.lp")

    first: LPResult = solver.solve(lp)
    if not first.ok:
        logger.warning(f"{problem.name}: stage 1 {first.status} {first.message}")
        return FlowSolution(first.status, iterations=first.iterations, message=first.message)

    t_star = first.objective
    slack = STAGE2_RELATIVE_SLACK * abs(t_star)
    stage2 = lp.with_ub_row(lp.c, t_star + slack, "time_level").with_objective(mileage_objective(layout))
    if dump_prefix:
        write_lp_file(stage2, f"{dump_prefix}_stage2.lp")
    second = solver.solve(stage2)
    iterations = first.iterations + second.iterations
    if not second.ok:
        logger.warning(f"{problem.name}: stage 2 {second.status}, keeping the stage 1 flows")
        return _solution_from(problem, layout, first.x, iterations, tie_broken=False)
    return _solution_from(problem, layout, second.x, iterations, tie_broken=True)


def flow_residuals(problem: FlowProblem, solution: FlowSolution) -> Dict[str, float]:
    """
    Largest violation of each constraint family, recomputed from the flows.

    Keys: conservation, vehicle_balance, congestion, fleet, nonnegativity.
    """
    network = problem.network
    arcs = list(network.arcs)
    flows = solution.flows
    customer = flows.sum(axis=0)
    out = {"conservation": 0.0, "vehicle_balance": 0.0, "congestion": 0.0, "fleet": 0.0,
           "nonnegativity": float(max(0.0, -flows.min(initial=0.0),
                                      -solution.rebalancing_av.min(initial=0.0),
                                      -solution.rebalancing_mm.min(initial=0.0)))}

    for m, request in enumerate(problem.demand.requests):
        net = {n: 0.0 for n in network.nodes}
        for a, arc in enumerate(arcs):
            net[arc.tail] += flows[m, a]
            net[arc.head] -= flows[m, a]
        for n, value in net.items():
            target = request.rate if n == request.origin else -request.rate if n == request.destination else 0.0
            out["conservation"] = max(out["conservation"], abs(value - target))

    for kind, rebalancing, layer, budget in ((ArcKind.ROAD_AV, solution.rebalancing_av, Layer.ROAD_AV, problem.n_V_max),
                                             (ArcKind.ROAD_MM, solution.rebalancing_mm, Layer.ROAD_MM, problem.n_M_max)):
        ids = [a for a, arc in enumerate(arcs) if arc.kind == kind]
        net = {n: 0.0 for n in network.nodes_in(layer)}
        used = 0.0
        for k, a in enumerate(ids):
            total = customer[a] + rebalancing[k]
            net[arcs[a].head] += total
            net[arcs[a].tail] -= total
            used += total * arcs[a].travel_time_hours
            if kind == ArcKind.ROAD_AV:
                excess = total + (arcs[a].baseline_usage or 0.0) - arcs[a].capacity
                out["congestion"] = max(out["congestion"], excess)
        if net:
            out["vehicle_balance"] = max(out["vehicle_balance"], max(abs(v) for v in net.values()))
        out["fleet"] = max(out["fleet"], used - budget)
    return out
