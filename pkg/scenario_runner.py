#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
场景运行器

Reads a scenario configuration, validates it, solves the mobility co-design
diagram over the scenario grid and persists the fronts, the full design
point log and a manifest. Also turns a solved result directory into step-plot
coordinates.
"""

import os
import json
import time
import logging
import platform
import traceback
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd
import scipy
import networkx as nx

from codesign_kernel import GridProvenance, ParetoRecord, solve_diagram
from codesign_utils import (CodesignError, ConfigurationError, canonical_json, content_hash, ensure_dir,
                            file_bytes, format_money_per_month, format_number, get_display_path,
                            resolve_path, write_results_workbook)
from lp_solver import OPTIMAL
from mobility_dps import (DesignGrid, DesignPoint, EMISSION_PRICE_USD_PER_KG, HOURS_PER_MONTH,
                          MobilityScenario, NO_MM_ENTRY, ResourceTriple, SubwayDesign,
                          build_mobility_cdpi, catalog_query_entries, check_scenario, evaluate_design_point,
                          load_av_catalog, load_mm_catalog, load_subway_table, mm_design_entries, monetize_2d,
                          total_resources)
from network_model import (EnergyModel, NetworkParams, ValidationReport, load_demand_file,
                           load_network_file, prepare_network, validate_demand, validate_network)
from poset_core import Ordering, ProductPoint, Space, compare, pareto_min

logger = logging.getLogger("scenario_runner")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_UNREADABLE = 2

MODULE_DIR = os.path.dirname(os.path.abspath(__file__))
DATA_DIR = os.path.join(MODULE_DIR, "data")
AV_CATALOG_FILE = os.path.join(DATA_DIR, "catalogs", "av_catalogs.csv")
MM_CATALOG_FILE = os.path.join(DATA_DIR, "catalogs", "mm_catalog.csv")
SUBWAY_FILE = os.path.join(DATA_DIR, "catalogs", "subway.csv")
CATALOG_FIXTURES = ("S1", "S2-2020", "S2-2025", "S3", "S4", "S5-2020", "S5-2025")

CONFIG_KEYS = {"name", "network", "demand", "catalog", "mm_catalog", "subway_table", "grids", "params",
               "solver", "output_dir"}
GRID_KEYS = {"av_speeds_mph", "av_fleet", "mm_speeds_mph", "mm_fleet", "subway_levels"}
SOLVER_KEYS = {"backend", "jobs", "dump_lp", "feasibility_tol", "atol"}
# key -> (lower bound, lower bound allowed, upper bound)
PARAM_BOUNDS = {
    "beta": (0.0, False, 1.0),
    "walk_speed_mph": (0.0, False, None),
    "t_WS_s": (0.0, True, None),
    "t_WV_s": (0.0, True, None),
    "t_VW_s": (0.0, True, None),
    "t_WM_s": (0.0, True, None),
    "t_MW_s": (0.0, True, None),
    "t_SW_s": (0.0, True, None),
    "phi_base_per_min": (0.0, False, None),
    "gamma_g_per_kj": (0.0, True, None),
    "hours_per_month": (0.0, False, None),
    "emission_price_usd_per_kg": (0.0, True, None),
    "mm_energy_kj_per_mile": (0.0, True, None),
    "train_emissions_kg_per_year": (0.0, True, None),
    "subway_train_cost_usd": (0.0, True, None),
    "subway_life_years": (0.0, False, None),
    "subway_base_trains": (0.0, False, None),
}
TABLE_PARAMS = {"av_energy_kj_per_mile"}
# solver options that do not change results and stay out of the scenario hash
RUN_ONLY_SOLVER_KEYS = {"jobs", "dump_lp"}

DESIGN_COLUMNS = ["av_entry", "v_V_a_mph", "n_V_max", "mm_entry", "v_M_a_mph", "n_M_max", "subway_level"]
FRONT3D_COLUMNS = (["t_avg_s", "cost_usd_per_month", "co2_kg_per_month"] + DESIGN_COLUMNS
                   + ["cost_av_usd_per_month", "cost_mm_usd_per_month", "cost_subway_usd_per_month"])
FRONT2D_COLUMNS = ["t_avg_s", "cost_2d_usd_per_month", "cost_usd_per_month", "co2_kg_per_month"] + DESIGN_COLUMNS
ALL_POINTS_COLUMNS = (["grid_index"] + DESIGN_COLUMNS + ["status", "t_avg_s", "cost_usd_per_month",
                                                         "co2_kg_per_month", "cost_2d_usd_per_month",
                                                         "on_front3d", "on_front2d"])
STAIRCASE_COLUMNS = ["step", "cost_2d_usd_per_month", "t_avg_s"]
FLOAT_FORMAT = "%.6g"


def _check_keys(data: Mapping[str, Any], allowed: set, where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigurationError(f"{where}: unknown keys {unknown}")


def _check_param(key: str, value: Any) -> None:
    low, inclusive, high = PARAM_BOUNDS[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigurationError(f"params.{key} must be a number, got {value!r}")
    if value < low or (value == low and not inclusive) or (high is not None and value > high):
        raise ConfigurationError(f"params.{key}={value} is outside its bounds")


@dataclass
class ScenarioConfig:
    """
    场景配置

    Mirrors the JSON document; relative paths resolve against ``base_dir``
    (the directory of the config file).
    """
    name: str
    network: str
    demand: str
    catalog: str
    grids: Dict[str, List[Any]]
    mm_catalog: Optional[str] = None
    subway_table: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    solver: Dict[str, Any] = field(default_factory=dict)
    output_dir: Optional[str] = None
    base_dir: str = "."

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: str = ".") -> "ScenarioConfig":
        _check_keys(data, CONFIG_KEYS, "config")
        for key in ("name", "network", "demand", "catalog", "grids"):
            if key not in data:
                raise ConfigurationError(f"config: missing {key!r}")
        grids = dict(data["grids"])
        _check_keys(grids, GRID_KEYS, "grids")
        for key in ("av_speeds_mph", "av_fleet"):
            if key not in grids:
                raise ConfigurationError(f"grids: missing {key!r}")
        for key, values in grids.items():
            if not isinstance(values, list) or not values:
                raise ConfigurationError(f"grids.{key} must be a non-empty list")
        params = dict(data.get("params") or {})
        _check_keys(params, set(PARAM_BOUNDS) | TABLE_PARAMS, "params")
        for key, value in params.items():
            if key in PARAM_BOUNDS:
                _check_param(key, value)
        solver = dict(data.get("solver") or {})
        _check_keys(solver, SOLVER_KEYS, "solver")
        config = cls(name=str(data["name"]), network=data["network"], demand=data["demand"],
                     catalog=str(data["catalog"]), grids=grids, mm_catalog=data.get("mm_catalog"),
                     subway_table=data.get("subway_table"), params=params, solver=solver,
                     output_dir=data.get("output_dir"), base_dir=base_dir)
        config.check_solver()
        return config

    def check_solver(self) -> None:
        backend = self.solver.get("backend", "simplex")
        if backend not in ("simplex", "highs"):
            raise ConfigurationError(f"solver.backend must be simplex or highs, got {backend!r}")
        jobs = self.solver.get("jobs", 1)
        if not isinstance(jobs, int) or jobs < 1:
            raise ConfigurationError("solver.jobs must be a positive integer")
        for key in ("feasibility_tol", "atol"):
            if key in self.solver and not (isinstance(self.solver[key], (int, float)) and self.solver[key] >= 0):
                raise ConfigurationError(f"solver.{key} must be a nonnegative number")

    def with_overrides(self, jobs: Optional[int] = None, dump_lp: Optional[bool] = None,
                       emission_price: Optional[float] = None, hours_per_month: Optional[float] = None,
                       backend: Optional[str] = None, output_dir: Optional[str] = None) -> "ScenarioConfig":
        """CLI flags win over the file."""
        params = dict(self.params)
        solver = dict(self.solver)
        if emission_price is not None:
            _check_param("emission_price_usd_per_kg", emission_price)
            params["emission_price_usd_per_kg"] = emission_price
        if hours_per_month is not None:
            _check_param("hours_per_month", hours_per_month)
            params["hours_per_month"] = hours_per_month
        if jobs is not None:
            solver["jobs"] = jobs
        if dump_lp is not None:
            solver["dump_lp"] = dump_lp
        if backend is not None:
            solver["backend"] = backend
        config = replace(self, params=params, solver=solver,
                         output_dir=os.path.abspath(output_dir) if output_dir else self.output_dir)
        config.check_solver()
        return config

    def path(self, value: Optional[str]) -> Optional[str]:
        return resolve_path(value, self.base_dir) if value else None

    @property
    def av_catalog_path(self) -> Tuple[str, Optional[str]]:
        if self.catalog in CATALOG_FIXTURES:
            return AV_CATALOG_FILE, self.catalog
        return self.path(self.catalog), None

    @property
    def mm_catalog_path(self) -> Optional[str]:
        if self.mm_catalog == "default":
            return MM_CATALOG_FILE
        return self.path(self.mm_catalog)

    @property
    def subway_table_path(self) -> str:
        return self.path(self.subway_table) or SUBWAY_FILE

    @property
    def jobs(self) -> int:
        return int(self.solver.get("jobs", 1))

    @property
    def backend(self) -> str:
        return self.solver.get("backend", "simplex")

    @property
    def emission_price(self) -> float:
        return float(self.params.get("emission_price_usd_per_kg", EMISSION_PRICE_USD_PER_KG))

    @property
    def resolved_output_dir(self) -> str:
        return self.path(self.output_dir) or resolve_path(os.path.join("results", self.name), self.base_dir)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "network": self.network, "demand": self.demand, "catalog": self.catalog,
                "mm_catalog": self.mm_catalog, "subway_table": self.subway_table, "grids": self.grids,
                "params": self.params, "solver": self.solver, "output_dir": self.output_dir}

    def results_dict(self) -> Dict[str, Any]:
        """to_dict without the options that only shape a run (workers, LP dumps, output directory)."""
        data = self.to_dict()
        data["solver"] = {k: v for k, v in self.solver.items() if k not in RUN_ONLY_SOLVER_KEYS}
        data.pop("output_dir")
        return data

    def run_options(self) -> Dict[str, Any]:
        return {"jobs": self.jobs, "dump_lp": bool(self.solver.get("dump_lp", False)), "output_dir": self.output_dir}

    def input_files(self) -> List[str]:
        files = [self.path(self.network), self.path(self.demand), self.av_catalog_path[0], self.subway_table_path]
        if self.mm_catalog_path:
            files.append(self.mm_catalog_path)
        return files

    def scenario_hash(self) -> str:
        """
        Content hash of everything that determines the results: the config
        (without run-only options and paths) and the bytes of every input file.
        """
        data = self.results_dict()
        for key in ("network", "demand", "mm_catalog", "subway_table"):
            data.pop(key)
        if self.catalog not in CATALOG_FIXTURES:
            data.pop("catalog")
        return content_hash([canonical_json(data).encode("utf-8")] + [file_bytes(p) for p in self.input_files()])

    def network_params(self) -> NetworkParams:
        p = self.params
        defaults = NetworkParams()
        return NetworkParams(walk_speed=p.get("walk_speed_mph", defaults.walk_speed),
                             beta=p.get("beta", defaults.beta),
                             t_WS=p.get("t_WS_s", defaults.t_WS), t_WV=p.get("t_WV_s", defaults.t_WV),
                             t_VW=p.get("t_VW_s", defaults.t_VW), t_WM=p.get("t_WM_s", defaults.t_WM),
                             t_MW=p.get("t_MW_s", defaults.t_MW), t_SW=p.get("t_SW_s", defaults.t_SW),
                             phi_base=p.get("phi_base_per_min", defaults.phi_base))

    def energy_model(self) -> EnergyModel:
        p = self.params
        defaults = EnergyModel()
        return EnergyModel(av_energy_per_mile=p.get("av_energy_kj_per_mile", defaults.av_energy_per_mile),
                           mm_energy_per_mile=p.get("mm_energy_kj_per_mile", defaults.mm_energy_per_mile),
                           gamma=p.get("gamma_g_per_kj", defaults.gamma),
                           train_emissions=p.get("train_emissions_kg_per_year", defaults.train_emissions))

    def subway(self) -> SubwayDesign:
        p = self.params
        defaults = SubwayDesign()
        base = p.get("subway_base_trains", defaults.n_S_base)
        if int(base) != base:
            raise ConfigurationError("params.subway_base_trains must be a whole number")
        return SubwayDesign(level=1.0, n_S_base=int(base),
                            train_cost=p.get("subway_train_cost_usd", defaults.train_cost),
                            life=p.get("subway_life_years", defaults.life),
                            op_cost_by_level=load_subway_table(self.subway_table_path),
                            phi_base=p.get("phi_base_per_min", defaults.phi_base))

    def build_scenario(self, output_dir: Optional[str] = None) -> MobilityScenario:
        """Load every input file. OSError propagates for unreadable files."""
        network = load_network_file(self.path(self.network))
        demand = load_demand_file(self.path(self.demand))
        av_path, av_name = self.av_catalog_path
        av_catalog = load_av_catalog(av_path, av_name)
        mm_catalog = load_mm_catalog(self.mm_catalog_path) if self.mm_catalog_path else []

        g = self.grids
        mm_speeds = g.get("mm_speeds_mph") or (sorted({e.achievable_speed for e in mm_catalog}) or [0.0])
        grid = DesignGrid(av_speeds=tuple(float(v) for v in g["av_speeds_mph"]),
                          av_fleet=tuple(int(n) for n in g["av_fleet"]),
                          mm_speeds=tuple(float(v) for v in mm_speeds),
                          mm_fleet=tuple(int(n) for n in g.get("mm_fleet", [0])),
                          subway_levels=tuple(float(v) for v in g.get("subway_levels", [1.0])))
        dump_dir = os.path.join(output_dir or self.resolved_output_dir, "lp") if self.solver.get("dump_lp") else None
        return MobilityScenario(network=network, demand=demand, av_catalog=av_catalog, grid=grid,
                                mm_catalog=mm_catalog, subway=self.subway(), params=self.network_params(),
                                energy_model=self.energy_model(),
                                hours_per_month=float(self.params.get("hours_per_month", HOURS_PER_MONTH)),
                                emission_price=self.emission_price, backend=self.backend,
                                feasibility_tol=float(self.solver.get("feasibility_tol", 1e-9)),
                                atol=float(self.solver.get("atol", 1e-6)), dump_dir=dump_dir)


def load_config(path: str) -> ScenarioConfig:
    """
    读取场景配置文件 (JSON)

    Raises:
        OSError: unreadable file
        ConfigurationError: invalid document
    """
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}: not valid JSON ({e})") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a JSON object")
    return ScenarioConfig.from_dict(data, os.path.dirname(os.path.abspath(path)))


def validate_scenario(scenario: MobilityScenario) -> ValidationReport:
    """Network, demand and grid/catalog checks, without solving."""
    report = validate_network(scenario.network)
    report.extend(validate_demand(scenario.network, scenario.demand))
    try:
        check_scenario(scenario)
    except ConfigurationError as e:
        report.errors.append(str(e))
    # every grid point must yield a network with positive travel times
    if report.ok:
        context = scenario.flow_context
        for level in scenario.grid.subway_levels:
            design = scenario.subway.at_level(level)
            for v_V in scenario.grid.av_speeds:
                for v_M in scenario.grid.mm_speeds:
                    params = replace(context.params, v_V_a=v_V, v_M_a=v_M,
                                     frequency_multiplier=design.n_S / design.n_S_base)
                    try:
                        prepare_network(scenario.network, params)
                    except CodesignError as e:
                        report.errors.append(f"grid point v_V_a={v_V} v_M_a={v_M} level={level}: {e}")
                        return report
    return report


@dataclass
class ResultSet:
    scenario_hash: str
    records: List[ParetoRecord]
    front3d: pd.DataFrame
    front2d: pd.DataFrame
    all_points: pd.DataFrame
    metadata: Dict[str, Any] = field(default_factory=dict)
    # wall clock and worker count, kept out of the manifest
    runtime: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_failed(self) -> int:
        return int((self.all_points["status"] != OPTIMAL).sum())

    @property
    def all_failed(self) -> bool:
        return bool(len(self.all_points)) and self.n_failed == len(self.all_points)


def design_point_from_record(record: ParetoRecord) -> DesignPoint:
    """Design point realizing a front record (from its provenance)."""
    grid_point = record.provenance["flow"].grid_point
    av = record.provenance["av"].attributes["entry"]
    mm = record.provenance["mm"].attributes["entry"]
    return DesignPoint(av, grid_point.n_V_max, None if mm.id == NO_MM_ENTRY.id else mm,
                       grid_point.n_M_max, grid_point.subway_level, grid_point.v_V_a, grid_point.v_M_a)


def _point_status(evaluation) -> str:
    """all_points status: ``optimal`` for a solved grid point, the LP status otherwise."""
    return OPTIMAL if evaluation.ok else evaluation.status


def _resource_row(triple: Optional[ResourceTriple], price: float) -> Dict[str, Any]:
    if triple is None:
        return {"t_avg_s": np.nan, "cost_usd_per_month": np.nan, "co2_kg_per_month": np.nan,
                "cost_2d_usd_per_month": np.nan}
    return {"t_avg_s": triple.t_avg, "cost_usd_per_month": triple.C_tot, "co2_kg_per_month": triple.m_CO2_tot,
            "cost_2d_usd_per_month": monetize_2d(triple, price)[1]}


def run_scenario(scenario: MobilityScenario, scenario_hash: str = "", jobs: int = 1,
                 progress: bool = False) -> ResultSet:
    """
    求解场景

    Solves the co-design diagram, then expands the flow grid into the full
    design point log: AV entries from the catalog query antichain, every
    micromobility type at its catalog speed.
    """
    started = datetime.now()
    t0 = time.perf_counter()
    diagram = build_mobility_cdpi(scenario)
    solution = solve_diagram(diagram, {"demand": scenario.demand}, jobs=jobs, progress=progress)
    price = scenario.emission_price
    atol = diagram.sink_space.atol

    # front3d
    front_rows = []
    for record in solution.records:
        point = design_point_from_record(record)
        flow_solution = record.provenance["flow"].detail
        triple = total_resources(flow_solution, point, scenario.subway, scenario.energy_model,
                                 scenario.hours_per_month)
        if triple.as_point() != record.resources:
            logger.warning(f"front record {record.resources} re-aggregates to {triple.as_point()}")
        front_rows.append({"t_avg_s": record.resources[0], "cost_usd_per_month": record.resources[1],
                           "co2_kg_per_month": record.resources[2], **point.as_row(),
                           "cost_av_usd_per_month": triple.C_V, "cost_mm_usd_per_month": triple.C_M,
                           "cost_subway_usd_per_month": triple.C_S})
    front3d = pd.DataFrame(front_rows, columns=FRONT3D_COLUMNS)

    # front2d: minimize after projecting the 3D front
    space2d = Space(("t_avg", "cost_2d"), units=("s", "usd/month"), atol=atol)
    projected = [ProductPoint((row["t_avg_s"], row["cost_usd_per_month"] + price * row["co2_kg_per_month"]))
                 for row in front_rows]
    front2d_ac = pareto_min(projected, space2d, list(range(len(front_rows))))
    front2d = pd.DataFrame([{"t_avg_s": p[0], "cost_2d_usd_per_month": p[1],
                             **{k: front_rows[provs[0]][k] for k in FRONT2D_COLUMNS[2:]}}
                            for p, provs in front2d_ac.items()], columns=FRONT2D_COLUMNS)

    # all design points: flow grid x AV query x MM types
    av_dp, mm_dp = diagram.nodes["av"], diagram.nodes["mm"]
    rows = []
    for index, (_, evaluation) in enumerate(solution.trace["flow"]):
        provenance: GridProvenance = evaluation.provenance
        g = provenance.grid_point
        for av in catalog_query_entries(av_dp, g.v_V_a):
            for mm in mm_design_entries(mm_dp, g.v_M_a):
                point = DesignPoint(av, g.n_V_max, None if mm.id == NO_MM_ENTRY.id else mm, g.n_M_max,
                                    g.subway_level, g.v_V_a, g.v_M_a)
                triple = None
                if evaluation.ok:
                    triple = total_resources(provenance.detail, point, scenario.subway, scenario.energy_model,
                                             scenario.hours_per_month)
                row = {"grid_index": index, **point.as_row(), "status": _point_status(evaluation),
                       **_resource_row(triple, price)}
                row["on_front3d"] = triple is not None and any(
                    compare(triple.as_point(), p, atol) == Ordering.EQUAL for p in solution.antichain.points)
                row["on_front2d"] = triple is not None and any(
                    compare(ProductPoint((row["t_avg_s"], row["cost_2d_usd_per_month"])), p, atol) == Ordering.EQUAL
                    for p in front2d_ac.points)
                rows.append(row)
    all_points = pd.DataFrame(rows, columns=ALL_POINTS_COLUMNS)

    elapsed = time.perf_counter() - t0
    metadata = {"backend": scenario.backend, "grid_points": len(scenario.grid), "design_points": len(all_points),
                "failed": int((all_points["status"] != OPTIMAL).sum()), "front3d": len(front3d),
                "front2d": len(front2d)}
    runtime = {"started": started.isoformat(timespec="seconds"), "seconds": round(elapsed, 3), "jobs": jobs}
    logger.info(f"scenario solved in {elapsed:.1f}s: {len(front3d)} points on the 3D front")
    return ResultSet(scenario_hash, solution.records, front3d, front2d, all_points, metadata, runtime)


def package_versions() -> Dict[str, str]:
    return {"python": platform.python_version(), "numpy": np.__version__, "pandas": pd.__version__,
            "scipy": scipy.__version__, "networkx": nx.__version__}


def write_results(result: ResultSet, config: ScenarioConfig, output_dir: str, excel: bool = False) -> Dict[str, str]:
    """
    保存结果

    CSVs with a fixed column order and six significant digits; the manifest
    keeps full-precision front values.
    """
    ensure_dir(output_dir)
    paths = {name: os.path.join(output_dir, f"{name}.csv") for name in ("front3d", "front2d", "all_points")}
    result.front3d.to_csv(paths["front3d"], index=False, float_format=FLOAT_FORMAT)
    result.front2d.to_csv(paths["front2d"], index=False, float_format=FLOAT_FORMAT)
    result.all_points.to_csv(paths["all_points"], index=False, float_format=FLOAT_FORMAT)

    manifest = {
        "scenario": config.name,
        "scenario_hash": result.scenario_hash,
        "versions": package_versions(),
        "config": config.results_dict(),
        "front3d": [{"t_avg_s": float(r.resources[0]), "cost_usd_per_month": float(r.resources[1]),
                     "co2_kg_per_month": float(r.resources[2]), **design_point_from_record(r).as_row()}
                    for r in result.records],
        "summary": result.metadata,
    }
    paths["manifest"] = os.path.join(output_dir, "manifest.json")
    with open(paths["manifest"], "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, ensure_ascii=False)
    paths["runtime"] = os.path.join(output_dir, "runtime.json")
    with open(paths["runtime"], "w", encoding="utf-8") as f:
        json.dump({**result.runtime, **config.run_options()}, f, indent=2, ensure_ascii=False)

    if excel:
        paths["excel"] = os.path.join(output_dir, "results.xlsx")
        write_results_workbook({"front3d": result.front3d, "front2d": result.front2d,
                                "all_points": result.all_points}, paths["excel"])
    return paths


def replay_record(scenario: MobilityScenario, record: ParetoRecord) -> ResourceTriple:
    """Re-solve the flow problem of a front record and re-aggregate its resources."""
    _, triple = evaluate_design_point(scenario, design_point_from_record(record))
    if triple is None:
        raise ConfigurationError(f"front record {record.resources} no longer solves")
    return triple


def _print_report(report: ValidationReport) -> None:
    for warning in report.warnings:
        print(f"⚠️ {warning}")
    for error in report.errors:
        print(f"❌ {error}")


def _load(config_path: str, overrides: Mapping[str, Any]):
    config = load_config(config_path).with_overrides(**overrides)
    output_dir = config.resolved_output_dir
    return config, config.build_scenario(output_dir), output_dir


def cmd_validate(config_path: str, overrides: Optional[Mapping[str, Any]] = None, verbose: bool = False) -> int:
    """Validate a scenario without solving. Exit 0 ok, 1 invalid, 2 unreadable."""
    print(f"🔍 验证场景: {get_display_path(config_path)}")
    try:
        config, scenario, _ = _load(config_path, overrides or {})
        report = validate_scenario(scenario)
    except OSError as e:
        print(f"❌ 无法读取输入文件: {e}")
        return EXIT_UNREADABLE
    except CodesignError as e:
        print(f"❌ {e}")
        if verbose:
            traceback.print_exc()
        return EXIT_FAILED

    _print_report(report)
    if not report.ok:
        print(f"❌ 场景 {config.name} 未通过验证 ({len(report.errors)} errors)")
        return EXIT_FAILED
    print(f"✅ 场景 {config.name} 验证通过: {len(scenario.network.nodes)} nodes, "
          f"{len(scenario.network.arcs)} arcs, {len(scenario.demand)} requests, "
          f"{format_number(len(scenario.grid))} grid points")
    return EXIT_OK


def cmd_solve(config_path: str, overrides: Optional[Mapping[str, Any]] = None, excel: bool = False,
              progress: bool = True, verbose: bool = False) -> int:
    """Validate, solve and persist a scenario."""
    print(f"🔍 求解场景: {get_display_path(config_path)}")
    try:
        config, scenario, output_dir = _load(config_path, overrides or {})
        report = validate_scenario(scenario)
        _print_report(report)
        if not report.ok:
            print("❌ 场景未通过验证，停止求解")
            return EXIT_FAILED
        scenario_hash = config.scenario_hash()
        result = run_scenario(scenario, scenario_hash, jobs=config.jobs, progress=progress)
        paths = write_results(result, config, output_dir, excel)
    except OSError as e:
        print(f"❌ 无法读取输入文件: {e}")
        return EXIT_UNREADABLE
    except CodesignError as e:
        print(f"❌ {e}")
        if verbose:
            traceback.print_exc()
        return EXIT_FAILED

    if result.n_failed:
        print(f"⚠️ {result.n_failed} design points failed (see all_points.csv)")
    if result.all_failed:
        print("❌ 所有设计点均求解失败")
        return EXIT_FAILED
    best = result.front3d.loc[result.front3d["cost_usd_per_month"].idxmin()] if len(result.front3d) else None
    print(f"✅ {len(result.front3d)} points on the 3D front, {len(result.front2d)} on the 2D front "
          f"({result.runtime['seconds']}s)")
    if best is not None:
        print(f"   cheapest: {format_money_per_month(best['cost_usd_per_month'])} at "
              f"{format_number(best['t_avg_s'] / 60.0)} min")
    print(f"✅ 结果已保存到 {get_display_path(paths['front3d'])} 等文件")
    return EXIT_OK


def staircase(front2d: pd.DataFrame) -> pd.DataFrame:
    """
    Step-plot vertices of a 2D front: cost ascending, time strictly descending.
    Each row starts a step that holds until the next row's cost.
    """
    df = front2d.sort_values(["cost_2d_usd_per_month", "t_avg_s"], kind="stable")
    rows = []
    best_time = np.inf
    for cost, t in zip(df["cost_2d_usd_per_month"], df["t_avg_s"]):
        if t < best_time:
            rows.append({"step": len(rows), "cost_2d_usd_per_month": cost, "t_avg_s": t})
            best_time = t
    return pd.DataFrame(rows, columns=STAIRCASE_COLUMNS)


def _render_png(stairs: pd.DataFrame, all_points: Optional[pd.DataFrame], path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 5))
    if all_points is not None and len(all_points):
        feasible = all_points[all_points["status"] == OPTIMAL]
        ax.scatter(feasible["cost_2d_usd_per_month"] / 1e6, feasible["t_avg_s"] / 60.0, s=8, color="0.7",
                   label="design points")
    ax.step(stairs["cost_2d_usd_per_month"] / 1e6, stairs["t_avg_s"] / 60.0, where="post", color="C0",
            label="Pareto front")
    ax.scatter(stairs["cost_2d_usd_per_month"] / 1e6, stairs["t_avg_s"] / 60.0, color="C0", zorder=3)
    ax.set_xlabel("monetized cost [M$/month]")
    ax.set_ylabel("average travel time [min]")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cmd_plotdata(results_dir: str, png: bool = False) -> int:
    """Write staircase.csv (and optionally staircase.png) from a solved result directory."""
    front_path = os.path.join(results_dir, "front2d.csv")
    try:
        front2d = pd.read_csv(front_path)
    except (OSError, pd.errors.EmptyDataError) as e:
        print(f"❌ 无法读取 {get_display_path(front_path)}: {e}")
        return EXIT_UNREADABLE
    if front2d.empty:
        print("❌ 2D front is empty")
        return EXIT_FAILED

    stairs = staircase(front2d)
    out = os.path.join(results_dir, "staircase.csv")
    stairs.to_csv(out, index=False, float_format=FLOAT_FORMAT)
    print(f"✅ {len(stairs)} steps written to {get_display_path(out)}")
    if png:
        points_path = os.path.join(results_dir, "all_points.csv")
        all_points = pd.read_csv(points_path) if os.path.exists(points_path) else None
        _render_png(stairs, all_points, os.path.join(results_dir, "staircase.png"))
        print("✅ staircase.png rendered")
    return EXIT_OK
