#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
协同设计内核

Design problems as monotone maps functionality -> antichain of resources:
catalog-backed problems, computed problems over a finite implementation grid,
series/parallel composition and acyclic co-design diagrams whose solutions
carry the implementations that realize every Pareto point.
"""

import logging
import concurrent.futures
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
from tqdm import tqdm

from codesign_utils import CompositionError, DimensionError
from poset_core import (Antichain, ProductPoint, Space, dominates, ext_max,
                        pareto_min)

logger = logging.getLogger("codesign_kernel")

OK = "ok"


class OrderedSpace:
    """
    Functionality space whose elements are opaque objects ordered by ``<=``
    (e.g. demand sets). Such a functionality can only be fed by a diagram
    source, never by an edge.
    """

    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return f"OrderedSpace({self.name!r})"

    def __eq__(self, other):
        return isinstance(other, OrderedSpace) and other.name == self.name

    def __hash__(self):
        return hash(("OrderedSpace", self.name))

    def leq(self, a, b) -> bool:
        return a <= b


def _leq(space, a, b) -> bool:
    if isinstance(space, Space):
        return a.leq(b, space.atol)
    return space.leq(a, b)


def _check_functionality(space, f) -> None:
    if isinstance(space, Space):
        if not isinstance(f, ProductPoint) or len(f) != space.arity:
            raise DimensionError(f"functionality {f!r} is not a point of a {space.arity}-dimensional space")


@dataclass(frozen=True)
class Implementation:
    id: str
    provides: ProductPoint
    requires: ProductPoint
    attributes: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __repr__(self):
        return f"Implementation({self.id}: {self.provides} -> {self.requires})"


@dataclass(frozen=True)
class Evaluation:
    """One raw implementation evaluated for a functionality.

    resources is None when the implementation failed (status says why)."""
    resources: Optional[ProductPoint]
    provenance: Any
    status: str = OK

    @property
    def ok(self) -> bool:
        return self.status == OK and self.resources is not None


@dataclass(frozen=True)
class GridProvenance:
    """Provenance of a computed design problem: which grid point, which output."""
    grid_point: Any
    position: int
    detail: Any = field(default=None, compare=False)


def minimize(space: Space, evaluations: Sequence[Evaluation]) -> Antichain:
    """Pareto-minimal antichain of the successful evaluations, with provenance."""
    good = [e for e in evaluations if e.ok]
    return pareto_min([e.resources for e in good], space, [e.provenance for e in good])


class DesignProblem(ABC):
    """
    设计问题基类

    Subclasses enumerate raw implementations for a functionality
    (``evaluate``); ``query`` keeps the minimal ones.
    """

    def __init__(self, name: str, functionality_space, resource_space: Space):
        if not isinstance(resource_space, Space):
            raise DimensionError("resource spaces must be product spaces")
        self.name = name
        self.functionality_space = functionality_space
        self.resource_space = resource_space

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"

    @abstractmethod
    def evaluate(self, f, jobs: int = 1, progress: bool = False) -> List[Evaluation]:
        """All implementations providing at least ``f``, unminimized."""

    @abstractmethod
    def replay(self, f, provenance) -> ProductPoint:
        """Recompute the resources of one recorded implementation."""

    def query(self, f, jobs: int = 1, progress: bool = False) -> Antichain:
        """h_d(f): minimal antichain of resources, empty when infeasible."""
        _check_functionality(self.functionality_space, f)
        return minimize(self.resource_space, self.evaluate(f, jobs=jobs, progress=progress))

    def functionality_leq(self, a, b) -> bool:
        return _leq(self.functionality_space, a, b)


class CatalogDP(DesignProblem):
    """Design problem backed by a finite implementation catalog."""

    def __init__(self, name: str, functionality_space: Space, resource_space: Space,
                 implementations: Iterable[Implementation]):
        super().__init__(name, functionality_space, resource_space)
        self.implementations = tuple(implementations)
        seen = set()
        for impl in self.implementations:
            if len(impl.provides) != functionality_space.arity:
                raise DimensionError(f"{impl.id}: provides {impl.provides} outside the functionality space")
            if len(impl.requires) != resource_space.arity:
                raise DimensionError(f"{impl.id}: requires {impl.requires} outside the resource space")
            if impl.id in seen:
                raise CompositionError(f"duplicate implementation id {impl.id!r} in {name}")
            seen.add(impl.id)

    def evaluate(self, f, jobs: int = 1, progress: bool = False) -> List[Evaluation]:
        _check_functionality(self.functionality_space, f)
        atol = self.functionality_space.atol
        return [Evaluation(impl.requires, impl) for impl in self.implementations
                if f.leq(impl.provides, atol)]

    def replay(self, f, provenance) -> ProductPoint:
        if not f.leq(provenance.provides, self.functionality_space.atol):
            raise CompositionError(f"{provenance.id} does not provide {f}")
        return provenance.requires


Hook = Callable[[Any, Any], Iterable[Evaluation]]


def _run_hook(hook: Hook, f, grid_point) -> List[Evaluation]:
    return list(hook(f, grid_point))


class ComputedDP(DesignProblem):
    """
    Design problem whose implementations are computed.

    The hook maps (functionality, grid point) to evaluations and must be a pure
    function. With a grid, every grid point is one implementation family;
    without one the hook is called once with ``None``. For ``jobs > 1`` the
    hook has to be picklable (a module-level function or a partial of one).
    """

    def __init__(self, name: str, functionality_space, resource_space: Space,
                 hook: Hook, grid: Optional[Sequence[Any]] = None):
        super().__init__(name, functionality_space, resource_space)
        self.hook = hook
        self.grid = tuple(grid) if grid is not None else None
        if self.grid is not None and not self.grid:
            raise CompositionError(f"{name}: evaluation grid is empty")

    def _evaluate_points(self, f, jobs: int, progress: bool) -> List[List[Evaluation]]:
        points = self.grid if self.grid is not None else (None,)
        results: List[Optional[List[Evaluation]]] = [None] * len(points)

        if jobs <= 1 or len(points) == 1:
            for i, g in enumerate(tqdm(points, desc=self.name, disable=not progress)):
                results[i] = _run_hook(self.hook, f, g)
            return results

        logger.info(f"{self.name}: evaluating {len(points)} grid points with {jobs} workers")
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as executor:
            future_to_index = {executor.submit(_run_hook, self.hook, f, g): i
                               for i, g in enumerate(points)}
            with tqdm(total=len(points), desc=self.name, disable=not progress) as pbar:
                for future in concurrent.futures.as_completed(future_to_index):
                    results[future_to_index[future]] = future.result()
                    pbar.update(1)
        return results

    def evaluate(self, f, jobs: int = 1, progress: bool = False) -> List[Evaluation]:
        _check_functionality(self.functionality_space, f)
        points = self.grid if self.grid is not None else (None,)
        evaluations = []
        for g, evs in zip(points, self._evaluate_points(f, jobs, progress)):
            for pos, ev in enumerate(evs):
                if ev.resources is not None and len(ev.resources) != self.resource_space.arity:
                    raise DimensionError(f"{self.name}: hook returned {ev.resources} outside the resource space")
                evaluations.append(Evaluation(ev.resources, GridProvenance(g, pos, ev.provenance), ev.status))
        return evaluations

    def replay(self, f, provenance: GridProvenance) -> ProductPoint:
        evs = _run_hook(self.hook, f, provenance.grid_point)
        ev = evs[provenance.position]
        if not ev.ok:
            raise CompositionError(f"{self.name}: replayed implementation failed ({ev.status})")
        return ev.resources


class SeriesDP(DesignProblem):
    """dp1 then dp2: the resources of dp1 are the functionality of dp2."""

    def __init__(self, dp1: DesignProblem, dp2: DesignProblem, name: Optional[str] = None):
        if not isinstance(dp2.functionality_space, Space) or not dp1.resource_space.compatible(dp2.functionality_space) \
                or dp1.resource_space.arity != dp2.functionality_space.arity:
            raise CompositionError(f"cannot compose {dp1.name} -> {dp2.name}: "
                                   f"{dp1.resource_space.units} vs {getattr(dp2.functionality_space, 'units', None)}")
        super().__init__(name or f"({dp1.name} ; {dp2.name})", dp1.functionality_space, dp2.resource_space)
        self.dp1 = dp1
        self.dp2 = dp2

    def evaluate(self, f, jobs: int = 1, progress: bool = False) -> List[Evaluation]:
        out = []
        for ev1 in self.dp1.evaluate(f, jobs=jobs, progress=progress):
            if not ev1.ok:
                continue
            for ev2 in self.dp2.evaluate(ev1.resources, jobs=jobs):
                if ev2.ok:
                    out.append(Evaluation(ev2.resources, (ev1.provenance, ev2.provenance)))
        return out

    def replay(self, f, provenance) -> ProductPoint:
        p1, p2 = provenance
        return self.dp2.replay(self.dp1.replay(f, p1), p2)


def series(dp1: DesignProblem, dp2: DesignProblem) -> DesignProblem:
    return SeriesDP(dp1, dp2)


class ParallelDP(DesignProblem):
    """dp1 and dp2 side by side over product spaces."""

    def __init__(self, dp1: DesignProblem, dp2: DesignProblem, name: Optional[str] = None):
        if not isinstance(dp1.functionality_space, Space) or not isinstance(dp2.functionality_space, Space):
            raise CompositionError("parallel composition needs product functionality spaces")
        super().__init__(name or f"({dp1.name} | {dp2.name})",
                         dp1.functionality_space.product(dp2.functionality_space),
                         dp1.resource_space.product(dp2.resource_space))
        self.dp1 = dp1
        self.dp2 = dp2
        self._split = dp1.functionality_space.arity

    def _split_f(self, f: ProductPoint) -> Tuple[ProductPoint, ProductPoint]:
        return (ProductPoint(f.coords[:self._split]), ProductPoint(f.coords[self._split:]))

    def evaluate(self, f, jobs: int = 1, progress: bool = False) -> List[Evaluation]:
        _check_functionality(self.functionality_space, f)
        f1, f2 = self._split_f(f)
        h1 = self.dp1.query(f1, jobs=jobs)
        h2 = self.dp2.query(f2, jobs=jobs)
        out = []
        for r1, provs1 in h1.items():
            for r2, provs2 in h2.items():
                for p1 in provs1 or (None,):
                    for p2 in provs2 or (None,):
                        out.append(Evaluation(r1.concat(r2), (p1, p2)))
        return out

    def replay(self, f, provenance) -> ProductPoint:
        f1, f2 = self._split_f(f)
        p1, p2 = provenance
        return self.dp1.replay(f1, p1).concat(self.dp2.replay(f2, p2))


def parallel(dp1: DesignProblem, dp2: DesignProblem) -> DesignProblem:
    return ParallelDP(dp1, dp2)


def query(dp: DesignProblem, f) -> Antichain:
    return dp.query(f)


@dataclass(frozen=True)
class Edge:
    """Co-design constraint: resource ``src.resource`` ≤ functionality ``dst.functionality``."""
    src: str
    resource: str
    dst: str
    functionality: str


@dataclass(frozen=True)
class Source:
    """Exposed functionality. ``functionality=None`` feeds a whole opaque space."""
    name: str
    node: str
    functionality: Optional[str] = None


@dataclass(frozen=True)
class Sink:
    name: str
    node: str
    resource: str


@dataclass(frozen=True)
class ParetoRecord:
    resources: ProductPoint
    provenance: Dict[str, Any] = field(compare=False, hash=False)
    ties: Dict[str, Tuple[Any, ...]] = field(default_factory=dict, compare=False, hash=False)
    node_resources: Dict[str, ProductPoint] = field(default_factory=dict, compare=False, hash=False)


@dataclass
class DiagramSolution:
    space: Space
    records: List[ParetoRecord]
    trace: Dict[str, List[Tuple[Any, Evaluation]]] = field(default_factory=dict)

    @property
    def antichain(self) -> Antichain:
        return Antichain(self.space, tuple(r.resources for r in self.records),
                         tuple((r,) for r in self.records))


class CoDesignDiagram:
    """
    协同设计图（无环）

    Nodes are named design problems; edges wire a resource coordinate of one
    node to a functionality coordinate of another. Validated on construction:
    coordinates exist, units/kinds agree, every functionality is fed and the
    node graph is acyclic.
    """

    def __init__(self, nodes: Mapping[str, DesignProblem], edges: Sequence[Edge],
                 sources: Sequence[Source], sinks: Sequence[Sink]):
        self.nodes = dict(nodes)
        self.edges = tuple(edges)
        self.sources = tuple(sources)
        self.sinks = tuple(sinks)

        graph = nx.DiGraph()
        graph.add_nodes_from(sorted(self.nodes))
        fed: Dict[Tuple[str, Any], int] = {}

        for edge in self.edges:
            src, dst = self._node(edge.src), self._node(edge.dst)
            if not isinstance(dst.functionality_space, Space):
                raise CompositionError(f"edge into {edge.dst}: opaque functionality spaces are fed by sources only")
            r_idx = src.resource_space.index(edge.resource)
            f_idx = dst.functionality_space.index(edge.functionality)
            r_unit = (src.resource_space.kinds[r_idx], src.resource_space.units[r_idx])
            f_unit = (dst.functionality_space.kinds[f_idx], dst.functionality_space.units[f_idx])
            if r_unit != f_unit:
                raise CompositionError(f"edge {edge.src}.{edge.resource} -> {edge.dst}.{edge.functionality}: "
                                       f"{r_unit} does not match {f_unit}")
            graph.add_edge(edge.src, edge.dst)
            fed[(edge.dst, f_idx)] = fed.get((edge.dst, f_idx), 0) + 1

        names = set()
        for source in self.sources:
            dp = self._node(source.node)
            if source.name in names:
                raise CompositionError(f"duplicate source name {source.name!r}")
            names.add(source.name)
            if source.functionality is None:
                if isinstance(dp.functionality_space, Space):
                    raise CompositionError(f"source {source.name}: name a coordinate of {source.node}")
                key = (source.node, None)
            else:
                key = (source.node, dp.functionality_space.index(source.functionality))
            fed[key] = fed.get(key, 0) + 1

        for name, dp in self.nodes.items():
            space = dp.functionality_space
            if isinstance(space, Space):
                missing = [space.names[i] for i in range(space.arity) if (name, i) not in fed]
                if missing:
                    raise CompositionError(f"node {name}: functionality {missing} is not fed")
            elif fed.get((name, None), 0) != 1:
                raise CompositionError(f"node {name}: opaque functionality needs exactly one source")

        sink_names, units, kinds = [], [], []
        for sink in self.sinks:
            dp = self._node(sink.node)
            idx = dp.resource_space.index(sink.resource)
            sink_names.append(sink.name)
            units.append(dp.resource_space.units[idx])
            kinds.append(dp.resource_space.kinds[idx])
        if len(set(sink_names)) != len(sink_names):
            raise CompositionError("duplicate sink names")
        atol = max((dp.resource_space.atol for dp in self.nodes.values()), default=0.0)
        self.sink_space = Space(tuple(sink_names), tuple(kinds), tuple(units), atol)

        if not nx.is_directed_acyclic_graph(graph):
            cycle = nx.find_cycle(graph)
            raise CompositionError(f"co-design diagram has a cycle: {cycle}")
        self.order = list(nx.lexicographical_topological_sort(graph))
        self._graph = graph

    def _node(self, name: str) -> DesignProblem:
        try:
            return self.nodes[name]
        except KeyError:
            raise CompositionError(f"unknown node {name!r}") from None

    def functionality_for(self, node: str, values: Mapping[Tuple[str, int], Any],
                          f: Mapping[str, Any]):
        """Functionality of ``node`` given upstream resource values and sources."""
        dp = self.nodes[node]
        space = dp.functionality_space
        if not isinstance(space, Space):
            for source in self.sources:
                if source.node == node:
                    return f[source.name]
        coords: List[Any] = [None] * space.arity
        for source in self.sources:
            if source.node == node:
                i = space.index(source.functionality)
                coords[i] = f[source.name] if coords[i] is None else ext_max(coords[i], f[source.name])
        for edge in self.edges:
            if edge.dst == node:
                i = space.index(edge.functionality)
                v = values[(edge.src, self.nodes[edge.src].resource_space.index(edge.resource))]
                coords[i] = v if coords[i] is None else ext_max(coords[i], v)
        return space.point(tuple(coords))

    def live_after(self, step: int) -> List[Tuple[str, int]]:
        """Resource coordinates still needed once ``order[:step+1]`` is evaluated."""
        done = set(self.order[:step + 1])
        later = set(self.order[step + 1:])
        live = []
        for edge in self.edges:
            if edge.src in done and edge.dst in later:
                key = (edge.src, self.nodes[edge.src].resource_space.index(edge.resource))
                if key not in live:
                    live.append(key)
        for sink in self.sinks:
            if sink.node in done:
                key = (sink.node, self.nodes[sink.node].resource_space.index(sink.resource))
                if key not in live:
                    live.append(key)
        return live


@dataclass
class _State:
    values: Dict[Tuple[str, int], Any]
    provenance: Dict[str, Any]
    ties: Dict[str, Tuple[Any, ...]]
    node_resources: Dict[str, ProductPoint]


def _check_sources(diagram: CoDesignDiagram, f: Mapping[str, Any]) -> None:
    missing = [s.name for s in diagram.sources if s.name not in f]
    if missing:
        raise CompositionError(f"no value for sources {missing}")


def solve_diagram(diagram: CoDesignDiagram, f: Mapping[str, Any], jobs: int = 1,
                  progress: bool = False, prune: bool = True) -> DiagramSolution:
    """
    求解协同设计图

    Nodes are evaluated in topological order; partial designs are extended
    with every point of the node's antichain. After each node, partial designs
    are reduced to the Pareto-minimal ones on the coordinates still needed
    downstream (valid because every node is monotone). The result is the
    Pareto front of the sink space with the provenance of every point.

    Args:
        diagram: validated acyclic diagram
        f: value per source name (numbers for product coordinates)
        jobs: worker processes for computed nodes
        progress: show tqdm bars
        prune: drop dominated partial designs between nodes

    Returns:
        DiagramSolution with records in antichain order and the raw
        evaluation trace of every node
    """
    _check_sources(diagram, f)
    trace: Dict[str, List[Tuple[Any, Evaluation]]] = {}
    states = [_State({}, {}, {}, {})]

    for step, node in enumerate(diagram.order):
        dp = diagram.nodes[node]
        cache: Dict[Any, Antichain] = {}
        keys: List[Any] = []
        functionalities: List[Any] = []
        node_trace: List[Tuple[Any, Evaluation]] = []

        for state in states:
            fv = diagram.functionality_for(node, state.values, f)
            keys.append(fv)
            if fv in cache:
                continue
            evaluations = dp.evaluate(fv, jobs=jobs, progress=progress)
            node_trace.extend((fv, ev) for ev in evaluations)
            cache[fv] = minimize(dp.resource_space, evaluations)
            functionalities.append(fv)
        trace[node] = node_trace

        extended: List[_State] = []
        for state, fv in zip(states, keys):
            for r, provs in cache[fv].items():
                values = dict(state.values)
                for i, v in enumerate(r.coords):
                    values[(node, i)] = v
                extended.append(_State(values,
                                       {**state.provenance, node: provs[0] if provs else None},
                                       {**state.ties, node: tuple(provs[1:])} if len(provs) > 1 else dict(state.ties),
                                       {**state.node_resources, node: r}))
        logger.debug(f"{node}: {len(functionalities)} distinct functionalities, {len(extended)} partial designs")

        if not extended:
            logger.info(f"diagram infeasible at node {node}")
            return DiagramSolution(diagram.sink_space, [], trace)

        if prune:
            live = diagram.live_after(step)
            if live:
                live_space = Space(tuple(f"{n}.{i}" for n, i in live))
                reduced = pareto_min([ProductPoint(tuple(s.values[k] for k in live)) for s in extended],
                                     live_space, list(range(len(extended))))
                extended = [extended[provs[0]] for provs in reduced.provenance]
        states = extended

    sink_keys = [(s.node, diagram.nodes[s.node].resource_space.index(s.resource)) for s in diagram.sinks]
    points = [ProductPoint(tuple(s.values[k] for k in sink_keys)) for s in states]
    front = pareto_min(points, diagram.sink_space, list(range(len(states))))
    records = []
    for point, provs in front.items():
        state = states[provs[0]]
        records.append(ParetoRecord(point, dict(state.provenance), dict(state.ties), dict(state.node_resources)))
    logger.info(f"diagram solved: {len(records)} Pareto points")
    return DiagramSolution(diagram.sink_space, records, trace)


def replay_record(diagram: CoDesignDiagram, record: ParetoRecord, f: Mapping[str, Any]) -> ProductPoint:
    """Re-evaluate the recorded implementations and return the sink point."""
    _check_sources(diagram, f)
    values: Dict[Tuple[str, int], Any] = {}
    for node in diagram.order:
        fv = diagram.functionality_for(node, values, f)
        r = diagram.nodes[node].replay(fv, record.provenance[node])
        for i, v in enumerate(r.coords):
            values[(node, i)] = v
    return ProductPoint(tuple(values[(s.node, diagram.nodes[s.node].resource_space.index(s.resource))]
                              for s in diagram.sinks))


@dataclass
class MonotonicityReport:
    checked: int = 0
    skipped: int = 0
    violations: List[Tuple[Any, Any, ProductPoint]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_monotone(dp: DesignProblem, sample_pairs: Iterable[Tuple[Any, Any]]) -> MonotonicityReport:
    """
    单调性检查

    For each pair f1 ≤ f2 every resource point of h(f2) must be at or above
    some point of h(f1). Pairs that are not ordered are skipped.
    """
    report = MonotonicityReport()
    for f1, f2 in sample_pairs:
        if not dp.functionality_leq(f1, f2):
            report.skipped += 1
            continue
        h1 = dp.query(f1)
        h2 = dp.query(f2)
        report.checked += 1
        for r2 in h2.points:
            if not dominates(h1, r2):
                report.violations.append((f1, f2, r2))
    if report.violations:
        logger.warning(f"{dp.name}: {len(report.violations)} monotonicity violations")
    return report
