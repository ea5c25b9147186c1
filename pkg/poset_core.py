#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
有序空间代数

Completed nonnegative reals and naturals (a top element adjoined), product
orders and finite antichains with Pareto minimization. Everything here is an
immutable value; the operations are pure functions.
"""

import math
import logging
from enum import Enum
from dataclasses import dataclass, field
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from codesign_utils import DimensionError

logger = logging.getLogger("poset_core")


class _Top:
    """The adjoined top element. Compares above every finite value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TOP"

    def __str__(self):
        return "⊤"

    def __reduce__(self):
        return (_Top, ())

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("poset_core.TOP")

    def __le__(self, other):
        return other is self

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self


TOP = _Top()

ExtValue = Union[float, int, _Top]

REAL = "real"
NAT = "nat"


def is_top(value) -> bool:
    return value is TOP


def ext_le(a: ExtValue, b: ExtValue, atol: float = 0.0) -> bool:
    """a ≤ b in the completed order (with an optional absolute tolerance)."""
    if b is TOP:
        return True
    if a is TOP:
        return False
    return a <= b + atol


def ext_max(a: ExtValue, b: ExtValue) -> ExtValue:
    if a is TOP or b is TOP:
        return TOP
    return a if a >= b else b


def ext_key(value: ExtValue) -> float:
    """Numeric key for sorting and vectorized dominance; TOP maps to +inf."""
    return math.inf if value is TOP else float(value)


def check_value(value: ExtValue, kind: str = REAL) -> ExtValue:
    """
    检查坐标值是否属于完备化空间

    Args:
        value: finite number or TOP
        kind: REAL or NAT

    Returns:
        the value itself (ints kept as ints for NAT)
    """
    if value is TOP:
        return value
    if isinstance(value, (bool, np.bool_)):
        raise DimensionError(f"boolean is not a poset value: {value!r}")
    if kind == NAT:
        if isinstance(value, (float, np.floating)):
            if not float(value).is_integer():
                raise DimensionError(f"natural coordinate must be integral, got {value!r}")
            value = int(value)
        value = int(value)
    else:
        value = float(value)
        if math.isnan(value) or math.isinf(value):
            raise DimensionError(f"use TOP instead of {value!r}")
    if value < 0:
        raise DimensionError(f"coordinate must be nonnegative, got {value!r}")
    return value


@dataclass(frozen=True)
class Space:
    """
    Product of completed nonnegative reals/naturals.

    names/units describe the coordinates; two spaces are compatible when their
    kinds and units agree (names are labels only).
    """
    names: Tuple[str, ...]
    kinds: Tuple[str, ...] = ()
    units: Tuple[str, ...] = ()
    atol: float = 0.0

    def __post_init__(self):
        names = tuple(self.names)
        kinds = tuple(self.kinds) if self.kinds else (REAL,) * len(names)
        units = tuple(self.units) if self.units else ("",) * len(names)
        if len(kinds) != len(names) or len(units) != len(names):
            raise DimensionError("names, kinds and units must have the same length")
        for kind in kinds:
            if kind not in (REAL, NAT):
                raise DimensionError(f"unknown coordinate kind: {kind}")
        if self.atol < 0:
            raise DimensionError("tolerance must be nonnegative")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "units", units)

    @property
    def arity(self) -> int:
        return len(self.names)

    def compatible(self, other: "Space") -> bool:
        return (isinstance(other, Space) and self.kinds == other.kinds
                and self.units == other.units)

    def product(self, other: "Space") -> "Space":
        return Space(self.names + other.names, self.kinds + other.kinds,
                     self.units + other.units, max(self.atol, other.atol))

    def subspace(self, indices: Sequence[int]) -> "Space":
        return Space(tuple(self.names[i] for i in indices),
                     tuple(self.kinds[i] for i in indices),
                     tuple(self.units[i] for i in indices), self.atol)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DimensionError(f"space has no coordinate named {name!r}: {self.names}") from None

    def point(self, *coords) -> "ProductPoint":
        if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
            coords = tuple(coords[0])
        if len(coords) != self.arity:
            raise DimensionError(f"expected {self.arity} coordinates, got {len(coords)}")
        return ProductPoint(tuple(check_value(v, k) for v, k in zip(coords, self.kinds)))

    def top(self) -> "ProductPoint":
        return ProductPoint((TOP,) * self.arity)

    def leq(self, a: "ProductPoint", b: "ProductPoint") -> bool:
        return a.leq(b, self.atol)


def real_space(*names: str, units: Sequence[str] = (), atol: float = 0.0) -> Space:
    return Space(tuple(names), (REAL,) * len(names), tuple(units), atol)


@dataclass(frozen=True, order=False)
class ProductPoint:
    """Point of a product space; comparison is coordinate-wise."""
    coords: Tuple[ExtValue, ...]

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __repr__(self):
        return "(" + ", ".join(str(c) for c in self.coords) + ")"

    def leq(self, other: "ProductPoint", atol: float = 0.0) -> bool:
        if len(self.coords) != len(other.coords):
            raise DimensionError(f"arity mismatch: {len(self.coords)} vs {len(other.coords)}")
        return all(ext_le(a, b, atol) for a, b in zip(self.coords, other.coords))

    def __le__(self, other: "ProductPoint") -> bool:
        return self.leq(other)

    def __ge__(self, other: "ProductPoint") -> bool:
        return other.leq(self)

    def sort_key(self) -> Tuple[float, ...]:
        return tuple(ext_key(c) for c in self.coords)

    def concat(self, other: "ProductPoint") -> "ProductPoint":
        return ProductPoint(self.coords + other.coords)

    def select(self, indices: Sequence[int]) -> "ProductPoint":
        return ProductPoint(tuple(self.coords[i] for i in indices))


class Ordering(Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"


def compare(p: ProductPoint, q: ProductPoint, atol: float = 0.0) -> Ordering:
    """
    比较两个点

    Args:
        p, q: points of the same space
        atol: absolute tolerance on finite coordinates

    Returns:
        Ordering of p relative to q
    """
    if len(p) != len(q):
        raise DimensionError(f"arity mismatch: {len(p)} vs {len(q)}")
    le = p.leq(q, atol)
    ge = q.leq(p, atol)
    if le and ge:
        return Ordering.EQUAL
    if le:
        return Ordering.LESS
    if ge:
        return Ordering.GREATER
    return Ordering.INCOMPARABLE


@dataclass(frozen=True)
class Antichain:
    """
    Finite antichain, points sorted lexicographically.

    provenance[i] lists every provenance that produced points[i]; the first
    one is the primary provenance, the others are ties in input order.
    """
    space: Space
    points: Tuple[ProductPoint, ...] = ()
    provenance: Tuple[Tuple[Any, ...], ...] = field(default=(), compare=False)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, point):
        return point in self.points

    @property
    def is_empty(self) -> bool:
        return not self.points

    def items(self) -> List[Tuple[ProductPoint, Tuple[Any, ...]]]:
        """(point, provenances) pairs in antichain order."""
        if not self.provenance:
            return [(p, ()) for p in self.points]
        return list(zip(self.points, self.provenance))

    def primary(self, point: ProductPoint) -> Any:
        """Primary provenance of ``point``."""
        idx = self.points.index(point)
        if not self.provenance or not self.provenance[idx]:
            return None
        return self.provenance[idx][0]

    def as_array(self) -> np.ndarray:
        return _as_array(self.points, self.space.arity)


def _as_array(points: Sequence[ProductPoint], arity: int) -> np.ndarray:
    if not points:
        return np.zeros((0, arity))
    return np.array([p.sort_key() for p in points], dtype=float)


def _check_space(space: Space, points: Sequence[ProductPoint]) -> None:
    for p in points:
        if len(p) != space.arity:
            raise DimensionError(f"point {p} does not live in a {space.arity}-dimensional space")


def pareto_min(points: Iterable[ProductPoint], space: Optional[Space] = None,
               provenance: Optional[Iterable[Any]] = None) -> Antichain:
    """
    计算Pareto最小点集

    Lexicographic sweep: a point can only be dominated by a point that sorts
    before it, so each candidate is checked against the points kept so far.

    Args:
        points: finite multiset of points of one space
        space: the space; inferred (all-real, unnamed) when omitted
        provenance: optional provenance per input point, same order

    Returns:
        Antichain of the non-dominated points, duplicates collapsed with their
        provenances merged in input order
    """
    points = list(points)
    provs = list(provenance) if provenance is not None else [None] * len(points)
    if len(provs) != len(points):
        raise DimensionError("provenance must align with points")

    if space is None:
        arity = len(points[0]) if points else 0
        space = Space(tuple(f"x{i}" for i in range(arity)))
    _check_space(space, points)

    if not points:
        return Antichain(space, (), ())

    keys = _as_array(points, space.arity)
    # stable lexicographic order, input order breaks exact ties
    order = sorted(range(len(points)), key=lambda i: (points[i].sort_key(), i))

    atol = space.atol
    kept_idx: List[int] = []
    kept_provs: List[List[Any]] = []
    kept_keys = np.zeros((0, space.arity))

    for i in order:
        k = keys[i]
        if kept_idx:
            hits = np.flatnonzero(np.all(kept_keys <= k + atol, axis=1))
            if hits.size:
                # dominated; if it is also equal to that point, keep its provenance as a tie
                for h in hits:
                    if np.all(k <= kept_keys[h] + atol):
                        if provs[i] is not None:
                            kept_provs[h].append(provs[i])
                        break
                continue
        kept_idx.append(i)
        kept_provs.append([provs[i]] if provs[i] is not None else [])
        kept_keys = np.vstack([kept_keys, k])

    has_prov = provenance is not None
    result_points = tuple(points[i] for i in kept_idx)
    result_provs = tuple(tuple(p) for p in kept_provs) if has_prov else ()
    logger.debug(f"pareto_min: {len(points)} -> {len(result_points)} points")
    return Antichain(space, result_points, result_provs)


def antichain_union_min(a: Antichain, b: Antichain) -> Antichain:
    """Pareto minimum of the union of two antichains of the same space."""
    if a.space.arity != b.space.arity or not a.space.compatible(b.space):
        raise DimensionError("antichains live in different spaces")
    a_items = a.items()
    b_items = b.items()
    points = [p for p, _ in a_items] + [p for p, _ in b_items]
    if a.provenance or b.provenance:
        # flatten tie lists back into one entry per occurrence
        flat_points, flat_provs = [], []
        for p, provs in a_items + b_items:
            if not provs:
                flat_points.append(p)
                flat_provs.append(None)
            for prov in provs:
                flat_points.append(p)
                flat_provs.append(prov)
        merged = pareto_min(flat_points, a.space, flat_provs)
        return Antichain(merged.space, merged.points,
                         tuple(tuple(x for x in provs if x is not None) for provs in merged.provenance))
    return pareto_min(points, a.space)


def dominates(a: Antichain, r: ProductPoint) -> bool:
    """True iff some point of ``a`` is ≤ ``r`` (r is feasible for ``a``)."""
    if len(r) != a.space.arity:
        raise DimensionError(f"point {r} does not live in the antichain's space")
    atol = a.space.atol
    return any(x.leq(r, atol) for x in a.points)


def front_dominates(better: Antichain, worse: Antichain) -> bool:
    """Every point of ``worse`` is at or above some point of ``better``."""
    return all(dominates(better, r) for r in worse.points)
