import itertools

import numpy as np
import pytest

from codesign_utils import DimensionError
from poset_core import (NAT, REAL, TOP, Antichain, Ordering, ProductPoint, Space, antichain_union_min,
                        check_value, compare, dominates, ext_le, ext_max, front_dominates, pareto_min,
                        real_space)

P = lambda *c: ProductPoint(tuple(c))  # noqa: E731


def brute_force_min(points):
    """O(n^2) dominance filter, duplicates collapsed."""
    kept = []
    for p in points:
        if any(q.leq(p) and not p.leq(q) for q in points):
            continue
        if p not in kept:
            kept.append(p)
    return set(kept)


def brute_force_min_array(values):
    """Vectorized O(n^2) dominance filter over the rows of ``values``."""
    leq = (values[:, None, :] <= values[None, :, :]).all(axis=2)
    dominated = (leq & ~leq.T).any(axis=0)
    return {tuple(float(v) for v in row) for row in values[~dominated]}


class TestTop:
    def test_top_is_above_everything(self):
        assert ext_le(1e300, TOP)
        assert ext_le(TOP, TOP)
        assert not ext_le(TOP, 5.0)
        assert ext_max(3.0, TOP) is TOP
        assert ext_max(3.0, 4.0) == 4.0

    def test_top_only_below_itself(self):
        assert TOP <= TOP
        assert not TOP <= 7
        assert TOP >= 7

    def test_check_value(self):
        assert check_value(TOP) is TOP
        assert check_value(3.0, NAT) == 3
        with pytest.raises(DimensionError):
            check_value(-1.0)
        with pytest.raises(DimensionError):
            check_value(2.5, NAT)
        with pytest.raises(DimensionError):
            check_value(float("inf"), REAL)
        with pytest.raises(DimensionError):
            check_value(float("nan"), REAL)


class TestCompare:
    @pytest.mark.parametrize("p, q, expected", [
        (P(1, 2), P(2, 2), Ordering.LESS),
        (P(1, 2), P(2, 1), Ordering.INCOMPARABLE),
        (P(3, TOP), P(3, 5), Ordering.GREATER),
        (P(3, 5), P(3, 5), Ordering.EQUAL),
        (P(TOP, TOP), P(TOP, TOP), Ordering.EQUAL),
    ])
    def test_examples(self, p, q, expected):
        assert compare(p, q) == expected

    def test_arity_mismatch(self):
        with pytest.raises(DimensionError):
            compare(P(1, 2), P(1, 2, 3))

    def test_partial_order_on_random_triples(self, rng):
        values = [0.0, 1.0, 2.0, TOP]
        for _ in range(300):
            a, b, c = (P(*(values[i] for i in rng.integers(0, 4, size=2))) for _ in range(3))
            assert a.leq(a)
            if a.leq(b) and b.leq(a):
                assert a == b
            if a.leq(b) and b.leq(c):
                assert a.leq(c)

    def test_tolerance(self):
        assert compare(P(1.0), P(1.0 + 1e-9), atol=1e-6) == Ordering.EQUAL
        assert compare(P(1.0), P(1.0 + 1e-9)) == Ordering.LESS


class TestSpace:
    def test_point_checks_arity_and_kind(self):
        space = Space(("n", "c"), (NAT, REAL), ("veh", "usd"))
        assert space.point(3, 2.5) == P(3, 2.5)
        with pytest.raises(DimensionError):
            space.point(3)
        with pytest.raises(DimensionError):
            space.point(2.5, 1.0)

    def test_product_and_compatibility(self):
        a = real_space("t", units=("s",))
        b = Space(("n",), (NAT,), ("veh",))
        ab = a.product(b)
        assert ab.names == ("t", "n")
        assert ab.kinds == (REAL, NAT)
        assert not a.compatible(b)
        assert a.compatible(real_space("other", units=("s",)))
        assert ab.subspace([1]).compatible(b)

    def test_unknown_coordinate(self):
        with pytest.raises(DimensionError):
            real_space("x").index("y")


class TestParetoMin:
    def test_examples(self):
        result = pareto_min([P(1, 2), P(2, 1), P(2, 2)])
        assert set(result.points) == {P(1, 2), P(2, 1)}
        assert pareto_min([]).is_empty

    def test_sorted_output(self):
        result = pareto_min([P(3, 0), P(0, 3), P(1, 1)])
        assert result.points == (P(0, 3), P(1, 1), P(3, 0))

    def test_matches_brute_force_on_random_points(self, rng):
        points = [P(*row) for row in rng.random((200, 3))]
        result = pareto_min(points, real_space("a", "b", "c"))
        assert set(result.points) == brute_force_min(points)

    def test_random_sets_match_brute_force(self, rng):
        for trial in range(1000):
            dims = int(rng.integers(2, 5))
            n = int(rng.integers(1, 201))
            if trial % 2:
                values = rng.integers(0, 8, size=(n, dims)).astype(float)
            else:
                values = rng.random((n, dims))
            result = pareto_min([P(*row) for row in values], real_space(*"abcd"[:dims]))
            assert {p.coords for p in result.points} == brute_force_min_array(values), trial

    def test_pairwise_incomparable_and_idempotent(self, rng):
        points = [P(*row) for row in rng.integers(0, 6, size=(80, 3)).astype(float)]
        space = real_space("a", "b", "c")
        result = pareto_min(points, space)
        for p, q in itertools.combinations(result.points, 2):
            assert compare(p, q) == Ordering.INCOMPARABLE
        assert pareto_min(result.points, space) == result
        for p in points:
            assert dominates(result, p)

    def test_top_coordinates(self):
        result = pareto_min([P(TOP, 1), P(2, 1), P(1, TOP)])
        assert set(result.points) == {P(2, 1), P(1, TOP)}

    def test_ties_keep_every_provenance(self):
        result = pareto_min([P(1, 1), P(2, 0), P(1, 1)], provenance=["a", "b", "c"])
        assert result.primary(P(1, 1)) == "a"
        assert dict(result.items())[P(1, 1)] == ("a", "c")
        assert result.primary(P(2, 0)) == "b"

    def test_dominated_provenance_dropped(self):
        result = pareto_min([P(2, 2), P(1, 1)], provenance=["worse", "better"])
        assert result.items() == [(P(1, 1), ("better",))]

    def test_tolerance_merges_near_duplicates(self):
        space = Space(("x", "y"), atol=1e-6)
        result = pareto_min([P(1.0, 1.0), P(1.0 + 1e-9, 1.0)], space, ["first", "second"])
        assert len(result) == 1
        assert dict(result.items())[P(1.0, 1.0)] == ("first", "second")

    def test_wrong_arity(self):
        with pytest.raises(DimensionError):
            pareto_min([P(1, 2), P(1, 2, 3)], real_space("a", "b"))


class TestUnionAndDominance:
    def test_union_examples(self):
        space = real_space("a", "b")
        a = pareto_min([P(1, 2)], space)
        assert set(antichain_union_min(a, pareto_min([P(2, 1)], space)).points) == {P(1, 2), P(2, 1)}
        assert antichain_union_min(pareto_min([P(1, 1)], space), pareto_min([P(2, 2)], space)).points == (P(1, 1),)

    def test_union_matches_brute_force(self, rng):
        space = real_space("a", "b", "c")
        for _ in range(20):
            xs = [P(*row) for row in rng.random((rng.integers(0, 50), 3))]
            ys = [P(*row) for row in rng.random((rng.integers(0, 50), 3))]
            union = antichain_union_min(pareto_min(xs, space), pareto_min(ys, space))
            assert set(union.points) == brute_force_min(xs + ys)

    def test_union_space_mismatch(self):
        with pytest.raises(DimensionError):
            antichain_union_min(pareto_min([P(1, 2)], real_space("a", "b")),
                                pareto_min([P(1, 2, 3)], real_space("a", "b", "c")))

    def test_dominates_examples(self):
        a = pareto_min([P(1, 2), P(2, 1)])
        assert dominates(a, P(2, 2))
        assert not dominates(a, P(0.5, 0.5))
        assert not dominates(Antichain(real_space("a", "b")), P(5, 5))
        with pytest.raises(DimensionError):
            dominates(a, P(1, 2, 3))

    def test_dominates_matches_input_set(self, rng):
        points = [P(*row) for row in rng.random((60, 2))]
        front = pareto_min(points)
        for r in (P(*row) for row in rng.random((100, 2))):
            assert dominates(front, r) == any(s.leq(r) for s in points)

    def test_front_dominates(self):
        good = pareto_min([P(1, 1)])
        bad = pareto_min([P(1, 2), P(2, 1)])
        assert front_dominates(good, bad)
        assert not front_dominates(bad, good)
        assert front_dominates(good, Antichain(good.space))

    def test_as_array_maps_top_to_inf(self):
        arr = pareto_min([P(1, TOP)]).as_array()
        assert arr.shape == (1, 2)
        assert np.isinf(arr[0, 1])
