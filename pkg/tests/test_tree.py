import json
from fractions import Fraction

import numpy as np
import pytest

from treefactor.bounds import normalized_mi_bound
from treefactor.errors import BudgetExceededError
from treefactor.tree import (
    _ball_addresses,
    _intersection_size_formula,
    ball,
    ball_intersection_size,
    ball_size,
    dist,
    listing_ratio,
    origin,
    region_from_balls,
    sphere_size,
    vertex_at_distance,
)
from treefactor.words import FreeProductSignature, word_from_str


class TestDistance:
    def test_examples(self):
        u = origin(3)
        assert dist(u, u) == 0
        sig = u.address.sig
        a12 = type(u)(word_from_str("a1a2", sig))
        assert dist(u, a12) == 2
        a1 = type(u)(word_from_str("a1", sig))
        a2 = type(u)(word_from_str("a2", sig))
        assert dist(a1, a2) == 2

    def test_signature_mismatch(self):
        u3 = origin(3)
        u4 = origin(4)
        with pytest.raises(ValueError):
            dist(u3, u4)

    @pytest.mark.parametrize("d", [3, 4])
    def test_metric_on_enumerated_ball(self, d):
        vertices = ball(origin(d), 3).vertices
        n = len(vertices)
        dm = np.zeros((n, n), dtype=int)
        for i in range(n):
            for j in range(i, n):
                dm[i, j] = dm[j, i] = dist(vertices[i], vertices[j])
        assert np.all(np.diag(dm) == 0)
        assert np.all((dm > 0) | np.eye(n, dtype=bool))
        # triangle inequality, exhaustively
        assert np.all(dm[:, :, None] + dm[None, :, :] >= dm[:, None, :])

    def test_vertex_at_distance(self):
        for d in (3, 4):
            u = origin(d)
            for k in range(6):
                assert dist(u, vertex_at_distance(u, k)) == k
        # also from a non-identity start, either group form
        sig = FreeProductSignature(2, 0)
        start = type(origin(4))(word_from_str("A1", sig))
        assert dist(start, vertex_at_distance(start, 5)) == 5


class TestBalls:
    def test_sizes(self):
        assert ball_size(3, 0) == 1
        assert ball_size(3, 2) == 10
        assert ball_size(4, 3) == 53

    def test_sphere(self):
        assert sphere_size(3, 0) == 1
        assert sphere_size(3, 2) == 6

    def test_ball_r0_and_r1(self):
        assert len(ball(origin(3), 0).vertices) == 1
        assert len(ball(origin(3), 1).vertices) == 4

    @pytest.mark.parametrize("d", [3, 4, 5, 6])
    def test_closed_form_matches_enumeration(self, d):
        for radius in range(7):
            assert len(_ball_addresses(origin(d).address, radius)) == ball_size(d, radius)

    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_region_is_a_tree(self, d):
        for radius in range(6):
            region = ball(origin(d), radius)
            assert len(region.adjacency) == len(region.vertices) - 1
            # connectivity: union-find over edges
            parent = list(range(len(region.vertices)))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for a, b in region.adjacency:
                parent[find(a)] = find(b)
            assert len({find(i) for i in range(len(region.vertices))}) == 1

    def test_all_vertices_within_radius(self):
        region = ball(origin(3), 3)
        center, radius = region.centers[0]
        assert all(dist(center, v) <= radius for v in region.vertices)

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            ball(origin(3), 25, budget=1000)

    def test_json_dump(self):
        payload = json.loads(ball(origin(3), 1).to_json())
        assert payload["schema"] == 1
        assert set(payload["vertices"]) == {"e", "a1", "a2", "a3"}
        assert len(payload["edges"]) == 3


class TestIntersections:
    def test_coincident_centers(self):
        for d, radius in ((3, 2), (4, 3)):
            assert ball_intersection_size(d, radius, 0) == ball_size(d, radius)

    def test_examples(self):
        assert ball_intersection_size(3, 2, 2) == 4
        assert ball_intersection_size(3, 2, 1) == 6

    def test_disjoint_when_far(self):
        assert ball_intersection_size(3, 2, 5) == 0

    def test_formula_matches_enumeration(self):
        for d in (3, 4, 5, 6):
            for radius in range(6):
                for k in range(2 * radius + 3):
                    u = origin(d)
                    v = vertex_at_distance(u, k)
                    a = _ball_addresses(u.address, radius)
                    b = _ball_addresses(v.address, radius)
                    assert _intersection_size_formula(d, radius, k) == len(a & b), (d, radius, k)

    def test_formula_used_beyond_budget(self):
        small = ball_intersection_size(3, 4, 2)
        assert ball_intersection_size(3, 4, 2, budget=10) == small


class TestListingRatio:
    def test_rational_examples(self):
        assert listing_ratio(3, 2, 1) == Fraction(3, 5)
        assert listing_ratio(3, 2, 0) == 1
        assert listing_ratio(3, 1, 3) == 0

    def test_converges_to_bound(self):
        # gap to the distance-k bound shrinks in R and is small by R=8
        for d in (3, 4):
            for k in (1, 2, 3, 4):
                bound = Fraction(normalized_mi_bound(d, k))
                gaps = [bound - listing_ratio(d, radius, k) for radius in range(k, 9)]
                assert all(g >= 0 for g in gaps)
                assert all(b <= a for a, b in zip(gaps, gaps[1:]))
                if d == 4:
                    assert gaps[-1] < Fraction(2, 100)

    def test_approaches_two_thirds_for_neighbors(self):
        assert abs(float(listing_ratio(3, 12, 1)) - 2 / 3) < 1e-3


def test_region_union_of_two_balls():
    u = origin(3)
    v = vertex_at_distance(u, 2)
    region = region_from_balls([(u, 1), (v, 1)])
    # two radius-1 balls at distance 2 share the midpoint: 4 + 4 - 1
    assert len(region.vertices) == 7
    assert len(region.adjacency) == 6
    assert u in region and v in region
