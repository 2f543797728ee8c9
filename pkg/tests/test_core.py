import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgs import (BoundsError, ConsistencyError, GoalCondition, OccupancyGrid, Query, SearchNode,
                 key_of, reconstruct_path)
from mgs.core import interpolate, round_half_away
from mgs.domains import GridDomain

from conftest import grid_distances, random_grid_instance


def test_key_of_zero():
    assert key_of([0.0, 0.0], [1.0, 1.0]) == (0, 0)


def test_key_of_rounds_down():
    assert key_of([2.4], [1.0]) == (2,)


def test_key_of_one_degree():
    # 0.01745 / 0.01745 == 1 exactly
    assert key_of([0.01745], [0.01745]) == (1,)


def test_round_half_away_from_zero():
    assert [round_half_away(v) for v in (0.5, 1.5, 2.5, -0.5, -1.5, -2.49)] == [1, 2, 3, -1, -2, -2]


def test_key_of_bounds_and_resolution_errors():
    with pytest.raises(BoundsError):
        key_of([5.0], [1.0], bounds=[(0.0, 4.0)])
    with pytest.raises(ValueError):
        key_of([1.0], [0.0])
    with pytest.raises(ValueError):
        key_of([1.0, 2.0], [1.0])


def test_state_keys_hash_by_value():
    a, b = key_of([1.0, 2.0], [1.0, 1.0]), key_of([1.2, 1.9], [1.0, 1.0])
    assert a == b and hash(a) == hash(b) and len({a, b}) == 1


def test_goal_condition_validation_and_json():
    with pytest.raises(ValueError):
        GoalCondition.region((0, 0), 0.0)
    with pytest.raises(ValueError):
        GoalCondition("other")
    for goal in (GoalCondition.exact((1, 2)), GoalCondition.region((0.5, 1.0), 0.25)):
        assert GoalCondition.from_json(goal.to_json()) == goal


def _chain(keys):
    nodes = {}
    parent = None
    for i, k in enumerate(keys):
        nodes[k] = SearchNode(k, tuple(float(v) for v in k), g=float(i), parent=parent)
        parent = k
    return nodes


def test_reconstruct_root_only():
    nodes = _chain([(0, 0)])
    assert reconstruct_path(nodes[(0, 0)], nodes) == [(0.0, 0.0)]


def test_reconstruct_chain():
    nodes = _chain([(0, 0), (1, 0), (2, 0)])
    assert reconstruct_path(nodes[(2, 0)], nodes) == [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]


def test_reconstruct_inserts_interior_waypoints():
    nodes = _chain([(0, 0), (4, 0)])
    nodes[(4, 0)].via = ((2.0, 0.0),)
    assert reconstruct_path(nodes[(4, 0)], nodes) == [(0.0, 0.0), (2.0, 0.0), (4.0, 0.0)]


def test_reconstruct_broken_chain_and_cycle():
    nodes = _chain([(0, 0), (1, 0)])
    del nodes[(0, 0)]
    with pytest.raises(ConsistencyError):
        reconstruct_path(nodes[(1, 0)], nodes)
    nodes = _chain([(0, 0), (1, 0)])
    nodes[(0, 0)].parent = (1, 0)
    with pytest.raises(ConsistencyError):
        reconstruct_path(nodes[(1, 0)], nodes)


def test_interpolate_spacing_and_endpoints():
    pts = interpolate((0.0, 0.0), (3.0, 4.0), 1.0)
    assert pts[0] == (0.0, 0.0) and pts[-1] == (3.0, 4.0)
    assert len(pts) == 6
    assert max(math.dist(a, b) for a, b in zip(pts, pts[1:])) <= 1.0 + 1e-12
    assert interpolate((1.0,), (1.0,), 0.5) == [(1.0,), (1.0,)]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), size=st.integers(6, 24), density=st.floats(0.0, 0.4))
def test_grid_successors_are_symmetric_and_free(seed, size, density):
    rng = np.random.default_rng(seed)
    grid, s, g = random_grid_instance(rng, size, density)
    dom = GridDomain(grid)
    q = Query(dom.config_of(s), GoalCondition.exact(dom.config_of(g)))
    for cell in grid.free_cells():
        for t in dom.successors(cell, q):
            assert t.cost > 0 and grid.is_free(t.dst)
            back = [r for r in dom.successors(t.dst, q) if r.dst == cell]
            assert len(back) == 1 and back[0].cost == t.cost


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), size=st.integers(6, 32), density=st.floats(0.0, 0.4))
def test_grid_heuristic_is_admissible(seed, size, density):
    rng = np.random.default_rng(seed)
    grid, s, g = random_grid_instance(rng, size, density)
    dom = GridDomain(grid)
    q = Query(dom.config_of(s), GoalCondition.exact(dom.config_of(g)))
    dist = grid_distances(grid.occupied, g)
    for cell in grid.free_cells():
        if np.isfinite(dist[cell]):
            assert dom.heuristic(cell, q) <= dist[cell] + 1e-9


@settings(max_examples=50, deadline=None)
@given(cell=st.tuples(st.integers(0, 19), st.integers(0, 9)), cs=st.sampled_from([0.05, 0.5, 1.0, 2.0]))
def test_key_of_config_of_roundtrip(cell, cs):
    dom = GridDomain(OccupancyGrid(np.zeros((20, 10), bool), cell_size=cs))
    assert dom.key_of(dom.config_of(cell)) == cell
    assert dom.grid.cell_of(dom.grid.center_of(cell)) == cell


def test_pairwise_distance_symmetric_zero_iff_equal():
    dom = GridDomain(OccupancyGrid(np.zeros((5, 5), bool)))
    assert dom.distance((1, 1), (1, 1)) == 0
    assert dom.distance((1, 1), (3, 4)) == dom.distance((3, 4), (1, 1)) > 0
