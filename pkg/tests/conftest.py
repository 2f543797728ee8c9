"""Independent oracles and instance generators shared by the tests.

The oracles deliberately avoid the package's search code: grid distances
come from scipy's csgraph Dijkstra over an adjacency matrix built straight
from the occupancy array, reachability from connected-component labelling.
"""
import heapq
import itertools
import math

import numpy as np
import pytest
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from mgs import GoalCondition, OccupancyGrid
from mgs.domains import DEG, PlanarArmDomain


def grid_graph(occ):
    """CSR adjacency of free cells, 8/26-connected, edge length = Euclidean step."""
    occ = np.asarray(occ, dtype=bool)
    idx = np.full(occ.shape, -1, dtype=np.int64)
    free = np.argwhere(~occ)
    idx[tuple(free.T)] = np.arange(len(free))
    rows, cols, vals = [], [], []
    for d in itertools.product((-1, 0, 1), repeat=occ.ndim):
        if not any(d):
            continue
        nb = free + np.array(d)
        ok = np.all((nb >= 0) & (nb < np.array(occ.shape)), axis=1)
        src, nb = free[ok], nb[ok]
        j = idx[tuple(nb.T)]
        keep = j >= 0
        rows.append(idx[tuple(src[keep].T)])
        cols.append(j[keep])
        vals.append(np.full(keep.sum(), math.sqrt(sum(abs(v) for v in d))))
    n = len(free)
    mat = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()
    return mat, idx


def grid_distances(occ, source):
    """Shortest path length from ``source`` to every cell (inf if unreachable or occupied)."""
    mat, idx = grid_graph(occ)
    d = dijkstra(mat, indices=idx[tuple(source)])
    out = np.full(np.asarray(occ).shape, np.inf)
    free = idx >= 0
    out[free] = d[idx[free]]
    return out


def flood_reachable(occ, a, b) -> bool:
    occ = np.asarray(occ, dtype=bool)
    if occ[tuple(a)] or occ[tuple(b)]:
        return False
    labels, _ = ndimage.label(~occ, structure=np.ones((3,) * occ.ndim))
    return labels[tuple(a)] == labels[tuple(b)]


def random_grid_instance(rng, size, density):
    """Random map with free start/goal at least half the map apart; reachability not enforced."""
    occ = rng.random((size, size)) < density
    while True:
        s = tuple(int(v) for v in rng.integers(0, size, 2))
        g = tuple(int(v) for v in rng.integers(0, size, 2))
        if math.dist(s, g) >= size / 2:
            break
    occ[s] = occ[g] = False
    return OccupancyGrid(occ), s, g


def solvable_grid_instance(rng, size, density):
    while True:
        grid, s, g = random_grid_instance(rng, size, density)
        if flood_reachable(grid.occupied, s, g):
            return grid, s, g


def graph_dijkstra(domain, query, start_key, stop=None):
    """Dijkstra over the domain's own induced graph (used where no closed-form graph exists).

    With ``stop``, returns ``(dist, key)`` as soon as a key satisfying it is settled.
    """
    dist = {start_key: 0.0}
    heap = [(0.0, 0, start_key)]
    tie = itertools.count(1)
    done = set()
    while heap:
        d, _, k = heapq.heappop(heap)
        if k in done:
            continue
        done.add(k)
        if stop is not None and stop(k):
            return dist, k
        for t in domain.successors(k, query):
            nd = d + t.cost
            if nd < dist.get(t.dst, math.inf):
                dist[t.dst] = nd
                heapq.heappush(heap, (nd, next(tie), t.dst))
    return (dist, None) if stop is not None else dist


def goal_optimum(domain, query):
    """Optimal cost from start to the goal set (inf if unreachable) and the full distance map."""
    dist = graph_dijkstra(domain, query, domain.key_of(query.start))
    best = min((d for k, d in dist.items() if domain.is_goal(k, query)), default=math.inf)
    return best, dist


def goal_cost(domain, query):
    """Like goal_optimum but stops at the first goal state settled."""
    dist, k = graph_dijkstra(domain, query, domain.key_of(query.start), lambda k: domain.is_goal(k, query))
    return math.inf if k is None else dist[k]


def reference_astar(domain, query):
    """Textbook A* with (f, h, insertion seq) ordering; returns the pop order."""
    start = domain.key_of(query.start)
    g = {start: 0.0}
    seq = {start: 0}
    counter = itertools.count(1)
    h0 = domain.heuristic(start, query)
    heap = [(h0, h0, 0, start)]
    closed = set()
    order = []
    while heap:
        f, h, s, k = heapq.heappop(heap)
        if k in closed or f != g[k] + domain.heuristic(k, query):
            continue
        closed.add(k)
        order.append(k)
        if domain.is_goal(k, query):
            break
        for t in domain.successors(k, query):
            ng = g[k] + t.cost
            if t.dst in closed:
                continue
            if t.dst not in g:
                seq[t.dst] = next(counter)
            elif ng >= g[t.dst]:
                continue
            g[t.dst] = ng
            hd = domain.heuristic(t.dst, query)
            heapq.heappush(heap, (ng + hd, hd, seq[t.dst], t.dst))
    return order


def random_arm_instance(rng, links=3, goal_kind="config"):
    """Coarse-lattice arm world small enough for an exhaustive Dijkstra oracle."""
    n = links
    if n == 3:
        limits = [(-math.pi, math.pi - 20 * DEG)] * 3
        short, long_ = 20 * DEG, 40 * DEG
    else:
        limits = [(-80 * DEG, 80 * DEG)] * 4
        short, long_ = 20 * DEG, 40 * DEG
    while True:
        obstacles = []
        for _ in range(int(rng.integers(1, 4))):
            r = float(rng.uniform(0.2, 0.5))
            ang = float(rng.uniform(-math.pi, math.pi))
            rad = float(rng.uniform(1.0, n - 0.3))
            obstacles.append((rad * math.cos(ang), rad * math.sin(ang), r))
        dom = PlanarArmDomain([1.0] * n, obstacles, limits, short, long_, near_threshold=2 * short)
        s = _random_valid(dom, rng)
        g = _random_valid(dom, rng)
        if s is None or g is None or s == g:
            continue
        if goal_kind == "config":
            return dom, s, GoalCondition.exact(g)
        return dom, s, GoalCondition.region(dom.workspace_project(g), 0.3)


def _random_valid(dom, rng, tries=50):
    for _ in range(tries):
        key = tuple(int(rng.integers(lo, hi + 1)) for lo, hi in zip(dom._key_lo, dom._key_hi))
        cfg = dom.config_of(key)
        if dom.is_valid(cfg):
            return cfg
    return None


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance verdict lines, filled by test_acceptance and echoed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
