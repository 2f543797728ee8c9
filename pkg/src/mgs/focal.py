"""Bounded-suboptimal focal search.

OPEN is ordered by ``f = g + w*h``; FOCAL holds every OPEN state with
``f <= epsilon * f_min`` and is ordered by the inadmissible focal heuristic.
With ``epsilon=1`` and ``w>1`` this is weighted A*; with ``w=1`` and
``epsilon>1`` it is plain focal search.  The returned cost is bounded by
``epsilon * w`` times the optimum.
"""
from __future__ import annotations

import heapq
import itertools
import time
from collections import Counter

from .core import (INF, InvalidQueryError, PlanResult, Query, SearchNode,
                   reconstruct_path)

FOCAL_SLACK = 1e-9


class FocalInvariantError(AssertionError):
    pass


class FocalQueue:
    """OPEN/FOCAL pair with lazy deletion.

    Four heaps back the two lists: all OPEN states by f (for ``f_min``),
    OPEN-but-not-FOCAL states by f (admission when ``f_min`` rises), FOCAL by
    ``(h_focal, f, seq)`` (selection) and FOCAL by descending f (eviction when
    ``f_min`` drops, which happens with weighted f or merged states).
    Entries are validated against the node's status, version and focal flag.
    """

    def __init__(self, epsilon: float = 1.0):
        if epsilon < 1:
            raise ValueError("epsilon must be >= 1")
        self.epsilon = float(epsilon)
        self._open = []
        self._waiting = []
        self._focal = []
        self._focal_max = []
        self._size = 0
        self._seq = itertools.count()

    def __len__(self):
        return self._size

    def __bool__(self):
        return self._size > 0

    @staticmethod
    def _live(entry) -> bool:
        node = entry[-1]
        return node.status == SearchNode.OPEN and node.version == entry[-2]

    def insert(self, node: SearchNode):
        node.status = SearchNode.OPEN
        node.in_focal = False
        node.version += 1
        node.seq = next(self._seq)
        self._size += 1
        self._push_entries(node)
        self.rebalance()

    def update(self, node: SearchNode):
        """Re-key an OPEN node after its f decreased."""
        node.version += 1
        self._push_entries(node)
        self.rebalance()

    def _push_entries(self, node):
        entry = (node.f, node.seq, node.version, node)
        heapq.heappush(self._open, entry)
        if node.in_focal:
            heapq.heappush(self._focal, (node.h_focal, node.f, node.seq, node.version, node))
            heapq.heappush(self._focal_max, (-node.f, -node.seq, node.version, node))
        else:
            heapq.heappush(self._waiting, entry)

    def f_min(self) -> float:
        heap = self._open
        while heap and not self._live(heap[0]):
            heapq.heappop(heap)
        return heap[0][0] if heap else INF

    def bound(self) -> float:
        return self.epsilon * self.f_min()

    def rebalance(self):
        f_min = self.f_min()
        if f_min == INF:
            return
        bound = self.epsilon * f_min
        fmax = self._focal_max
        while fmax:
            top = fmax[0]
            node = top[-1]
            if not (self._live(top) and node.in_focal):
                heapq.heappop(fmax)
                continue
            if -top[0] <= bound:
                break
            heapq.heappop(fmax)
            node.in_focal = False
            heapq.heappush(self._waiting, (node.f, node.seq, node.version, node))
        waiting = self._waiting
        while waiting:
            top = waiting[0]
            node = top[-1]
            if not self._live(top) or node.in_focal:
                heapq.heappop(waiting)
                continue
            if top[0] > bound:
                break
            heapq.heappop(waiting)
            node.in_focal = True
            heapq.heappush(self._focal, (node.h_focal, node.f, node.seq, node.version, node))
            heapq.heappush(fmax, (-node.f, -node.seq, node.version, node))

    def peek(self) -> SearchNode:
        heap = self._focal
        while heap and not (self._live(heap[0]) and heap[0][-1].in_focal):
            heapq.heappop(heap)
        if not heap:
            raise IndexError("FOCAL is empty")
        return heap[0][-1]

    def pop(self) -> SearchNode:
        """Remove and return the FOCAL node with the smallest focal heuristic."""
        node = self.peek()
        heapq.heappop(self._focal)
        node.status = SearchNode.CLOSED
        node.in_focal = False
        self._size -= 1
        self.rebalance()
        return node

    def check_invariant(self):
        """O(1) amortized: max f in FOCAL <= eps*f_min and no qualifying node waits."""
        if not self._size:
            return
        bound = self.bound() + FOCAL_SLACK
        fmax = self._focal_max
        while fmax and not (self._live(fmax[0]) and fmax[0][-1].in_focal):
            heapq.heappop(fmax)
        if fmax and -fmax[0][0] > bound:
            raise FocalInvariantError(f"FOCAL holds f={-fmax[0][0]} > eps*f_min={bound}")
        waiting = self._waiting
        while waiting and (not self._live(waiting[0]) or waiting[0][-1].in_focal):
            heapq.heappop(waiting)
        if waiting and waiting[0][0] <= self.bound():
            raise FocalInvariantError(f"OPEN node with f={waiting[0][0]} missing from FOCAL")
        if not fmax:
            raise FocalInvariantError("OPEN is non-empty but FOCAL is empty")

    def open_nodes(self) -> list:
        seen = {}
        for entry in self._open:
            if self._live(entry):
                seen[id(entry[-1])] = entry[-1]
        return list(seen.values())

    def focal_nodes(self) -> list:
        return [n for n in self.open_nodes() if n.in_focal]


def make_node(domain, query, key, g, weight, parent=None, via=None) -> SearchNode:
    node = SearchNode(key, domain.config_of(key), g=g, parent=parent, via=via)
    node.h = domain.heuristic(key, query)
    node.h_focal = domain.focal_heuristic(key, query)
    node.f = g + weight * node.h
    return node


def push_or_improve(nodes: dict, queue: FocalQueue, domain, query, key, g_new: float,
                    parent=None, weight: float = 1.0, via=None) -> str:
    """Insert an unseen state or lower the g of an OPEN one.

    Closed states are never reopened.  Returns ``"inserted"``,
    ``"improved"`` or ``"ignored"``.
    """
    node = nodes.get(key)
    if node is None:
        node = make_node(domain, query, key, g_new, weight, parent, via)
        nodes[key] = node
        queue.insert(node)
        return "inserted"
    if node.status == SearchNode.OPEN and g_new < node.g:
        node.g = g_new
        node.parent = parent
        node.via = via
        node.f = g_new + weight * node.h
        queue.update(node)
        return "improved"
    return "ignored"


def pop_focal(queue: FocalQueue) -> SearchNode:
    return queue.pop()


def plan_single(domain, start, goal, epsilon: float = 1.0, weight: float = 1.0,
                timeout=5.0, debug: bool = False, record_trace: bool = False) -> PlanResult:
    """Single-graph focal search from ``start`` to ``goal``.

    ``timeout`` is wall-clock seconds (``None`` disables it).
    """
    if weight < 1:
        raise ValueError("weight must be >= 1")
    t0 = time.perf_counter()
    query = Query(tuple(start), goal)
    domain.validate_query(query)
    start_key = domain.key_of(start)
    if not domain.is_valid(domain.config_of(start_key)):
        raise InvalidQueryError(f"start {start} snaps to an invalid lattice state")

    nodes = {}
    queue = FocalQueue(epsilon)
    push_or_improve(nodes, queue, domain, query, start_key, 0.0, None, weight)
    counts = Counter()
    trace = []
    result = PlanResult(False, "exhausted")
    deadline = None if timeout is None else t0 + timeout
    while queue:
        if deadline is not None and time.perf_counter() > deadline:
            result.status = "timeout"
            break
        if debug:
            queue.check_invariant()
            result.focal_checks += 1
        node = queue.pop()
        counts[node.key] += 1
        if record_trace:
            trace.append(node.key)
        if domain.is_goal(node.key, query):
            result.success = True
            result.status = "solved"
            result.path = reconstruct_path(node, nodes)
            result.cost = node.g
            break
        g = node.g
        for t in domain.successors(node.key, query):
            push_or_improve(nodes, queue, domain, query, t.dst, g + t.cost, node.key, weight)

    result.expansions = sum(counts.values())
    result.re_expansions = sum(c - 1 for c in counts.values() if c > 1)
    result.graph_expansions = {1: result.expansions}
    result.expansion_counts = dict(counts)
    result.trace = trace
    result.planning_time = time.perf_counter() - t0
    return result
