"""Multi-graph search: one anchor focal search plus connect searches.

The anchor is rooted at the start and is the only search allowed to return a
solution.  Connect searches are rooted at key states and expand the state
closest to any other subgraph's frontier (front-to-front distance).  When a
popped state reaches another subgraph by a collision-free straight line, or
was already expanded by another subgraph, the two subgraphs are merged and
g-values are re-propagated from the merge point.
"""
from __future__ import annotations

import heapq
import itertools
import time
from collections import Counter, defaultdict
from dataclasses import dataclass

from .core import (ConsistencyError, GoalCondition, InvalidQueryError,
                   PlanResult, Query, SearchNode, reconstruct_path)
from .focal import FocalQueue
from .frontier import FrontierIndex

STALE_TOL = 1e-12


@dataclass
class MgsConfig:
    max_subgraphs: int = 10
    epsilon: float = 1.0
    weight: float = 1.0
    connect_neighbors: int = 1
    interpolation_step: float = None  # None: smallest domain resolution
    timeout: float = 5.0  # seconds, None for unlimited
    debug: bool = False  # focal invariant check on every anchor pop
    check_frontier: bool = False  # frontier index == OPEN after every expansion (slow)
    record_trace: bool = False

    def __post_init__(self):
        if self.max_subgraphs < 1:
            raise ValueError("max_subgraphs must be >= 1")
        if self.epsilon < 1 or self.weight < 1:
            raise ValueError("epsilon and weight must be >= 1")
        if self.connect_neighbors < 1:
            raise ValueError("connect_neighbors must be >= 1")
        if self.interpolation_step is not None and self.interpolation_step <= 0:
            raise ValueError("interpolation_step must be positive")
        if self.timeout is not None and self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @property
    def bound(self) -> float:
        return self.epsilon * self.weight


@dataclass
class ConnectionRecord:
    from_state: tuple
    to_state: tuple
    to_graph: int
    path: list
    path_cost: float


class ConnectQueue:
    """OPEN list of a connect search, ordered by (h_connect, insertion seq)."""

    def __init__(self):
        self._heap = []
        self._size = 0
        self._seq = itertools.count()

    def __len__(self):
        return self._size

    def __bool__(self):
        return self._size > 0

    def insert(self, node: SearchNode):
        node.status = SearchNode.OPEN
        node.version += 1
        node.seq = next(self._seq)
        self._size += 1
        heapq.heappush(self._heap, (node.h_connect, node.seq, node.version, node))

    def requeue(self, node: SearchNode):
        """Re-insert a just-popped node under its updated priority, keeping its seq."""
        if node.status != SearchNode.OPEN:
            node.status = SearchNode.OPEN
            self._size += 1
        node.version += 1
        heapq.heappush(self._heap, (node.h_connect, node.seq, node.version, node))

    def remove(self, node: SearchNode):
        """Drop an OPEN node (its heap entry goes stale)."""
        node.status = SearchNode.CLOSED
        node.version += 1
        self._size -= 1

    def pop(self) -> SearchNode:
        heap = self._heap
        while heap:
            _, _, version, node = heapq.heappop(heap)
            if node.status == SearchNode.OPEN and node.version == version:
                node.status = SearchNode.CLOSED
                self._size -= 1
                return node
        raise IndexError("OPEN is empty")

    def open_nodes(self) -> list:
        seen = {}
        for _, _, version, node in self._heap:
            if node.status == SearchNode.OPEN and node.version == version:
                seen[id(node)] = node
        return list(seen.values())


class SubGraph:
    """One rooted search: node store, undirected edge store, OPEN (and FOCAL)."""

    def __init__(self, gid: int, root_key, root_config, epsilon: float = 1.0):
        self.gid = gid
        self.root_key = root_key
        self.root_config = root_config
        self.nodes = {}
        self.edges = defaultdict(dict)  # key -> {neighbour: (cost, interior waypoints)}
        # states expanded by this subgraph or by a subgraph it absorbed
        self.closed = set()
        self.queue = FocalQueue(epsilon) if gid == 1 else ConnectQueue()
        self.expansions = 0

    @property
    def is_anchor(self) -> bool:
        return self.gid == 1

    def add_edge(self, a, b, cost: float, via=None):
        self.edges[a][b] = (cost, via)
        self.edges[b][a] = (cost, tuple(reversed(via)) if via else None)

    def open_keys(self) -> set:
        return {n.key for n in self.queue.open_nodes()}

    def __repr__(self):
        return f"SubGraph({self.gid}, root={self.root_key}, |V|={len(self.nodes)}, open={len(self.queue)})"


class MultiGraphSearch:
    """State of one planning query: the subgraph pool and its bookkeeping."""

    def __init__(self, domain, start, goal: GoalCondition, roots=(), cfg: MgsConfig = None):
        self.domain = domain
        self.cfg = cfg or MgsConfig()
        self.query = Query(tuple(start), goal)
        domain.validate_query(self.query)
        self.weight = self.cfg.weight
        self.step = self.cfg.interpolation_step or min(domain.resolution)
        self._start_query = None

        start_key = domain.key_of(start)
        start_cfg = domain.config_of(start_key)
        if not domain.is_valid(start_cfg):
            raise InvalidQueryError(f"start {start} snaps to an invalid lattice state")
        self.frontier = FrontierIndex(len(domain.embed(start_key)))
        self.graphs = {}
        self.closed_by = defaultdict(set)
        self.expansion_counts = Counter()
        self.trace = []
        self.merges = 0
        self.merge_log = []
        self.merge_observer = None
        self.connect_attempts = 0
        self.connections = 0
        self.focal_checks = 0

        anchor = SubGraph(1, start_key, start_cfg, self.cfg.epsilon)
        self.graphs[1] = anchor
        node = self._new_node(anchor, start_key, 0.0)
        anchor.nodes[start_key] = node
        self._open(anchor, [node])

        seen = {start_key}
        self.roots = []
        for r in roots:
            if len(self.graphs) >= self.cfg.max_subgraphs:
                break
            if not domain.is_valid(r):
                raise InvalidQueryError(f"root {r} is invalid")
            rk = domain.key_of(r)
            rc = domain.config_of(rk)
            if not domain.is_valid(rc):
                raise InvalidQueryError(f"root {r} snaps to an invalid lattice state")
            if rk in seen:
                continue
            seen.add(rk)
            gid = len(self.graphs) + 1
            g = SubGraph(gid, rk, rc)
            self.graphs[gid] = g
            self.roots.append(rc)
            n = SearchNode(rk, rc, g=0.0)
            g.nodes[rk] = n
        for gid, g in self.graphs.items():
            if gid != 1:
                self._open(g, [g.nodes[g.root_key]])

    @property
    def anchor(self) -> SubGraph:
        return self.graphs[1]

    # -- node bookkeeping --------------------------------------------------

    def _new_node(self, graph, key, g, parent=None, via=None, config=None) -> SearchNode:
        node = SearchNode(key, config if config is not None else self.domain.config_of(key),
                          g=g, parent=parent, via=via)
        if graph.is_anchor:
            self._score_anchor(node)
        return node

    def _score_anchor(self, node):
        node.h = self.domain.heuristic(node.key, self.query)
        node.h_focal = self.domain.focal_heuristic(node.key, self.query)
        node.f = node.g + self.weight * node.h

    def _open(self, graph, nodes):
        """Put NEW nodes into the graph's OPEN list and the frontier index."""
        if not nodes:
            return
        embed = self.domain.embed
        if graph.is_anchor:
            for node in nodes:
                graph.queue.insert(node)
                self.frontier.add(1, node.key, embed(node.key))
            return
        vecs = [embed(n.key) for n in nodes]
        hs = self.frontier.min_distance_excluding(vecs, graph.gid)
        for node, vec, h in zip(nodes, vecs, hs):
            node.h_connect = float(h)
            graph.queue.insert(node)
            self.frontier.add(graph.gid, node.key, vec)

    def _relax(self, graph, key, g_new, parent, via=None, config=None):
        """Offer a cost-to-come; returns a NEW node that still needs opening, else None."""
        node = graph.nodes.get(key)
        if node is None:
            node = self._new_node(graph, key, g_new, parent, via, config)
            graph.nodes[key] = node
            return node
        if node.status == SearchNode.OPEN and g_new < node.g:
            node.g = g_new
            node.parent = parent
            node.via = via
            if graph.is_anchor:
                node.f = g_new + self.weight * node.h
                graph.queue.update(node)
        return None

    def connect_heuristic(self, node, owner) -> float:
        """Distance from ``node`` to the nearest frontier state of any other subgraph."""
        return float(self.frontier.min_distance_excluding([self.domain.embed(node.key)], owner.gid)[0])

    # -- expansion -----------------------------------------------------------

    def _expand(self, graph, node):
        key = node.key
        g = node.g
        fresh = []
        for t in self.domain.successors(key, self.query):
            graph.add_edge(key, t.dst, t.cost)
            n = self._relax(graph, t.dst, g + t.cost, key)
            if n is not None:
                fresh.append(n)
        self._open(graph, fresh)
        graph.closed.add(key)
        graph.expansions += 1
        self.closed_by[key].add(graph.gid)
        self.expansion_counts[key] += 1
        if self.cfg.record_trace:
            self.trace.append((graph.gid, key))
        if self.cfg.check_frontier:
            self.check_frontier()

    def _pop_connect(self, graph):
        """Pop the best connect state, re-queueing entries whose F2F value grew."""
        queue = graph.queue
        while queue:
            node = queue.pop()
            h_now = self.connect_heuristic(node, graph)
            if h_now > node.h_connect + STALE_TOL:
                node.h_connect = h_now
                queue.requeue(node)
                continue
            node.h_connect = h_now
            self.frontier.remove(graph.gid, node.key)
            return node
        return None

    # -- connection and merging --------------------------------------------

    def try_to_connect(self, node, owner) -> list:
        """Straight-line connections from ``node`` to the nearest frontier state of each other subgraph."""
        others = [gid for gid in self.graphs if gid != owner.gid]
        near = self.frontier.nearest_per_graph(self.domain.embed(node.key), others,
                                               self.cfg.connect_neighbors)
        records = []
        for gid in others:
            for key2, _ in near.get(gid, ()):
                self.connect_attempts += 1
                if key2 == node.key:
                    records.append(ConnectionRecord(node.key, key2, gid, [node.config], 0.0))
                    break
                target = self.graphs[gid].nodes[key2]
                if self.domain.is_edge_valid(node.config, target.config, self.step):
                    path = self.domain.interpolate(node.config, target.config, self.step)
                    path[0], path[-1] = node.config, target.config
                    cost = sum(self.domain.segment_cost(a, b) for a, b in zip(path, path[1:]))
                    records.append(ConnectionRecord(node.key, key2, gid, path, cost))
                    break
        return records

    def choose_merging_order(self, gi, gj):
        """(receiver, donor): the anchor always receives; otherwise the root nearer the start."""
        if gi.is_anchor:
            return gi, gj
        if gj.is_anchor:
            return gj, gi
        if self._start_query is None:
            self._start_query = Query(self.query.start, GoalCondition.exact(self.anchor.root_config))
        hi = self.domain.heuristic(gi.root_key, self._start_query)
        hj = self.domain.heuristic(gj.root_key, self._start_query)
        if hi < hj or (hi == hj and gi.gid < gj.gid):
            return gi, gj
        return gj, gi

    def add_connecting_path(self, receiver, from_key, to_key, path, cost):
        """Add the connection ``from_key`` (in receiver) -> ``to_key`` as a receiver edge."""
        if from_key == to_key:
            return
        via = tuple(path[1:-1]) or None
        receiver.add_edge(from_key, to_key, cost, via)
        src = receiver.nodes[from_key]
        n = self._relax(receiver, to_key, src.g + cost, from_key, via, config=path[-1])
        if n is not None:
            self._open(receiver, [n])

    def merge_subgraphs(self, receiver, donor, merge_point):
        """Absorb ``donor`` into ``receiver``, re-propagating g over the merged edges.

        All donor edges are copied into the receiver, then g-values are
        settled in Dijkstra order starting from every receiver state at its
        current g.  Receiver-closed states keep their record; OPEN and newly
        transferred states end up with the shortest value over the union
        edges, so improvements also reach states absorbed in earlier merges.
        """
        if merge_point not in donor.nodes:
            raise ConsistencyError(f"merge point {merge_point} is not in subgraph {donor.gid}")
        if merge_point not in receiver.nodes:
            raise ConsistencyError(f"merge point {merge_point} is not in subgraph {receiver.gid}")
        if self.merge_observer:
            self.merge_observer("before", receiver, donor, merge_point)

        for node in donor.queue.open_nodes():
            self.frontier.remove(donor.gid, node.key)

        for s, nbrs in donor.edges.items():
            for s2, (c, via) in nbrs.items():
                receiver.add_edge(s, s2, c, via)

        # Dijkstra over the union edges, seeded with every receiver state at its g;
        # receiver-closed states keep their g, everything else takes the shortest value
        heap = [(n.g, i, k) for i, (k, n) in enumerate(receiver.nodes.items())]
        heapq.heapify(heap)
        tie = itertools.count(len(heap))
        settled = set()
        fresh = {}
        improved = set()
        while heap:
            g, _, s = heapq.heappop(heap)
            if s in settled:
                continue
            settled.add(s)
            for s2, (c, via) in receiver.edges.get(s, {}).items():
                if s2 in settled:
                    continue
                g2 = g + c
                rn = receiver.nodes.get(s2)
                if rn is None:
                    dn = donor.nodes[s2]
                    rn = SearchNode(s2, dn.config, g=g2, parent=s, via=via)
                    receiver.nodes[s2] = rn
                    fresh[s2] = rn
                    heapq.heappush(heap, (g2, next(tie), s2))
                elif g2 < rn.g and (s2 in fresh or rn.status == SearchNode.OPEN):
                    rn.g = g2
                    rn.parent = s
                    rn.via = via
                    if s2 not in fresh:
                        improved.add(s2)
                    heapq.heappush(heap, (g2, next(tie), s2))
        if any(k not in receiver.nodes for k in donor.nodes):
            raise ConsistencyError(f"subgraph {donor.gid} is not connected to its merge point")
        if receiver.is_anchor:
            for k in improved:
                rn = receiver.nodes[k]
                rn.f = rn.g + self.weight * rn.h
                receiver.queue.update(rn)

        to_open = []
        if receiver.is_anchor:
            for key, node in fresh.items():
                self._score_anchor(node)
                to_open.append(node)
        else:
            for key, node in fresh.items():
                if key in donor.closed:
                    node.status = SearchNode.CLOSED
                else:
                    to_open.append(node)
            for key in donor.closed:
                rn = receiver.nodes[key]
                if key not in fresh and rn.status == SearchNode.OPEN:
                    receiver.queue.remove(rn)
                    self.frontier.remove(receiver.gid, key)
        self._open(receiver, to_open)

        for key in donor.closed:
            owners = self.closed_by[key]
            owners.discard(donor.gid)
            owners.add(receiver.gid)
        receiver.closed |= donor.closed
        receiver.expansions += donor.expansions
        del self.graphs[donor.gid]
        self.merges += 1
        self.merge_log.append((receiver.gid, donor.gid, merge_point))
        if self.merge_observer:
            self.merge_observer("after", receiver, donor, merge_point)
        if self.cfg.check_frontier:
            self.check_frontier()

    def _connect_and_merge(self, node, owner):
        """Run TryToConnect for ``node`` and merge every reached subgraph.

        Returns the subgraph that holds ``node``'s lineage afterwards (the
        owner, or whoever absorbed it).
        """
        for rec in self.try_to_connect(node, owner):
            target = self.graphs.get(rec.to_graph)
            if target is None or target is owner or rec.to_state not in target.nodes:
                continue
            if target.nodes[rec.to_state].status != SearchNode.OPEN:
                continue
            self.connections += 1
            receiver, donor = self.choose_merging_order(owner, target)
            if receiver is owner:
                self.add_connecting_path(receiver, rec.from_state, rec.to_state, rec.path, rec.path_cost)
                self.merge_subgraphs(receiver, donor, rec.to_state)
            else:
                back = list(reversed(rec.path))
                self.add_connecting_path(receiver, rec.to_state, rec.from_state, back, rec.path_cost)
                self.merge_subgraphs(receiver, donor, rec.from_state)
                owner = receiver
        return owner

    # -- main loop -------------------------------------------------------------

    def run(self) -> PlanResult:
        t0 = time.perf_counter()
        deadline = None if self.cfg.timeout is None else t0 + self.cfg.timeout
        anchor = self.anchor
        result = PlanResult(False, "exhausted", roots=list(self.roots))
        while anchor.queue:
            if deadline is not None and time.perf_counter() > deadline:
                result.status = "timeout"
                break
            # phase 1: anchor
            if self.cfg.debug:
                anchor.queue.check_invariant()
                self.focal_checks += 1
            node = anchor.queue.pop()
            self.frontier.remove(1, node.key)
            if self.domain.is_goal(node.key, self.query):
                self.expansion_counts[node.key] += 1
                anchor.expansions += 1
                if self.cfg.record_trace:
                    self.trace.append((1, node.key))
                result.success = True
                result.status = "solved"
                result.path = reconstruct_path(node, anchor.nodes)
                result.cost = node.g
                break
            if len(self.graphs) > 1:
                self._connect_and_merge(node, anchor)
            closer = sorted(self.closed_by.get(node.key, set()) - {1})
            if closer:
                self.merge_subgraphs(anchor, self.graphs[closer[0]], node.key)
                anchor.closed.add(node.key)
                self.closed_by[node.key].add(1)
            else:
                self._expand(anchor, node)

            # phase 2: connect searches
            for gid in [g for g in self.graphs if g != 1]:
                graph = self.graphs.get(gid)
                if graph is None or not graph.queue:
                    continue
                q = self._pop_connect(graph)
                if q is None:
                    continue
                owner = self._connect_and_merge(q, graph)
                if owner is not graph:
                    continue  # absorbed: q now waits in the receiver's OPEN
                closer = sorted(self.closed_by.get(q.key, set()) - {gid})
                if closer:
                    other = self.graphs[closer[0]]
                    receiver, donor = self.choose_merging_order(graph, other)
                    self.merge_subgraphs(receiver, donor, q.key)
                else:
                    self._expand(graph, q)

        result.planning_time = time.perf_counter() - t0
        counts = self.expansion_counts
        result.expansions = sum(counts.values())
        result.re_expansions = sum(c - 1 for c in counts.values() if c > 1)
        result.expansion_counts = dict(counts)
        result.graph_expansions = {gid: g.expansions for gid, g in self.graphs.items()}
        result.merges = self.merges
        result.connect_attempts = self.connect_attempts
        result.connections = self.connections
        result.trace = self.trace
        result.focal_checks = self.focal_checks
        return result

    def check_frontier(self):
        for gid, graph in self.graphs.items():
            if self.frontier.keys_of(gid) != graph.open_keys():
                raise ConsistencyError(f"frontier index of subgraph {gid} differs from its OPEN list")


def mgs_plan(domain, start, goal, roots=(), cfg: MgsConfig = None) -> PlanResult:
    """Plan with an anchor at ``start`` and connect searches at ``roots``."""
    return MultiGraphSearch(domain, start, goal, roots, cfg).run()
