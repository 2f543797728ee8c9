"""Shared spatial index over the OPEN lists of every subgraph.

Rows are ``(graph id, state key) -> embedding``; nearest-neighbour queries
are brute-force vectorised scans, which beat tree rebuilds at the frontier
sizes a single query produces because the frontier changes on every
expansion.
"""
from __future__ import annotations

import numpy as np

INF = float("inf")


class FrontierIndex:
    def __init__(self, dim: int, capacity: int = 256):
        self.dim = dim
        self._vecs = np.empty((capacity, dim))
        self._owner = np.empty(capacity, dtype=np.int64)
        self._keys = [None] * capacity
        self._row = {}
        self._n = 0
        self._counts = {}

    def __len__(self):
        return self._n

    def __contains__(self, item):
        return item in self._row

    def count(self, gid: int) -> int:
        return self._counts.get(gid, 0)

    def add(self, gid: int, key, vec):
        if (gid, key) in self._row:
            return
        if self._n == len(self._keys):
            cap = 2 * len(self._keys)
            self._vecs = np.resize(self._vecs, (cap, self.dim))
            self._owner = np.resize(self._owner, cap)
            self._keys.extend([None] * (cap - len(self._keys)))
        i = self._n
        self._vecs[i] = vec
        self._owner[i] = gid
        self._keys[i] = key
        self._row[(gid, key)] = i
        self._n += 1
        self._counts[gid] = self._counts.get(gid, 0) + 1

    def remove(self, gid: int, key):
        i = self._row.pop((gid, key), None)
        if i is None:
            return
        last = self._n - 1
        if i != last:
            self._vecs[i] = self._vecs[last]
            self._owner[i] = self._owner[last]
            moved = self._keys[last]
            self._keys[i] = moved
            self._row[(int(self._owner[i]), moved)] = i
        self._keys[last] = None
        self._n = last
        self._counts[gid] -= 1

    def keys_of(self, gid: int) -> set:
        return {k for (g, k) in self._row if g == gid}

    def _dists(self, vec):
        diff = self._vecs[:self._n] - np.asarray(vec, dtype=float)
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def nearest_per_graph(self, vec, gids, k: int = 1) -> dict:
        """``{gid: [(key, distance), ...]}`` with up to k nearest states per listed graph."""
        out = {}
        if not self._n:
            return out
        d = self._dists(vec)
        owner = self._owner[:self._n]
        for gid in gids:
            cnt = self._counts.get(gid)
            if not cnt:
                continue
            masked = np.where(owner == gid, d, INF)
            if k == 1:
                idx = [int(masked.argmin())]
            else:
                kk = min(k, cnt)
                idx = np.argpartition(masked, kk - 1)[:kk]
                idx = sorted((int(i) for i in idx), key=lambda i: (masked[i], i))
            out[gid] = [(self._keys[i], float(masked[i])) for i in idx]
        return out

    def min_distance_excluding(self, vecs, gid: int) -> np.ndarray:
        """Per query row, distance to the closest frontier state of any other graph."""
        vecs = np.atleast_2d(np.asarray(vecs, dtype=float))
        if self._n == self._counts.get(gid, 0):
            return np.full(len(vecs), INF)
        pts = self._vecs[:self._n]
        diff = vecs[:, None, :] - pts[None, :, :]
        d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        d[:, self._owner[:self._n] == gid] = INF
        return d.min(axis=1)
