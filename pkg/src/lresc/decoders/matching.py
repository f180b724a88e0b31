"""Minimum-weight perfect matching for graphlike check matrices.

A check matrix is graphlike when every column has weight 1 or 2: checks are
nodes, weight-2 columns are edges between them and weight-1 columns are
edges to a single shared boundary node.  Two backends are provided:

* ``"pymatching"`` (default) - the sparse blossom implementation;
* ``"networkx"`` - an explicit defect graph (shortest-path distances, one
  boundary copy per defect) solved with ``networkx.max_weight_matching``.

``min_pairing_costs`` is an independent exhaustive oracle (subset dynamic
programming over all pairings) used to check both.
"""

from __future__ import annotations

import itertools

import networkx as nx
import numba
import numpy as np
import pymatching
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .. import gf2
from .bp_osd import DecodeOutcome, SyndromeMismatch, channel_llrs

__all__ = [
    "NotGraphlike",
    "MatchingDecoder",
    "is_graphlike",
    "check_distances",
    "brute_force_pairing",
    "min_pairing_costs",
]

WEIGHT_SCALE = 10**6


class NotGraphlike(ValueError):
    """Matching needs every column of H to have weight 1 or 2."""


def is_graphlike(H) -> bool:
    w = np.asarray(H).sum(axis=0)
    return bool(np.all((w >= 1) & (w <= 2)))


def _edges(H: np.ndarray, weights: np.ndarray):
    """Cheapest column per node pair; boundary node index is m."""
    m = H.shape[0]
    best: dict[tuple[int, int], tuple[float, int]] = {}
    for col in range(H.shape[1]):
        rows = np.nonzero(H[:, col])[0]
        u, v = (int(rows[0]), m) if rows.size == 1 else (int(rows[0]), int(rows[1]))
        key = (min(u, v), max(u, v))
        if key not in best or weights[col] < best[key][0]:
            best[key] = (float(weights[col]), col)
    return best


def check_distances(H, weights=None) -> tuple[np.ndarray, np.ndarray]:
    """Shortest-path distances between checks (node m is the boundary)."""
    H = gf2.as_binary(np.atleast_2d(H))
    m, n = H.shape
    weights = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    best = _edges(H, weights)
    rows, cols, vals = [], [], []
    for (u, v), (w, _) in best.items():
        rows += [u, v]
        cols += [v, u]
        vals += [w, w]
    graph = csr_matrix((vals, (rows, cols)), shape=(m + 1, m + 1))
    dist, pred = dijkstra(graph, directed=False, return_predecessors=True)
    return dist, pred


class MatchingDecoder:
    def __init__(self, H, priors=None, backend: str = "pymatching"):
        self.H = gf2.as_binary(np.atleast_2d(H))
        if not is_graphlike(self.H):
            raise NotGraphlike("matching decoder needs column weights in {1, 2}")
        n = self.H.shape[1]
        if priors is None:
            self.weights = np.ones(n)
        else:
            self.weights = channel_llrs(np.broadcast_to(np.asarray(priors, dtype=float), (n,)))
        if backend not in ("pymatching", "networkx"):
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        if backend == "pymatching":
            self._matching = pymatching.Matching.from_check_matrix(self.H, weights=self.weights)
        else:
            best = _edges(self.H, self.weights)
            self._edge_col = {key: col for key, (_, col) in best.items()}
            self._dist, self._pred = check_distances(self.H, self.weights)

    def decode(self, syndrome) -> DecodeOutcome:
        syndrome = gf2.as_binary(syndrome).ravel()
        if not syndrome.any():
            corr = np.zeros(self.H.shape[1], dtype=np.uint8)
        elif self.backend == "pymatching":
            corr = np.asarray(self._matching.decode(syndrome), dtype=np.uint8)
        else:
            corr = self._decode_networkx(syndrome)
        if not np.array_equal(gf2.matmul(self.H, corr), syndrome):
            raise SyndromeMismatch("matching correction does not reproduce the syndrome")
        return DecodeOutcome(corr, True, 0, float(self.weights[corr.astype(bool)].sum()))

    def decode_batch(self, syndromes) -> np.ndarray:
        syndromes = gf2.as_binary(np.atleast_2d(syndromes))
        if self.backend == "pymatching":
            out = np.asarray(self._matching.decode_batch(syndromes), dtype=np.uint8)
        else:
            out = np.array([self.decode(s).correction for s in syndromes], dtype=np.uint8)
        if not np.array_equal(gf2.matmul(out, self.H.T), syndromes):
            raise SyndromeMismatch("matching correction does not reproduce the syndrome")
        return out

    def _path_columns(self, source: int, target: int) -> list[int]:
        cols = []
        node = target
        while node != source:
            prev = int(self._pred[source, node])
            cols.append(self._edge_col[(min(prev, node), max(prev, node))])
            node = prev
        return cols

    def _decode_networkx(self, syndrome: np.ndarray) -> np.ndarray:
        m = self.H.shape[0]
        defects = np.nonzero(syndrome)[0].tolist()
        to_int = lambda w: int(round(w * WEIGHT_SCALE))  # noqa: E731
        big = to_int(np.nanmax(self._dist[np.isfinite(self._dist)])) * 2 + 1
        g = nx.Graph()
        for a, b in itertools.combinations(defects, 2):
            if np.isfinite(self._dist[a, b]):
                g.add_edge(("d", a), ("d", b), weight=big - to_int(self._dist[a, b]))
        for a in defects:
            if np.isfinite(self._dist[a, m]):
                g.add_edge(("d", a), ("b", a), weight=big - to_int(self._dist[a, m]))
        for a, b in itertools.combinations(defects, 2):
            g.add_edge(("b", a), ("b", b), weight=big)
        matching = nx.max_weight_matching(g, maxcardinality=True)
        corr = np.zeros(self.H.shape[1], dtype=np.uint8)
        for u, v in matching:
            if u[0] == "b" and v[0] == "b":
                continue
            if u[0] == "b":
                u, v = v, u
            target = m if v[0] == "b" else v[1]
            for col in self._path_columns(u[1], target):
                corr[col] ^= 1
        return corr


def brute_force_pairing(dist: np.ndarray, defects, boundary: int) -> float:
    """Minimum total cost over every way to pair defects or send them to the boundary."""
    defects = list(defects)
    if not defects:
        return 0.0
    first, rest = defects[0], defects[1:]
    best = dist[first, boundary] + brute_force_pairing(dist, rest, boundary)
    for i, other in enumerate(rest):
        remaining = rest[:i] + rest[i + 1 :]
        best = min(best, dist[first, other] + brute_force_pairing(dist, remaining, boundary))
    return best


@numba.njit(cache=True)
def _subset_dp(dist, bdist):
    k = bdist.size
    f = np.empty(1 << k)
    f[0] = 0.0
    for mask in range(1, 1 << k):
        i = 0
        while not (mask >> i) & 1:
            i += 1
        rest = mask ^ (1 << i)
        best = f[rest] + bdist[i]
        r = rest
        while r:
            j = 0
            while not (r >> j) & 1:
                j += 1
            r ^= 1 << j
            c = f[rest ^ (1 << j)] + dist[i, j]
            if c < best:
                best = c
        f[mask] = best
    return f


def min_pairing_costs(H, weights=None) -> np.ndarray:
    """Exact minimum pairing cost for every defect subset (indexed by bitmask).

    Exponential in the number of checks; intended for small graphs (<= 22 checks).
    """
    H = gf2.as_binary(np.atleast_2d(H))
    m = H.shape[0]
    if m > 22:
        raise ValueError("subset oracle limited to 22 checks")
    dist, _ = check_distances(H, weights)
    return _subset_dp(np.ascontiguousarray(dist[:m, :m]), np.ascontiguousarray(dist[:m, m]))
