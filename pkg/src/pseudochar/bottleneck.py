"""Bottleneck constants of finite metric graphs.

Edges carry positive rational lengths. Midpoints are realized by
subdividing every edge once (finer when lengths differ); distances stay in
the original metric, so a half-edge of a unit graph has length 1/2 and a
tree has constant 1/2.

For a pair ``x, y`` and a midpoint ``m`` let ``M`` be the largest value,
over all ``x``-``y`` paths, of the path's closest approach to ``m``. The pair's
constant is the least realized distance from ``m`` above ``M`` (the
smallest open ball about ``m`` whose removal separates ``x`` from ``y``),
minimized over midpoints.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from ._dsu import UnionFind


class DisconnectedError(ValueError):
    pass


class MetricGraph:
    """Undirected graph with positive rational edge lengths."""

    def __init__(self, vertices, edges, subdivided: bool = False):
        self.vertices = list(vertices)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        if len(self.index) != len(self.vertices):
            raise ValueError("duplicate vertex labels")
        es = {}
        for e in edges:
            u, v = e[0], e[1]
            length = Fraction(e[2]) if len(e) > 2 else Fraction(1)
            if length <= 0:
                raise ValueError("edge lengths must be positive")
            i, j = self.index[u], self.index[v]
            if i == j:
                continue
            key = (min(i, j), max(i, j))
            es[key] = min(length, es.get(key, length))
        self.edges = [(i, j, L) for (i, j), L in sorted(es.items())]
        self.subdivided = subdivided
        self._dist = None
        self._sub = None
        self._adj = None
        # integer unit: every distance, midpoints included, is a multiple
        den = 1
        for _, _, L in self.edges:
            den = lcm(den, L.denominator)
        self.unit = Fraction(1, 2 * den)

    # -- construction -----------------------------------------------------
    @classmethod
    def from_edges(cls, edges, vertices=None):
        if vertices is None:
            seen = {}
            for e in edges:
                seen.setdefault(e[0], None)
                seen.setdefault(e[1], None)
            vertices = list(seen)
        return cls(vertices, edges)

    @classmethod
    def from_graph(cls, g):
        """Anything with ``nodes`` and ``edges(data=True)`` (e.g. a networkx graph)."""
        edges = [(u, v, d.get("length", d.get("weight", 1))) for u, v, d in g.edges(data=True)]
        return cls(list(g.nodes), edges)

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        vertices = data.get("vertices")
        edges = [tuple(e) if not isinstance(e, dict) else (e["u"], e["v"], e.get("length", 1))
                 for e in data["edges"]]
        edges = [(e[0], e[1], Fraction(str(e[2])) if len(e) > 2 else 1) for e in edges]
        return cls.from_edges(edges, vertices)

    @classmethod
    def from_dot(cls, text: str):
        import re
        edges = []
        for m in re.finditer(r'"?([\w.]+)"?\s*--\s*"?([\w.]+)"?\s*(\[[^\]]*\])?', text):
            length = 1
            if m.group(3):
                lm = re.search(r'(?:length|weight|len)\s*=\s*"?([\d/.]+)"?', m.group(3))
                if lm:
                    length = Fraction(lm.group(1))
            edges.append((m.group(1), m.group(2), length))
        return cls.from_edges(edges)

    def to_json(self) -> dict:
        return {"vertices": self.vertices,
                "edges": [[self.vertices[i], self.vertices[j], str(L)] for i, j, L in self.edges]}

    def __len__(self):
        return len(self.vertices)

    def adjacency(self) -> list[list[int]]:
        if self._adj is None:
            adj = [[] for _ in self.vertices]
            for i, j, _ in self.edges:
                adj[i].append(j)
                adj[j].append(i)
            self._adj = adj
        return self._adj

    # -- metric -------------------------------------------------------------
    def int_lengths(self) -> list[int]:
        return [int(L / self.unit) for _, _, L in self.edges]

    def int_distances(self) -> np.ndarray:
        """All-pairs distances in multiples of ``unit`` (exact integers)."""
        if self._dist is None:
            n = len(self.vertices)
            if n == 0:
                self._dist = np.zeros((0, 0), dtype=np.int64)
                return self._dist
            w = self.int_lengths()
            rows = [i for i, _, _ in self.edges] + [j for _, j, _ in self.edges]
            cols = [j for _, j, _ in self.edges] + [i for i, _, _ in self.edges]
            m = csr_matrix((np.array(w + w, dtype=float), (rows, cols)), shape=(n, n))
            d = shortest_path(m, method="D", directed=False)
            if np.isinf(d).any():
                i, j = map(int, np.argwhere(np.isinf(d))[0])
                raise DisconnectedError(f"{self.vertices[i]!r} and {self.vertices[j]!r} are not connected")
            self._dist = np.rint(d).astype(np.int64)
        return self._dist

    def dist(self, u, v) -> Fraction:
        D = self.int_distances()
        return D[self.index[u], self.index[v]] * self.unit

    def subdivide(self) -> "MetricGraph":
        """Graph on which every pair of vertices has its midpoints as vertices.

        With equal edge lengths each edge is split once and its midpoint is
        labelled ``("mid", k)``. Otherwise midpoints can fall anywhere on the
        grid of ``unit``, so edge ``k`` is cut into pieces of that length with
        interior points ``("mid", k, p)``.
        """
        if self._sub is None:
            verts = list(self.vertices)
            edges = []
            uniform = len({L for _, _, L in self.edges}) <= 1
            for k, (i, j, L) in enumerate(self.edges):
                u, v = self.vertices[i], self.vertices[j]
                if uniform:
                    verts.append(("mid", k))
                    edges += [(u, ("mid", k), L / 2), (("mid", k), v, L / 2)]
                    continue
                pieces = int(L / self.unit)
                chain = [u] + [("mid", k, p) for p in range(1, pieces)] + [v]
                verts += chain[1:-1]
                edges += [(a, b, self.unit) for a, b in zip(chain, chain[1:])]
            self._sub = MetricGraph(verts, edges, subdivided=True)
        return self._sub


def apsp(g: MetricGraph):
    """Exact distance matrix as nested lists of Fractions."""
    D = g.int_distances()
    return [[int(v) * g.unit for v in row] for row in D]


@dataclass
class BottleneckResult:
    delta: Fraction
    witness_pair: tuple | None
    witness_midpoint: object
    per_pair: dict = field(default_factory=dict)

    @property
    def delta_half_edges(self) -> Fraction:
        """The constant measured in half-edges of a unit graph."""
        return 2 * self.delta

    def to_json(self) -> dict:
        return {"delta": str(self.delta), "witness_pair": self.witness_pair,
                "witness_midpoint": self.witness_midpoint}

    def rows(self):
        for (x, y), (d, m) in self.per_pair.items():
            yield x, y, d, m


def _separates(adj, removed, s, t) -> bool:
    if removed[s] or removed[t]:
        return True
    seen = bytearray(len(adj))
    seen[s] = 1
    queue = deque([s])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if not seen[w] and not removed[w]:
                if w == t:
                    return False
                seen[w] = 1
                queue.append(w)
    return True


def midpoints(g: MetricGraph, x, y) -> list:
    """Vertices of the subdivided graph at distance d(x,y)/2 from both ends."""
    S = g.subdivide()
    D = S.int_distances()
    i, j = S.index[x], S.index[y]
    half = D[i, j]
    if half % 2:
        return []
    half //= 2
    return [S.vertices[m] for m in np.nonzero((D[i] == half) & (D[j] == half))[0]]


def bottleneck_pair(g: MetricGraph, x, y, detail: bool = False):
    """Pair constant by the literal deletion sweep on the subdivided graph.

    For every midpoint ``m`` the radius runs over the realized distances from
    ``m`` (then ``max + step``); the first radius whose open ball disconnects
    ``x`` from ``y`` (or swallows one of them) is the value at ``m``.
    With ``detail`` the per-midpoint values are returned as a dict.
    """
    S = g.subdivide()
    D = S.int_distances()
    adj = S.adjacency()
    i, j = S.index[x], S.index[y]
    if i == j:
        raise ValueError("x and y must differ")
    mids = midpoints(g, x, y)
    if not mids:
        raise RuntimeError(f"no midpoint for {x!r}, {y!r} after subdivision")
    step = min(S.int_lengths())
    per = {}
    for mid in mids:
        m = S.index[mid]
        row = D[m]
        radii = sorted(set(int(r) for r in row if r > 0)) + [int(row.max()) + step]
        # separation is monotone in the radius, so bisect
        lo, hi = 0, len(radii) - 1
        while lo < hi:
            k = (lo + hi) // 2
            if _separates(adj, row < radii[k], i, j):
                hi = k
            else:
                lo = k + 1
        per[mid] = radii[lo] * S.unit
    best = min(per.values())
    return per if detail else best


def _maximin_thresholds(S: MetricGraph, m: int, queries: list[tuple[int, int]], D) -> list[int]:
    """Largest ``t`` such that each query pair is joined inside ``{d(m, .) >= t}``."""
    row = D[m]
    order = np.argsort(-row, kind="stable")
    adj = S.adjacency()
    uf = UnionFind(len(S.vertices))
    added = bytearray(len(S.vertices))
    pending = dict(enumerate(queries))
    out = [0] * len(queries)
    k = 0
    n = len(order)
    while k < n and pending:
        level = row[order[k]]
        while k < n and row[order[k]] == level:
            v = int(order[k])
            added[v] = 1
            for w in adj[v]:
                if added[w]:
                    uf.union(v, w)
            k += 1
        for q, (a, b) in list(pending.items()):
            if added[a] and added[b] and uf.find(a) == uf.find(b):
                out[q] = int(level)
                del pending[q]
    return out


def pair_maximin(g: MetricGraph, x, y) -> dict:
    """Per midpoint, the best closest approach of an ``x``-``y`` path."""
    S = g.subdivide()
    D = S.int_distances()
    q = (S.index[x], S.index[y])
    return {mid: _maximin_thresholds(S, S.index[mid], [q], D)[0] * S.unit for mid in midpoints(g, x, y)}


def bottleneck_delta(g: MetricGraph, per_pair: bool = False, pairs=None) -> BottleneckResult:
    """Maximum pair constant over all pairs of original vertices.

    Pairs are grouped by midpoint; one descending union-find sweep per
    midpoint gives every pair's separation threshold at once.
    """
    n = len(g.vertices)
    if n < 2:
        return BottleneckResult(Fraction(0), None, None, {})
    S = g.subdivide()
    D = S.int_distances()
    step = min(S.int_lengths())
    if pairs is None:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        pairs = [(g.index[x], g.index[y]) for x, y in pairs]
    by_mid: dict[int, list[int]] = {}
    for q, (i, j) in enumerate(pairs):
        d = D[i, j]
        if d % 2:
            raise RuntimeError("odd distance after subdivision")
        for m in np.nonzero((D[i] == d // 2) & (D[j] == d // 2))[0]:
            by_mid.setdefault(int(m), []).append(q)
    best = [None] * len(pairs)
    realized = {}
    for m, qs in by_mid.items():
        ts = _maximin_thresholds(S, m, [pairs[q] for q in qs], D)
        if m not in realized:
            realized[m] = np.unique(D[m])
        vals = realized[m]
        for q, t in zip(qs, ts):
            k = np.searchsorted(vals, t, side="right")
            r = int(vals[k]) if k < len(vals) else int(vals[-1]) + step
            if best[q] is None or r < best[q][0]:
                best[q] = (r, m)
    top = max(range(len(pairs)), key=lambda q: (best[q][0], -q))
    r, m = best[top]
    i, j = pairs[top]
    table = {}
    if per_pair:
        table = {(g.vertices[a], g.vertices[b]): (best[q][0] * S.unit, S.vertices[best[q][1]])
                 for q, (a, b) in enumerate(pairs)}
    return BottleneckResult(r * S.unit, (g.vertices[i], g.vertices[j]), S.vertices[m], table)


# -- small graph builders used by demos, tests and the CLI -------------------

def path_graph(n: int) -> MetricGraph:
    return MetricGraph(range(n), [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> MetricGraph:
    return MetricGraph(range(n), [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> MetricGraph:
    return MetricGraph(range(n), [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(legs: int, length: int) -> MetricGraph:
    edges = []
    for leg in range(legs):
        prev = 0
        for k in range(1, length + 1):
            v = 1 + leg * length + (k - 1)
            edges.append((prev, v))
            prev = v
    return MetricGraph(range(1 + legs * length), edges)
