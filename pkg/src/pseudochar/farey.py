"""Finite slices of the Farey graph and the PSL(2,Z) action on them.

Vertices are reduced fractions p/q (q > 0) with infinity written 1/0; p/q
and r/s are adjacent when ps - qr = +-1. A slice keeps the fractions of a
window with denominator at most Q, plus infinity.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .bottleneck import MetricGraph, bottleneck_delta
from .groups import PSL2ZModel, psl_canonical

A = (1, 1, 0, 1)
B = (1, 0, -1, 1)
I = (1, 0, 0, 1)
INF = (1, 0)
_model = PSL2ZModel()


def vertex(p: int, q: int) -> tuple[int, int]:
    """Reduced form with q >= 0; every p/0 is infinity."""
    if q == 0:
        if p == 0:
            raise ValueError("0/0 is not a vertex")
        return INF
    g = gcd(p, q)
    p, q = p // g, q // g
    return (-p, -q) if q < 0 else (p, q)


def parse_vertex(text: str) -> tuple[int, int]:
    text = text.strip()
    if text in ("inf", "oo", "∞"):
        return INF
    p, _, q = text.partition("/")
    return vertex(int(p), int(q or 1))


def fmt(v) -> str:
    return f"{v[0]}/{v[1]}"


def adjacent(u, v) -> bool:
    return abs(u[0] * v[1] - u[1] * v[0]) == 1


def mobius_act(M, v):
    a, b, c, d = M
    if a * d - b * c != 1:
        raise ValueError(f"determinant of {M} is not 1")
    p, q = v
    return vertex(a * p + b * q, c * p + d * q)


def mat_mul(x, y):
    return _model.mul(x, y)


def mat_inv(x):
    return _model.inv(x)


def finite_order_check(M, budget: int = 12) -> int | None:
    """Least n <= budget with M^n = +-I, or None."""
    M = psl_canonical(M)
    P = I
    for n in range(1, budget + 1):
        P = mat_mul(P, M)
        if P == I:
            return n
    return None


@dataclass
class FareyGraph:
    Q: int
    window: tuple[Fraction, Fraction]
    vertices: list[tuple[int, int]]
    edges: list[tuple[int, int]]
    index: dict = field(default_factory=dict)
    _metric: MetricGraph | None = None

    def __post_init__(self):
        self.index = {v: i for i, v in enumerate(self.vertices)}

    def __contains__(self, v) -> bool:
        return v in self.index

    def __len__(self):
        return len(self.vertices)

    def metric(self) -> MetricGraph:
        if self._metric is None:
            self._metric = MetricGraph(range(len(self)), self.edges)
        return self._metric

    def distances(self) -> np.ndarray:
        """Hop distances (the slice is connected)."""
        g = self.metric()
        if len(self) == 1:
            return np.zeros((1, 1), dtype=np.int64)
        return g.int_distances() // int(1 / g.unit)

    def to_json(self) -> dict:
        return {"Q": self.Q, "window": [str(w) for w in self.window],
                "vertices": [fmt(v) for v in self.vertices],
                "edges": [[fmt(self.vertices[i]), fmt(self.vertices[j])] for i, j in self.edges]}

    def to_dot(self) -> str:
        lines = ["graph farey {"]
        for v in self.vertices:
            lines.append(f'  "{fmt(v)}";')
        for i, j in self.edges:
            lines.append(f'  "{fmt(self.vertices[i])}" -- "{fmt(self.vertices[j])}";')
        lines.append("}")
        return "\n".join(lines)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def farey_graph(Q: int, window=(0, 1), infinity: bool = True) -> FareyGraph:
    if Q < 1:
        raise ValueError("Q must be at least 1")
    lo, hi = Fraction(window[0]), Fraction(window[1])
    verts = []
    for q in range(1, Q + 1):
        for p in range(int(np.floor(lo * q)), int(np.ceil(hi * q)) + 1):
            if gcd(p, q) == 1 and lo <= Fraction(p, q) <= hi:
                verts.append((p, q))
    verts.sort(key=lambda v: (v[1], Fraction(*v)))
    if infinity:
        verts.append(INF)
    P = np.array([v[0] for v in verts], dtype=np.int64)
    S = np.array([v[1] for v in verts], dtype=np.int64)
    det = np.abs(np.outer(P, S) - np.outer(S, P))
    a, b = np.nonzero(np.triu(det == 1, 1))
    edges = list(zip(a.tolist(), b.tolist()))
    return FareyGraph(Q, (lo, hi), verts, edges)


def edge_preservation(fg: FareyGraph, max_length: int = 4) -> dict:
    """Every word in A, B and inverses up to ``max_length`` maps edges with
    in-slice images to edges."""
    letters = [A, mat_inv(A), B, mat_inv(B)]
    checked = broken = 0
    seen = {I}
    frontier = [I]
    for _ in range(max_length):
        nxt = []
        for M in frontier:
            for L in letters:
                N = mat_mul(M, L)
                if N not in seen:
                    seen.add(N)
                    nxt.append(N)
        frontier = nxt
    for M in seen:
        img = [mobius_act(M, v) for v in fg.vertices]
        for i, j in fg.edges:
            if img[i] in fg and img[j] in fg:
                checked += 1
                broken += not adjacent(img[i], img[j])
    return {"matrices": len(seen), "checked": checked, "violations": broken}


def orbit(base, word_length: int, generators=(A, B), inverses: bool = True) -> set:
    letters = list(generators) + ([mat_inv(g) for g in generators] if inverses else [])
    points = {base}
    frontier = {base}
    for _ in range(word_length):
        frontier = {mobius_act(L, v) for v in frontier for L in letters}
        points |= frontier
    return points


def orbit_diameter(fg: FareyGraph, base, word_length: int, generators=(A, B)) -> tuple[int, dict]:
    """Diameter of the in-slice part of the orbit of ``base`` under words of
    length <= word_length; the report counts the orbit points left out."""
    if base not in fg:
        raise ValueError(f"{fmt(base)} is not in the slice")
    pts = orbit(base, word_length, generators)
    inside = sorted(fg.index[v] for v in pts if v in fg)
    D = fg.distances()
    diam = int(D[np.ix_(inside, inside)].max()) if inside else 0
    return diam, {"orbit_points": len(pts), "in_slice": len(inside), "escaped": len(pts) - len(inside)}


def farey_bottleneck_stability(Qs, window=(0, 1)) -> dict:
    """Bottleneck constants of nested slices and the distance drift between them."""
    Qs = list(Qs)
    if Qs != sorted(Qs):
        raise ValueError("Qs must increase")
    rows = []
    prev = None
    for Q in Qs:
        fg = farey_graph(Q, window)
        res = bottleneck_delta(fg.metric())
        row = {"Q": Q, "vertices": len(fg), "edges": len(fg.edges), "delta": res.delta,
               "witness": [fmt(fg.vertices[v]) for v in res.witness_pair] if res.witness_pair else None}
        if prev is not None:
            pfg, pD = prev
            D = fg.distances()
            idx = [fg.index[v] for v in pfg.vertices]
            sub = D[np.ix_(idx, idx)]
            row["shared_pairs_shorter"] = int((sub < pD).sum() // 2)
            row["shared_pairs_longer"] = int((sub > pD).sum() // 2)
            row["stable"] = res.delta <= rows[-1]["delta"] + 1
        rows.append(row)
        prev = (fg, fg.distances())
    return {"rows": rows, "stable": all(r.get("stable", True) for r in rows)}
