"""Approximate a bottleneck graph by a tree.

Starting from a basepoint, each round removes the open R-neighbourhood of
the points chosen so far (R = 20 delta). Every remaining component C
contributes one new point v_C from its front (the points of C closest to
the chosen set), joined in the tree to the unique earlier point of the
component of the previous round that contains it.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .bottleneck import MetricGraph, bottleneck_delta
from .errors import ConsistencyError, DegenerateInput


@dataclass
class TreeApprox:
    graph: MetricGraph
    basepoint: object
    delta: Fraction
    R: Fraction
    beta: list[int]          # tree vertex -> graph vertex index
    parent: list[int]        # -1 at the root
    level: list[int]         # round in which the tree vertex was added
    components: list[list[dict]] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.beta)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v, p in enumerate(self.parent) if p >= 0]

    def levels(self) -> list[list[int]]:
        """Graph vertices of V_0, V_1, ... (cumulative)."""
        out, acc = [], []
        for k in range(max(self.level, default=-1) + 1):
            acc = acc + [self.beta[v] for v in range(len(self)) if self.level[v] == k]
            out.append(list(acc))
        return out

    def tree_distances(self) -> np.ndarray:
        n = len(self)
        adj = [[] for _ in range(n)]
        for p, v in self.edges:
            adj[p].append(v)
            adj[v].append(p)
        out = np.full((n, n), -1, dtype=np.int64)
        for s in range(n):
            out[s, s] = 0
            queue = deque([s])
            while queue:
                a = queue.popleft()
                for b in adj[a]:
                    if out[s, b] < 0:
                        out[s, b] = out[s, a] + 1
                        queue.append(b)
        return out

    def image_distance(self, a: int, b: int) -> Fraction:
        g = self.graph
        return g.int_distances()[self.beta[a], self.beta[b]] * g.unit

    def to_json(self) -> dict:
        name = self.graph.vertices
        return {
            "basepoint": self.basepoint, "delta": str(self.delta), "R": str(self.R),
            "vertices": [{"id": v, "beta": name[b], "level": self.level[v], "parent": self.parent[v]}
                         for v, b in enumerate(self.beta)],
            "edges": [[p, v, str(self.image_distance(p, v))] for p, v in self.edges],
            "stats": self.stats,
        }

    def to_dot(self) -> str:
        name = self.graph.vertices
        lines = ["graph gamma {"]
        for v, b in enumerate(self.beta):
            lines.append(f'  p{v} [label="{name[b]}"];')
        for p, v in self.edges:
            lines.append(f'  p{p} -- p{v} [label="{self.image_distance(p, v)}"];')
        lines.append("}")
        return "\n".join(lines)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, default=str)


def _csr(g: MetricGraph):
    n = len(g)
    w = g.int_lengths()
    rows = [i for i, _, _ in g.edges] + [j for _, j, _ in g.edges]
    cols = [j for _, j, _ in g.edges] + [i for i, _, _ in g.edges]
    return csr_matrix((np.array(w + w, dtype=float), (rows, cols)), shape=(n, n))


def build_tree(g: MetricGraph, basepoint=None, delta=None, strict: bool = True) -> TreeApprox:
    """Run the construction; ``delta`` overrides the measured bottleneck constant.

    The growth bounds (front within 6 delta of v_C, edge images in
    [R, R + 6 delta + step]) are checked as the tree grows. Violations raise
    ConsistencyError when ``strict`` and delta was measured, and are
    recorded in ``stats`` otherwise.
    """
    if basepoint is None:
        basepoint = g.vertices[0]
    if basepoint not in g.index:
        raise DegenerateInput(f"basepoint {basepoint!r} is not a vertex")
    overridden = delta is not None
    if delta is None:
        delta = bottleneck_delta(g).delta
    delta = Fraction(delta)
    n = len(g)
    if n == 1:
        return TreeApprox(g, basepoint, delta, 20 * delta, [0], [-1], [0], [], {"rounds": 0})
    if delta <= 0:
        raise DegenerateInput("delta must be positive")
    g.int_distances()  # raises on disconnected input
    unit = g.unit
    R = 20 * delta
    Ri = R / unit
    step = min(g.int_lengths())
    six = 6 * delta / unit
    A = _csr(g)
    root = g.index[basepoint]
    beta, parent, level = [root], [-1], [0]
    # component label of every vertex in the previous round (all one component at the start)
    prev_label = np.zeros(n, dtype=np.int64)
    owner = {0: 0}  # previous component -> its tree vertex
    rounds = []
    violations = {"front": [], "edge": []}
    worst = {"front": 0, "edge_low": None, "edge_high": 0}
    k = 0
    while True:
        k += 1
        d = dijkstra(A, indices=[beta[v] for v in range(len(beta))], min_only=True)
        d = np.rint(d).astype(np.int64)
        keep = d >= Ri
        if not keep.any():
            break
        idx = np.nonzero(keep)[0]
        sub = A[idx][:, idx]
        ncomp, lab = connected_components(sub, directed=False)
        label = np.full(n, -1, dtype=np.int64)
        label[idx] = lab
        comps = []
        new_owner = {}
        for c in range(ncomp):
            members = idx[lab == c]
            dmin = d[members].min()
            front = members[d[members] == dmin]
            v = int(front.min())
            parents = {int(prev_label[u]) for u in members}
            if len(parents) != 1 or -1 in parents:
                raise ConsistencyError(f"round {k}: component of {g.vertices[v]!r} is not inside one earlier component")
            w = owner[parents.pop()]
            t = len(beta)
            beta.append(v)
            parent.append(w)
            level.append(k)
            new_owner[c] = t
            D = g.int_distances()
            far = int(D[v, front].max())
            edge = int(D[v, beta[w]])
            worst["front"] = max(worst["front"], far)
            worst["edge_high"] = max(worst["edge_high"], edge)
            worst["edge_low"] = edge if worst["edge_low"] is None else min(worst["edge_low"], edge)
            if far > six + step:
                violations["front"].append((g.vertices[v], far * unit))
            if not (Ri <= edge <= Ri + six + step):
                violations["edge"].append((g.vertices[beta[w]], g.vertices[v], edge * unit))
            comps.append({"v": g.vertices[v], "size": int(len(members)), "front": int(len(front)),
                          "distance_to_set": dmin * unit, "parent": w})
        rounds.append(comps)
        prev_label, owner = label, new_owner
    nv = len(beta)
    stats = {
        "rounds": k - 1, "vertices": nv, "edges": nv - 1,
        "max_front_distance": worst["front"] * unit,
        "edge_min": (worst["edge_low"] or 0) * unit, "edge_max": worst["edge_high"] * unit,
        "front_violations": violations["front"], "edge_violations": violations["edge"],
        "delta_overridden": overridden,
    }
    t = TreeApprox(g, basepoint, delta, R, beta, parent, level, rounds, stats)
    _check_tree(t)
    if strict and not overridden and (violations["front"] or violations["edge"]):
        raise ConsistencyError(f"bound violations: {violations}")
    return t


def _check_tree(t: TreeApprox):
    n = len(t)
    if len(t.edges) != n - 1:
        raise ConsistencyError("gamma does not have |V| - 1 edges")
    if n and (t.tree_distances()[0] < 0).any():
        raise ConsistencyError("gamma is disconnected")
    if len(set(t.beta)) != n:
        raise ConsistencyError("beta is not injective on vertices")


@dataclass
class QIReport:
    pairs: int
    violations: list
    upper_ratio: Fraction | None
    lower_ratio: Fraction | None
    worst_lower_slack: Fraction | None
    worst_upper_slack: Fraction | None
    window: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.__dict__.items()}


def interior_vertices(t: TreeApprox, fraction: float = 0.8) -> list[int]:
    D = t.graph.int_distances()
    root = t.graph.index[t.basepoint]
    ecc = int(D[root].max())
    return [v for v, b in enumerate(t.beta) if D[root, b] <= fraction * ecc]


def verify_qi(t: TreeApprox, g: MetricGraph | None = None, interior_fraction: float = 0.8,
              rows: list | None = None) -> QIReport:
    """Check 8 delta d - 16 delta <= d(beta x, beta y) <= 26 delta d on interior pairs.

    ``rows``, if given, receives (x, y, tree distance, image distance, ok).
    Slacks are image distance minus the bound (lower) and bound minus image
    distance (upper); a negative slack is a violation.
    """
    g = g or t.graph
    dl = t.delta
    inner = interior_vertices(t, interior_fraction)
    T = t.tree_distances()
    D = g.int_distances()
    violations = []
    up = lo = slack_lo = slack_hi = None
    count = 0
    for a_i, a in enumerate(inner):
        for b in inner[a_i + 1:]:
            n = int(T[a, b])
            dy = D[t.beta[a], t.beta[b]] * g.unit
            low, high = 8 * dl * n - 16 * dl, 26 * dl * n
            good = low <= dy <= high
            count += 1
            r = dy / n
            up = r if up is None else max(up, r)
            lo = r if lo is None else min(lo, r)
            slack_lo = dy - low if slack_lo is None else min(slack_lo, dy - low)
            slack_hi = high - dy if slack_hi is None else min(slack_hi, high - dy)
            if not good:
                violations.append((g.vertices[t.beta[a]], g.vertices[t.beta[b]], n, dy))
            if rows is not None:
                rows.append((g.vertices[t.beta[a]], g.vertices[t.beta[b]], n, dy, good))
    return QIReport(count, violations, up, lo, slack_lo, slack_hi, (8 * dl, -16 * dl, 26 * dl))


def coarse_surjectivity_check(t: TreeApprox, g: MetricGraph | None = None, strict: bool = True) -> Fraction:
    """Largest distance from a graph vertex to the image of the tree's vertices."""
    g = g or t.graph
    if len(g) == 1:
        return Fraction(0)
    d = dijkstra(_csr(g), indices=t.beta, min_only=True)
    worst = int(np.rint(d).max()) * g.unit
    if strict and worst >= t.R + 7 * t.delta:
        raise ConsistencyError(f"vertex at distance {worst} from the image, not below R + 7 delta")
    return worst


def random_tree(n: int, seed: int = 0) -> list[tuple[int, int]]:
    """Edges of a uniformly random labelled tree (Pruefer decoding)."""
    import heapq
    import random

    if n <= 2:
        return [(0, 1)] if n == 2 else []
    rng = random.Random(seed)
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return edges


def tree_with_chords(n: int, chords: int, seed: int = 0) -> MetricGraph:
    """Random tree plus unit chords between vertices two apart in the tree.

    A chord shortcuts a path of length 2, so its slack (tree distance minus
    chord length) is 1.
    """
    import random

    edges = random_tree(n, seed)
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    rng = random.Random(seed + 1)
    have = {frozenset(e) for e in edges}
    centres = [c for c in range(n) if len(adj[c]) >= 2]
    added = 0
    while added < chords:
        c = rng.choice(centres)
        u, v = rng.sample(adj[c], 2)
        if frozenset((u, v)) not in have:
            have.add(frozenset((u, v)))
            edges.append((u, v))
            added += 1
    return MetricGraph(range(n), edges)
