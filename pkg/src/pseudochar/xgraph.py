"""The quasi-tree X of a scaled pseudocharacter.

Vertices are pairs (g, tau) of a group element and a track. Two vertices
are joined when some translator h carries both tracks into one connected
component of a band f^-1[n - 3/2, n + 1/2]. Everything is computed inside
a finite ambient Cayley region, so edges can be missed but never invented:
a translate leaving the region only disqualifies that h, and a band
component of the region lies inside a component of the whole complex.

f is extended affinely over edges. Each edge changes f by less than 1/2
and bands have width 2, so the part of a band on an edge always reaches a
band vertex, and 2-cells never join pieces the 1-skeleton leaves apart.
Components are therefore computed on band vertices only.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from ._dsu import UnionFind
from .bottleneck import MetricGraph, bottleneck_delta
from .errors import DegenerateInput, PreconditionError
from .groups import CayleyBall, cayley_ball
from .slabtree import SlabTree, _check_scaled

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class TrackPoints:
    """A track as the points where it meets edges: (u, v, t) is u + t (v - u)."""

    id: int
    level: Fraction
    points: tuple


def _is_cayley_tree(oracle) -> bool:
    return oracle.model.kind == "free" and oracle._standard


def track_points(tree: SlabTree, track_ids=None) -> list[TrackPoints]:
    ball, vals = tree.ball, tree.values
    out = []
    for t in tree.tracks:
        if track_ids is not None and t.id not in track_ids:
            continue
        pts = []
        for k in t.crossings:
            i, _, j = ball.edges[k]
            fu, fv = vals[i], vals[j]
            pts.append((ball.elements[i], ball.elements[j], (t.level - fu) / (fv - fu)))
        out.append(TrackPoints(t.id, t.level, tuple(pts)))
    return out


def complete_tracks(tree: SlabTree, max_length: int | None = None) -> list[int]:
    """Tracks known in full: in a Cayley tree every track is one point;
    otherwise every crossing must have all its 2-cells inside the region."""
    ball = tree.ball
    tree_like = _is_cayley_tree(ball.oracle)
    if not tree_like and not ball.two_cells:
        raise PreconditionError("tracks are only defined through 2-cells; supply a triangular presentation")
    ids = []
    for t in tree.tracks:
        ends = [e for k in t.crossings for e in (ball.edges[k][0], ball.edges[k][2])]
        if not tree_like and min(ball.depth[e] for e in ends) < 1:
            continue
        if max_length is not None and max(ball.lengths[e] for e in ends) > max_length:
            continue
        ids.append(t.id)
    return ids


class _Bands:
    """Band components f^-1[n - 3/2, n + 1/2] of the ambient region, built lazily."""

    def __init__(self, ball: CayleyBall, values):
        self.ball = ball
        self.values = values
        self.labels: dict[int, list[int]] = {}

    def inside(self, n: int, i: int) -> bool:
        return n - Fraction(3, 2) <= self.values[i] <= n + HALF

    def label(self, n: int) -> list[int]:
        if n not in self.labels:
            uf = UnionFind(len(self.ball))
            for i, _, j in self.ball.edges:
                if self.inside(n, i) and self.inside(n, j):
                    uf.union(i, j)
            self.labels[n] = [uf.find(i) for i in range(len(self.ball))]
        return self.labels[n]


@dataclass
class XGraph:
    oracle: object
    f: object
    ambient: CayleyBall
    tracks: list[TrackPoints]
    vertices: list[tuple]            # (group element, index into tracks)
    adjacency: np.ndarray            # boolean matrix
    witness: dict                    # (a, b) with a < b -> (h, n)
    translators: list
    interior: list[bool]
    g_radius: int | None = None
    h_radius: int | None = None
    truncation: dict = field(default_factory=dict)
    _dist: np.ndarray | None = None

    def __len__(self):
        return len(self.vertices)

    @property
    def edges(self) -> list[tuple[int, int]]:
        a, b = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(a.tolist(), b.tolist()))

    def index(self, g, track: int) -> int | None:
        return self._index.get((g, track))

    def __post_init__(self):
        self._index = {v: k for k, v in enumerate(self.vertices)}

    def distances(self) -> np.ndarray:
        """Hop distances (-1 when disconnected)."""
        if self._dist is None:
            d = shortest_path(csr_matrix(self.adjacency.astype(np.int8)), unweighted=True, directed=False)
            d[np.isinf(d)] = -1
            self._dist = d.astype(np.int64)
        return self._dist

    def label(self, k: int) -> str:
        g, t = self.vertices[k]
        return f"({self.oracle.format(self.oracle.word_of(g))},t{self.tracks[t].id})"

    def metric_graph(self, subset=None) -> MetricGraph:
        keep = range(len(self)) if subset is None else sorted(subset)
        keep_set = set(keep)
        return MetricGraph(list(keep), [(a, b) for a, b in self.edges if a in keep_set and b in keep_set])

    def to_json(self) -> dict:
        return {
            "vertices": [{"id": k, "label": self.label(k), "interior": self.interior[k]} for k in range(len(self))],
            "edges": [list(e) for e in self.edges],
            "tracks": [{"id": t.id, "level": str(t.level), "points": len(t.points)} for t in self.tracks],
            "g_radius": self.g_radius, "h_radius": self.h_radius, "ambient_radius": self.ambient.radius,
            "truncation": self.truncation,
        }

    def to_dot(self) -> str:
        lines = ["graph X {"]
        for k in range(len(self)):
            style = "" if self.interior[k] else ", style=dashed"
            lines.append(f'  x{k} [label="{self.label(k)}"{style}];')
        for a, b in self.edges:
            lines.append(f"  x{a} -- x{b};")
        lines.append("}")
        return "\n".join(lines)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _translate(oracle, amb_index, values, hg, track: TrackPoints):
    """Translated points as (value, anchor candidates) or None if they leave the region."""
    out = []
    for u, v, t in track.points:
        i = amb_index.get(oracle.mul(hg, u))
        j = amb_index.get(oracle.mul(hg, v))
        if i is None or j is None:
            return None
        out.append((values[i] + t * (values[j] - values[i]), i, j))
    return out


def _keys(bands: _Bands, pts) -> list[tuple[int, int]]:
    """(n, component) pairs whose band component holds every translated point."""
    lo = min(p for p, _, _ in pts)
    hi = max(p for p, _, _ in pts)
    keys = []
    for n in range(ceil(hi - HALF), floor(lo + Fraction(3, 2)) + 1):
        lab = bands.label(n)
        comp = None
        for _, i, j in pts:
            a = i if bands.inside(n, i) else j if bands.inside(n, j) else None
            if a is None or (comp is not None and lab[a] != comp):
                comp = None
                break
            comp = lab[a]
        if comp is not None:
            keys.append((n, comp))
    return keys


def build_X(tree: SlabTree, g_radius: int = 4, h_radius: int = 3, ambient_radius: int = 10,
            track_radius: int | None = None, elements=None, translators=None, tracks=None,
            ambient: CayleyBall | None = None, interior_radius: int | None = None) -> XGraph:
    """Finite piece of X.

    By default vertices are (ball of g_radius) x (complete tracks of ``tree``
    reaching no further than ambient - g - h), translators run over the
    h_radius ball, and components are computed on the ambient_radius ball.
    ``elements``, ``translators`` (model elements), ``tracks`` (track ids)
    and ``ambient`` override these. Interior vertices are those whose group
    element has length at most ``interior_radius`` (default g_radius - 1).
    """
    oracle, f = tree.ball.oracle, tree.f
    if ambient is None:
        ambient = cayley_ball(oracle, ambient_radius, presentation=tree.ball.presentation)
    values = _check_scaled(ambient, f)
    if tracks is None:
        if track_radius is None:
            track_radius = ambient.radius - g_radius - h_radius
        tracks = complete_tracks(tree, track_radius)
    else:
        complete = set(complete_tracks(tree))
        bad = [t for t in tracks if t not in complete]
        if bad:
            raise PreconditionError(f"tracks {bad} are not known in full inside the slab-tree region")
    tps = track_points(tree, set(tracks))
    if elements is None:
        elements = cayley_ball(oracle, g_radius).elements
    if translators is None:
        translators = cayley_ball(oracle, h_radius).elements
    elements, translators = list(elements), list(translators)
    if not elements or not tps:
        raise DegenerateInput("X needs at least one element and one track")
    verts = [(g, t) for g in elements for t in range(len(tps))]
    nv = len(verts)
    bands = _Bands(ambient, values)
    adj = np.zeros((nv, nv), dtype=bool)
    witness = {}
    skipped = np.zeros(nv, dtype=np.int64)
    for hi, h in enumerate(translators):
        buckets: dict[tuple[int, int], list[int]] = {}
        for k, (g, t) in enumerate(verts):
            pts = _translate(oracle, ambient.index, values, oracle.mul(h, g), tps[t])
            if pts is None:
                skipped[k] += 1
                continue
            for key in _keys(bands, pts):
                buckets.setdefault(key, []).append(k)
        for (n, _), ks in buckets.items():
            if len(ks) < 2:
                continue
            ix = np.array(ks)
            block = adj[np.ix_(ix, ix)]
            new = ~block
            if new.any():
                for a_, b_ in zip(*np.nonzero(np.triu(new, 1))):
                    witness[(ks[a_], ks[b_])] = (h, n)
                adj[np.ix_(ix, ix)] = True
    np.fill_diagonal(adj, False)
    lengths = {x: len(oracle.word_of(x)) for x in set(elements)}
    if interior_radius is None:
        interior_radius = max(0, (g_radius if g_radius is not None else max(lengths.values())) - 1)
    interior = [lengths[g] <= interior_radius for g, _ in verts]
    non_edges_incomplete = 0
    if skipped.any():
        inc = skipped > 0
        pair_inc = inc[:, None] | inc[None, :]
        non_edges_incomplete = int(np.triu(pair_inc & ~adj, 1).sum())
    truncation = {
        "translations": nv * len(translators),
        "translations_skipped": int(skipped.sum()),
        "vertices_with_skips": int((skipped > 0).sum()),
        "non_edges_not_exhaustive": non_edges_incomplete,
    }
    return XGraph(oracle, f, ambient, tps, verts, adj, witness, translators, interior,
                  g_radius, h_radius, truncation)


# -- verification -----------------------------------------------------------

def interior_vertices(x: XGraph) -> list[int]:
    return [k for k in range(len(x)) if x.interior[k]]


def interior_connected(x: XGraph) -> bool:
    inner = interior_vertices(x)
    if not inner:
        return True
    sub = x.adjacency[np.ix_(inner, inner)]
    n, _ = connected_components(csr_matrix(sub.astype(np.int8)), directed=False)
    return n == 1


def verify_cobounded(x: XGraph, base: int = 0) -> int:
    """Largest distance from an interior vertex to the in-region orbit of ``base``."""
    _, t0 = x.vertices[base]
    orbit = [k for k, (g, t) in enumerate(x.vertices) if t == t0]
    D = x.distances()
    worst = 0
    for k in interior_vertices(x):
        ds = [int(D[k, o]) for o in orbit if D[k, o] >= 0]
        if not ds:
            raise PreconditionError(f"{x.label(k)} does not reach the orbit inside the region")
        worst = max(worst, min(ds))
    return worst


def _point_keys(x: XGraph, k: int):
    g, t = x.vertices[k]
    idx = x.ambient.index
    out = set()
    for u, v, s in x.tracks[t].points:
        i, j = idx.get(x.oracle.mul(g, u)), idx.get(x.oracle.mul(g, v))
        if i is None or j is None:
            return None
        out.add((i, j, s) if i < j else (j, i, 1 - s))
    return out


def _side(oracle, els, point, cut):
    """Which side of the cut point a track point lies on, in a Cayley tree.

    Points are (i, j, s) on ambient edges (i < j); returns 0/1, or None when
    the point is the cut point itself.
    """
    (ci, cj, cs), (pi, pj, ps) = cut, point
    if (ci, cj) == (pi, pj):
        if ps == cs:
            return None
        return 0 if ps < cs else 1
    u, v = els[ci], els[cj]
    w = els[pi]
    rel = oracle.mul(oracle.inv(u), w)
    step = oracle.mul(oracle.inv(u), v)
    # w lies beyond v exactly when the reduced word u^-1 w starts with the letter u^-1 v
    return 1 if rel[:1] == step else 0


def verify_separation_lemmas(x: XGraph) -> dict:
    """Exhaustive checks of the intersection and separation lemmas on interior vertices.

    Intersection: translated tracks sharing a point are at distance <= 1.
    Separation (Cayley trees only, where a track is one point): if (g_b, tau_b)
    separates a from c, deleting the radius-2 ball about b disconnects them.
    """
    inner = interior_vertices(x)
    D = x.distances()
    keys = {k: _point_keys(x, k) for k in inner}
    inner = [k for k in inner if keys[k] is not None]
    inter_checked = inter_bad = 0
    bad_pairs = []
    by_point: dict = {}
    for k in inner:
        for p in keys[k]:
            by_point.setdefault(p, []).append(k)
    seen = set()
    for ks in by_point.values():
        for a_i, a in enumerate(ks):
            for b in ks[a_i + 1:]:
                if (a, b) in seen:
                    continue
                seen.add((a, b))
                inter_checked += 1
                if not (0 <= D[a, b] <= 1):
                    inter_bad += 1
                    bad_pairs.append((x.label(a), x.label(b)))
    report = {"intersect_checked": inter_checked, "intersect_violations": inter_bad,
              "intersect_examples": bad_pairs[:5]}
    if not _is_cayley_tree(x.oracle):
        report["separation"] = "skipped: separation is decided exactly only in Cayley trees"
        return report
    els = x.ambient.elements
    sep_checked = sep_bad = 0
    examples = []
    A = csr_matrix(x.adjacency.astype(np.int8))
    for b in inner:
        (cut,) = keys[b]
        near = D[b] <= 2
        near &= D[b] >= 0
        sides: dict[int, list[int]] = {0: [], 1: []}
        for a in inner:
            if near[a]:
                continue
            s = {_side(x.oracle, els, p, cut) for p in keys[a]}
            if len(s) == 1 and None not in s:
                sides[s.pop()].append(a)
        if not sides[0] or not sides[1]:
            continue
        keep = np.nonzero(~near)[0]
        pos = {v: i for i, v in enumerate(keep)}
        _, lab = connected_components(A[keep][:, keep], directed=False)
        left = {lab[pos[a]] for a in sides[0]}
        sep_checked += len(sides[0]) * len(sides[1])
        for c in sides[1]:
            if lab[pos[c]] in left:
                sep_bad += 1
                if len(examples) < 5:
                    examples.append((x.label(b), x.label(c)))
    report.update(separation_checked=sep_checked, separation_violations=sep_bad,
                  separation_examples=examples)
    return report


def verify_equivariance(x: XGraph, shifts) -> dict:
    """Left translation by each shift c maps listed edges to listed edges.

    An edge found with witness h reappears between the translated vertices
    with witness h c^-1, so the check is exact whenever h c^-1 is one of the
    translators and both translated vertices are in the graph.
    """
    tset = set(x.translators)
    checked = broken = unverifiable = 0
    for (a, b), (h, _) in x.witness.items():
        (ga, ta), (gb, tb) = x.vertices[a], x.vertices[b]
        for c in shifts:
            ca, cb = x.index(x.oracle.mul(c, ga), ta), x.index(x.oracle.mul(c, gb), tb)
            if ca is None or cb is None:
                continue
            if x.oracle.mul(h, x.oracle.inv(c)) not in tset:
                unverifiable += 1
                continue
            checked += 1
            broken += not x.adjacency[ca, cb]
    return {"checked": checked, "violations": broken, "unverifiable": unverifiable,
            "symmetric": bool((x.adjacency == x.adjacency.T).all())}


def verify_x_bottleneck(x: XGraph, subset=None):
    """Bottleneck constant of the interior-induced subgraph (unit edges)."""
    inner = interior_vertices(x) if subset is None else list(subset)
    if not inner:
        raise DegenerateInput("no interior vertices")
    if len(inner) > 1:
        sub = x.adjacency[np.ix_(inner, inner)]
        n, _ = connected_components(csr_matrix(sub.astype(np.int8)), directed=False)
        if n != 1:
            raise PreconditionError(
                f"interior of X splits into {n} pieces; enlarge the translator or ambient radius "
                f"({x.truncation['translations_skipped']} translations were skipped)")
    return bottleneck_delta(x.metric_graph(inner))


def gromov_product(x: XGraph, base: int, u: int, v: int) -> Fraction:
    D = x.distances()
    if min(D[base, u], D[base, v], D[u, v]) < 0:
        raise PreconditionError("Gromov product needs the three vertices in one component")
    return Fraction(int(D[base, u]) + int(D[base, v]) - int(D[u, v]), 2)


def verify_end_injectivity(x: XGraph, base: int, ray_a: list[int], ray_b: list[int],
                           omega: int, slack: int = 11) -> dict:
    """Cross products stay bounded; products along one ray grow.

    ``ray_a`` and ``ray_b`` are vertices (1, tau_i) whose tracks each separate
    the base track from the next one along two different ends; ``omega`` is
    the track of the joining geodesic closest to the base.
    """
    if set(ray_a) & set(ray_b) or ray_a == ray_b:
        raise PreconditionError("the two ends must be represented by different track sequences")
    D = x.distances()
    bound = int(D[base, omega]) + slack
    cross = [(i, j, gromov_product(x, base, a, b)) for i, a in enumerate(ray_a) for j, b in enumerate(ray_b)
             if i >= 1 and j >= 1]
    same_bad = []
    for ray in (ray_a, ray_b):
        for i, a in enumerate(ray):
            for b in ray[i + 1:]:
                if gromov_product(x, base, a, b) < int(D[base, a]) - 2:
                    same_bad.append((x.label(a), x.label(b)))
    return {
        "bound": bound,
        "max_cross": max((c for _, _, c in cross), default=None),
        "cross_violations": [(i, j, str(c)) for i, j, c in cross if c > bound],
        "same_end_violations": same_bad,
        "consecutive_products": [[str(gromov_product(x, base, a, b)) for a, b in zip(ray, ray[1:])]
                                 for ray in (ray_a, ray_b)],
    }


def varpi_fibres(x: XGraph) -> dict:
    """Vertices grouped by the rounded value f(g) + f(tau)."""
    out: dict[int, int] = {}
    for g, t in x.vertices:
        v = x.f.value(g) + x.tracks[t].level
        key = floor(v + HALF)
        out[key] = out.get(key, 0) + 1
    return dict(sorted(out.items()))


def build_X_rays(tree: SlabTree, prefixes=("",), period: str = "a", K: int = 20, h_radius: int = 1,
                 margin: int | None = None, tracks=None) -> XGraph:
    """X on the elements p * period^k (|k| <= K) for each prefix word p.

    The ambient region is a neighbourhood of every translate h p period^k,
    wide enough for the tracks' crossing edges, so long stretches of X can
    be examined without a huge ball. All vertices count as interior.
    """
    oracle = tree.ball.oracle
    w = oracle.parse(period)
    elements = []
    for p in prefixes:
        base = oracle.element(oracle.parse(p))
        for k in range(-K, K + 1):
            x = oracle.mul(base, oracle.power(oracle.element(w), k))
            if x not in elements:
                elements.append(x)
    translators = cayley_ball(oracle, h_radius).elements
    if tracks is None:
        tracks = complete_tracks(tree)
    if margin is None:
        ball = tree.ball
        margin = max(ball.lengths[e] for t in tree.tracks if t.id in tracks
                     for k in t.crossings for e in (ball.edges[k][0], ball.edges[k][2]))
    centers = []
    seen = set()
    for h in translators:
        for g in elements:
            y = oracle.mul(h, g)
            if y not in seen:
                seen.add(y)
                centers.append(oracle.word_of(y))
    ambient = cayley_ball(oracle, margin, presentation=tree.ball.presentation, centers=centers)
    longest = max(len(oracle.word_of(g)) for g in elements)
    return build_X(tree, None, h_radius, elements=elements, translators=translators, tracks=tracks,
                   ambient=ambient, interior_radius=longest)


# -- quasi-actions to actions -------------------------------------------------

@dataclass
class ActionGraphY:
    """Graph on elements x points with (g, x) ~ (g', x') when some h brings
    (hg)x and (hg')x' closer than 2C; G acts by left multiplication."""

    elements: list
    points: list
    C: Fraction
    adjacency: np.ndarray
    witness: dict
    translators: list
    report: dict = field(default_factory=dict)

    def __post_init__(self):
        self._index = {(g, p): k for k, (g, p) in enumerate(self.vertices)}

    @property
    def vertices(self) -> list[tuple]:
        return [(g, p) for g in self.elements for p in self.points]

    def index(self, g, p) -> int | None:
        return self._index.get((g, p))

    def __len__(self):
        return len(self.elements) * len(self.points)

    def distances(self) -> np.ndarray:
        d = shortest_path(csr_matrix(self.adjacency.astype(np.int8)), unweighted=True, directed=False)
        d[np.isinf(d)] = -1
        return d.astype(np.int64)


def quasiaction_to_action(oracle, elements, points, act, dist, C, translators=None,
                          require_closed: bool = False) -> ActionGraphY:
    """Build Y from a quasi-action ``act(g, x)`` with metric ``dist`` and constant C.

    Checks that left multiplication maps edges to edges whenever the moved
    witness is still a translator, and that the conjugating map x -> (1, x)
    moves A(g, x) to within one edge of g (1, x). Pairs whose translate
    A(g, x) is not a sample point are listed under ``missing`` (an error
    with ``require_closed``).
    """
    C = Fraction(C)
    elements, points = list(elements), list(points)
    translators = list(elements if translators is None else translators)
    if C <= 0:
        raise DegenerateInput("the quasi-action constant must be positive")
    ne, npt = len(elements), len(points)
    nv = ne * npt
    adj = np.zeros((nv, nv), dtype=bool)
    witness = {}
    if nv:
        for h in translators:
            hv = [oracle.mul(h, g) for g in elements]
            img = [[act(hg, p) for p in points] for hg in hv]
            flat = [y for row in img for y in row]
            for a in range(nv):
                ya = flat[a]
                for b in range(a + 1, nv):
                    if not adj[a, b] and dist(ya, flat[b]) < 2 * C:
                        adj[a, b] = adj[b, a] = True
                        witness[(a, b)] = h
    Y = ActionGraphY(elements, points, C, adj, witness, translators)
    eidx = {g: i for i, g in enumerate(elements)}
    pidx = {p: i for i, p in enumerate(points)}
    tset = set(translators)
    checked = unverifiable = broken = 0
    for (a, b), h in witness.items():
        ga, pa = divmod(a, npt)
        gb, pb = divmod(b, npt)
        for c in translators:
            ca, cb = eidx.get(oracle.mul(c, elements[ga])), eidx.get(oracle.mul(c, elements[gb]))
            if ca is None or cb is None:
                continue
            if oracle.mul(h, oracle.inv(c)) not in tset:
                unverifiable += 1
                continue
            checked += 1
            if not adj[ca * npt + pa, cb * npt + pb]:
                broken += 1
    D = Y.distances()
    one = eidx.get(oracle.identity)
    missing = []
    worst = 0
    disp = 0
    if one is not None:
        for gi, g in enumerate(elements):
            for pi, p in enumerate(points):
                q = act(g, p)
                if q not in pidx:
                    missing.append((oracle.format(oracle.word_of(g)), p))
                    continue
                d = D[one * npt + pidx[q], gi * npt + pi]
                disp += 1
                worst = max(worst, int(d) if d >= 0 else 1 << 30)
    if require_closed and missing:
        raise PreconditionError(f"sample not closed under the quasi-action; missing images for {missing[:10]}")
    Y.report = {"edges": int(adj.sum() // 2), "isometry_checked": checked, "isometry_violations": broken,
                "isometry_unverifiable": unverifiable, "displacement_checked": disp,
                "max_displacement": worst, "missing": missing}
    return Y
