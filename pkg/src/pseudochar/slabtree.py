"""Cut a Cayley region along the half-integer levels of a scaled pseudocharacter.

Vertex spaces are the components of the 1-skeleton once every edge whose
endpoints round to different integers is removed. Crossing edges at one
level are glued into tracks through shared 2-cells, and tracks joining the
same two vertex spaces are identified (T has no multiple edges). The
result is the truncated tree T with its level map.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

from ._dsu import UnionFind
from .errors import ConsistencyError, PreconditionError
from .groups import CayleyBall, cayley_ball
from .quasichar import PseudocharacterScaled, is_half_integer

# an object is trusted when one of its vertices is this far from the boundary
INTERIOR_DEPTH = 2


def nearest_level(v: Fraction) -> int:
    return floor(v + Fraction(1, 2))


@dataclass
class VertexSpace:
    id: int
    level: int
    members: list[int]
    interior: bool


@dataclass
class Track:
    id: int
    level: Fraction
    crossings: list[int]
    sides: tuple[int, int]  # (lower vertex space, upper vertex space)
    interior: bool


@dataclass
class SlabTree:
    ball: CayleyBall
    f: PseudocharacterScaled
    values: list[Fraction]
    space_of: list[int]
    vertex_spaces: list[VertexSpace]
    tracks: list[Track]
    stats: dict = field(default_factory=dict)

    @property
    def radius(self):
        return self.ball.radius

    @property
    def interior_radius(self):
        return max(0, self.ball.radius - INTERIOR_DEPTH)

    @property
    def adjacency(self) -> dict[int, tuple[int, int]]:
        return {t.id: t.sides for t in self.tracks}

    def fbar(self, v) -> int:
        if isinstance(v, VertexSpace):
            v = v.id
        return self.vertex_spaces[v].level

    @property
    def root(self) -> int:
        return self.space_of[self.ball.index[self.ball.oracle.identity]]

    def locate(self, x) -> int | None:
        """Vertex space of a model element, or None outside the region."""
        i = self.ball.index.get(x)
        return None if i is None else self.space_of[i]

    def neighbours(self) -> list[list[int]]:
        adj = [[] for _ in self.vertex_spaces]
        for t in self.tracks:
            lo, hi = t.sides
            adj[lo].append(hi)
            adj[hi].append(lo)
        return adj

    def levels_count(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for v in self.vertex_spaces:
            out[v.level] = out.get(v.level, 0) + 1
        return dict(sorted(out.items()))

    def to_json(self) -> dict:
        words = self.ball.words
        fmt = self.ball.oracle.format
        return {
            "radius": self.radius,
            "scale": str(self.f.scale),
            "vertex_spaces": [
                {"id": v.id, "level": v.level, "size": len(v.members), "interior": v.interior,
                 "sample": fmt(words[min(v.members, key=lambda i: self.ball.lengths[i])])}
                for v in self.vertex_spaces
            ],
            "tracks": [
                {"id": t.id, "level": str(t.level), "sides": list(t.sides),
                 "crossings": len(t.crossings), "interior": t.interior}
                for t in self.tracks
            ],
            "stats": self.stats,
        }

    def to_dot(self) -> str:
        lines = ["graph slabtree {"]
        for v in self.vertex_spaces:
            style = "" if v.interior else ", style=dashed"
            lines.append(f'  v{v.id} [label="L{v.level} n={len(v.members)}"{style}];')
        for t in self.tracks:
            lines.append(f'  v{t.sides[0]} -- v{t.sides[1]} [label="{t.level}"];')
        lines.append("}")
        return "\n".join(lines)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _check_scaled(ball: CayleyBall, f) -> list[Fraction]:
    if not isinstance(f, PseudocharacterScaled):
        raise PreconditionError("slab trees need a scaled pseudocharacter (see scale_normalize)")
    if f.scaled_epsilon >= Fraction(1, 4):
        raise PreconditionError(f"scaled epsilon {f.scaled_epsilon} is not below 1/4")
    values = [f.value(x) for x in ball.elements]
    for i, v in enumerate(values):
        if is_half_integer(v):
            raise PreconditionError(
                f"{ball.oracle.format(ball.words[i])} has half-integer value {v}; rescale on a larger ball")
    for i, _, j in ball.edges:
        if abs(values[i] - values[j]) >= Fraction(1, 2):
            raise PreconditionError("an edge changes f by 1/2 or more; the scale is too coarse")
    return values


def build_vertex_spaces(ball: CayleyBall, f: PseudocharacterScaled, values=None) -> tuple[list[VertexSpace], list[int]]:
    if values is None:
        values = _check_scaled(ball, f)
    level = [nearest_level(v) for v in values]
    uf = UnionFind(len(ball))
    for i, _, j in ball.edges:
        if level[i] == level[j]:
            uf.union(i, j)
    label = uf.labels()
    members: list[list[int]] = [[] for _ in range(max(label, default=-1) + 1)]
    for i, c in enumerate(label):
        members[c].append(i)
    spaces = []
    for c, ms in enumerate(members):
        interior = any(ball.depth[i] >= INTERIOR_DEPTH for i in ms)
        spaces.append(VertexSpace(c, level[ms[0]], ms, interior))
    return spaces, label


def build_tracks(ball: CayleyBall, f: PseudocharacterScaled, values=None, space_of=None,
                 stats: dict | None = None) -> list[Track]:
    if values is None:
        values = _check_scaled(ball, f)
    if space_of is None:
        _, space_of = build_vertex_spaces(ball, f, values)
    stats = {} if stats is None else stats
    level = [nearest_level(v) for v in values]
    crossing = [k for k, (i, _, j) in enumerate(ball.edges) if level[i] != level[j]]
    slot = {k: n for n, k in enumerate(crossing)}
    uf = UnionFind(len(crossing))

    def half(k):
        i, _, j = ball.edges[k]
        return Fraction(min(level[i], level[j])) + Fraction(1, 2)

    glued = 0
    for cell in ball.two_cells:
        by_level: dict[Fraction, list[int]] = {}
        for k in cell:
            if k in slot:
                by_level.setdefault(half(k), []).append(slot[k])
        for h, ks in by_level.items():
            if len(ks) != 2:
                raise ConsistencyError(f"two-cell {cell} meets level {h} in {len(ks)} edges")
            glued += uf.union(ks[0], ks[1])

    def sides(k):
        i, _, j = ball.edges[k]
        return (space_of[i], space_of[j]) if level[i] < level[j] else (space_of[j], space_of[i])

    by_sides: dict[tuple[int, int], int] = {}
    merged = 0
    for n, k in enumerate(crossing):
        key = sides(k)
        if key in by_sides:
            merged += uf.union(by_sides[key], n)
        else:
            by_sides[key] = n
    label = uf.labels()
    groups: list[list[int]] = [[] for _ in range(max(label, default=-1) + 1)]
    for n, c in enumerate(label):
        groups[c].append(crossing[n])
    tracks = []
    for c, ks in enumerate(groups):
        sd = {sides(k) for k in ks}
        if len(sd) != 1:
            raise ConsistencyError(f"track {c} bounds more than two vertex spaces: {sorted(sd)}")
        interior = any(min(ball.depth[ball.edges[k][0]], ball.depth[ball.edges[k][2]]) >= INTERIOR_DEPTH
                       for k in ks)
        tracks.append(Track(c, half(ks[0]), ks, sd.pop(), interior))
    stats.update(crossing_edges=len(crossing), two_cell_gluings=glued, side_merges=merged)
    return tracks


def build_slab_tree(ball: CayleyBall, f: PseudocharacterScaled, check_acyclic: bool = True) -> SlabTree:
    values = _check_scaled(ball, f)
    spaces, space_of = build_vertex_spaces(ball, f, values)
    stats: dict = {}
    tracks = build_tracks(ball, f, values, space_of, stats)
    tree = SlabTree(ball, f, values, space_of, spaces, tracks, stats)
    for t in tracks:
        lo, hi = t.sides
        if spaces[hi].level - spaces[lo].level != 1:
            raise ConsistencyError(f"track {t.id} joins levels {spaces[lo].level} and {spaces[hi].level}")
    cycles = interior_cycles(tree)
    stats.update(vertex_spaces=len(spaces), tracks=len(tracks), interior_cycles=cycles,
                 interior_vertex_spaces=sum(v.interior for v in spaces))
    if check_acyclic and cycles:
        raise ConsistencyError(f"{cycles} cycle(s) among interior vertex spaces")
    return tree


def interior_cycles(tree: SlabTree) -> int:
    """Independent cycles in the graph of interior spaces and interior tracks."""
    uf = UnionFind(len(tree.vertex_spaces))
    extra = 0
    for t in tree.tracks:
        lo, hi = t.sides
        if t.interior and tree.vertex_spaces[lo].interior and tree.vertex_spaces[hi].interior:
            if not uf.union(lo, hi):
                extra += 1
    return extra


def slab_tree(oracle, f: PseudocharacterScaled, radius: int, presentation=None, centers=None) -> SlabTree:
    ball = cayley_ball(oracle, radius, presentation=presentation, centers=centers)
    return build_slab_tree(ball, f)
