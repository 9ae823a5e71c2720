"""Ends of a pseudocharacter seen through a finite slab tree.

Directions are components of the slab tree minus a central barrier ``B``:
the component of levels ``|fbar| <= R`` around the identity. Counts are
lower-bound certificates only; a finite region can separate ends but can
never prove two rays equivalent.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ._dsu import UnionFind
from .errors import PreconditionError, ResourceError
from .groups import Word, cayley_ball, invert_word
from .quasichar import defect_estimate
from .slabtree import SlabTree, nearest_level


def sign_of(f, g: Sequence[int]) -> int:
    v = f(tuple(g))
    return (v > 0) - (v < 0)


def unambiguously_positive(f, oracle=None, radius: int = 2, defect=None) -> list[Word]:
    """Ball elements with ``f(g)`` above the measured defect."""
    oracle = oracle or f.oracle
    if defect is None:
        defect = defect_estimate(f, oracle, radius)
    ball = cayley_ball(oracle, radius)
    return [w for w, x in zip(ball.words, ball.elements) if f.value(x) > defect]


@dataclass(frozen=True)
class EndDirection:
    sign: int
    component: int
    witness: Word  # word of a ball vertex where the ray leaves the barrier for good
    level: int
    R: int


@dataclass
class Separation:
    """``T - B`` for one slab tree and barrier parameter ``R``."""

    tree: SlabTree
    R: int
    barrier: set
    component: list  # per vertex space; -1 inside B
    top: list  # per component: highest level
    bottom: list

    def of_element(self, x) -> int | None:
        v = self.tree.locate(x)
        return None if v is None else self.component[v]

    def positive(self, margin=1) -> list[int]:
        return [c for c, t in enumerate(self.top) if t >= self.R + margin]

    def negative(self, margin=1) -> list[int]:
        return [c for c, b in enumerate(self.bottom) if b <= -(self.R + margin)]


def separation(tree: SlabTree, R: int = 0) -> Separation:
    if R < 0:
        raise ValueError("R must be nonnegative")
    spaces = tree.vertex_spaces
    adj = tree.neighbours()
    root = tree.root
    barrier = {root}
    stack = [root]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in barrier and abs(spaces[w].level) <= R:
                barrier.add(w)
                stack.append(w)
    uf = UnionFind(len(spaces))
    for t in tree.tracks:
        lo, hi = t.sides
        if lo not in barrier and hi not in barrier:
            uf.union(lo, hi)
    roots: dict[int, int] = {}
    comp = []
    for v in range(len(spaces)):
        comp.append(-1 if v in barrier else roots.setdefault(uf.find(v), len(roots)))
    top = [None] * len(roots)
    bottom = [None] * len(roots)
    for v, c in enumerate(comp):
        if c < 0:
            continue
        lv = spaces[v].level
        top[c] = lv if top[c] is None else max(top[c], lv)
        bottom[c] = lv if bottom[c] is None else min(bottom[c], lv)
    return Separation(tree, R, barrier, comp, top, bottom)


@dataclass
class EndsReport:
    positive_count: int
    negative_count: int
    classification: str
    certified: bool
    radii_tested: list
    R: int
    margin: int
    per_radius: list = field(default_factory=list)
    directions: list = field(default_factory=list)

    @property
    def counts(self):
        return (self.positive_count, self.negative_count)

    def to_json(self) -> dict:
        return {
            "positive_count": self.positive_count,
            "negative_count": self.negative_count,
            "classification": self.classification,
            "certified": self.certified,
            "radii_tested": self.radii_tested,
            "R": self.R,
            "margin": self.margin,
            "per_radius": self.per_radius,
            "directions": [
                {"sign": d.sign, "component": d.component, "witness": w, "level": d.level}
                for d, w in self.directions
            ],
        }


def _counts(tree: SlabTree, R: int, margin: int):
    sep = separation(tree, R)
    pos, neg = sep.positive(margin), sep.negative(margin)
    fmt = tree.ball.oracle.format
    dirs = []
    for sign, comps in ((1, pos), (-1, neg)):
        for c in comps:
            best = None
            for v, cv in enumerate(sep.component):
                if cv == c:
                    for i in tree.vertex_spaces[v].members:
                        key = sign * tree.values[i]
                        if best is None or key > best[0]:
                            best = (key, i)
            i = best[1]
            d = EndDirection(sign, c, tree.ball.words[i], nearest_level(tree.values[i]), R)
            dirs.append((d, fmt(d.witness)))
    return len(pos), len(neg), dirs


def classify_ends(trees, R: int = 0, margin: int = 1) -> EndsReport:
    """Count positive and negative directions beyond the barrier on each tree.

    A direction is a component of ``T - B`` reaching level ``R + margin`` (or
    ``-(R + margin)``). Bushy is certified only when every tested tree, and
    at least two of them, show two directions on each side.
    """
    if isinstance(trees, SlabTree):
        trees = [trees]
    if margin < 1:
        raise ValueError("margin must be at least 1")
    per = []
    dirs = []
    for tree in trees:
        levels = [v.level for v in tree.vertex_spaces]
        nonzero = any(tree.values)
        if nonzero and (max(levels) < R + margin or min(levels) > -(R + margin)):
            raise PreconditionError(
                f"region of radius {tree.radius} only reaches levels {min(levels)}..{max(levels)}; "
                f"need +-{R + margin}")
        p, n, d = _counts(tree, R, margin)
        per.append({"radius": tree.radius, "positive": p, "negative": n})
        dirs = d
    p = min(x["positive"] for x in per)
    n = min(x["negative"] for x in per)
    certified = False
    if p >= 2 and n >= 2:
        label = "bushy"
        certified = len(per) >= 2
    elif p == 0 or n == 0:
        label = "inconclusive"
    elif p == 1 and n == 1:
        label = "consistent with uniform"
    else:
        label = "consistent with unipotent"
    return EndsReport(p, n, label, certified, [x["radius"] for x in per], R, margin, per, dirs)


# -- rays -------------------------------------------------------------------

def ray_direction(sep: Separation, period: Sequence[int], prefix: Sequence[int] = (), periods: int = 3,
                  max_steps: int = 100_000):
    """Direction of the ray reading ``prefix`` then ``period`` forever.

    The exit is the vertex right after the last one with ``|level| <= R``.
    The walk continues until the ray has stayed above the barrier for
    ``periods`` whole periods past the exit; the exit must lie in the region.
    Raises ResourceError when that cannot be settled within ``max_steps``.
    """
    tree = sep.tree
    oracle = tree.ball.oracle
    f = tree.f
    period, prefix = tuple(period), tuple(prefix)
    if not period:
        raise ValueError("empty period")
    x = oracle.identity
    path: list[int] = []
    last_low = 0
    exit_elem = None
    step = 0

    def visit(y, k):
        nonlocal last_low, exit_elem
        if abs(nearest_level(f.value(y))) <= sep.R:
            last_low, exit_elem = k, None
        elif exit_elem is None:
            exit_elem = y

    visit(x, 0)
    for l in prefix:
        x = oracle.times_letter(x, l)
        path.append(l)
        visit(x, len(path))
    while True:
        for l in period:
            x = oracle.times_letter(x, l)
            path.append(l)
            visit(x, len(path))
        step += len(period)
        if len(path) - max(last_low, len(prefix)) >= periods * len(period) and len(path) - last_low > len(period):
            break
        if step > max_steps:
            raise ResourceError(f"ray {oracle.format(period)} did not clear the barrier within {max_steps} steps")
    c = sep.of_element(exit_elem)
    if c is None:
        raise ResourceError(
            f"ray leaves the barrier at {oracle.format(tuple(path[:last_low + 1]))}, "
            f"outside the radius-{tree.radius} region")
    lv = nearest_level(f.value(exit_elem))
    return EndDirection(1 if lv > 0 else -1, c, tuple(path[:last_low + 1]), lv, sep.R)


@dataclass
class SeparatedTriple:
    g1: Word
    g2: Word
    g3: Word
    h: Word
    h_neg: Word
    N: int
    R: int
    barrier: Fraction  # unscaled value bounding the barrier
    directions: dict
    checks: dict

    def format(self, oracle) -> dict:
        out = {k: oracle.format(getattr(self, k)) for k in ("g1", "g2", "g3", "h", "h_neg")}
        out.update(N=self.N, R=self.R, barrier=str(self.barrier), checks=self.checks)
        out["directions"] = {k: {"sign": d.sign, "component": d.component, "exit": oracle.format(d.witness)}
                             for k, d in self.directions.items()}
        return out


def _first_exit(sep: Separation, comps: set[int]):
    """Shortlex-first ball vertex in one of ``comps`` whose proper prefixes all lie in B."""
    tree = sep.tree
    ball = tree.ball
    oracle = ball.oracle
    best = None
    for i, w in enumerate(ball.words):
        c = sep.component[tree.space_of[i]]
        if c not in comps:
            continue
        x = oracle.identity
        ok = True
        for l in w[:-1]:
            x = oracle.times_letter(x, l)
            v = tree.locate(x)
            if v is None or v not in sep.barrier:
                ok = False
                break
        if ok and (best is None or (len(w), w) < (len(best), best)):
            best = w
    return best


def _choose_g1(tree: SlabTree):
    f0 = tree.f.base
    oracle = tree.ball.oracle
    delta = tree.f.defect
    vals = [(f0((l,)), -l, (l,)) for l in oracle.generators.letters]
    v, _, w = max(vals)
    if v > delta:
        return w, False
    for w, x in zip(tree.ball.words, tree.ball.elements):
        if len(w) <= 2 and f0.value(x) > delta:
            return w, True
    raise PreconditionError("no unambiguously positive element of length <= 2")


def separated_triple(tree: SlabTree, report: EndsReport | None = None, R: int | None = None,
                     periods: int = 3) -> SeparatedTriple:
    """Constructive elements ``g1, g2, g3`` with ``[g1^+inf] != [g2^+inf]`` and
    ``[g1^-inf] != [g3^-inf]``, all with positive value.

    ``g2 = h g1^N`` where ``h`` is the first vertex past the barrier in a
    second positive direction and ``N > 99 R_f / (f(g1) - defect)``, with
    ``R_f = (R + 1/2) / scale`` the unscaled barrier height. ``g3`` is built
    the same way from a second negative direction.
    """
    if report is None:
        report = classify_ends(tree, R or 0)
    if report.classification != "bushy":
        raise PreconditionError(f"separated triple needs a bushy report, got {report.classification}")
    R = report.R if R is None else R
    oracle = tree.ball.oracle
    f0 = tree.f.base
    delta = tree.f.defect
    sep = separation(tree, R)
    g1, augmented = _choose_g1(tree)
    gap = f0(g1) - delta
    barrier = (Fraction(R) + Fraction(1, 2)) / tree.f.scale
    N = int(99 * barrier / gap) + 1
    d1p = ray_direction(sep, g1, periods=periods)
    d1m = ray_direction(sep, invert_word(g1), periods=periods)

    others = set(sep.positive()) - {d1p.component}
    h = _first_exit(sep, others)
    if h is None:
        raise PreconditionError("no second positive direction reachable from the barrier")
    g2 = h + g1 * N
    d2p = ray_direction(sep, g2, periods=periods)

    others = set(sep.negative()) - {d1m.component}
    hn = _first_exit(sep, others)
    if hn is None:
        raise PreconditionError("no second negative direction reachable from the barrier")
    g3 = g1 * N + invert_word(hn)
    d3m = ray_direction(sep, invert_word(g3), periods=periods)

    checks = {
        "augmented_generators": augmented,
        "f(g1)": str(f0(g1)),
        "defect": str(delta),
        "f(h)>barrier": f0(h) > barrier,
        "f(g2)>100*barrier": f0(g2) > 100 * barrier,
        "f(g3)>0": f0(g3) > 0,
        "g2_separated": d2p.component != d1p.component and d2p.sign == 1,
        "g3_separated": d3m.component != d1m.component and d3m.sign == -1,
        "periods_walked": periods,
    }
    if not (checks["g2_separated"] and checks["g3_separated"] and checks["f(g3)>0"]):
        raise ResourceError(f"separation could not be verified on the radius-{tree.radius} region: {checks}")
    dirs = {"g1+": d1p, "g1-": d1m, "g2+": d2p, "g3-": d3m}
    return SeparatedTriple(g1, g2, g3, h, hn, N, R, barrier, dirs, checks)


# -- ping-pong ----------------------------------------------------------------

def _fixed_directions(sep, w, periods):
    return ray_direction(sep, w, periods=periods), ray_direction(sep, invert_word(w), periods=periods)


def relation_search(oracle, g, gp, length: int = 6, power: int = 1):
    """Every reduced word of length 1..``length`` in ``X = g^k``, ``Y = g'^k``
    and their inverses, multiplied out in the oracle. Returns the number of
    words checked and the relations found."""
    X = oracle.power(oracle.element(g), power)
    Y = oracle.power(oracle.element(gp), power)
    gens = [X, oracle.inv(X), Y, oracle.inv(Y)]
    names = ["X", "X^-1", "Y", "Y^-1"]
    checked = 0
    relations = []
    frontier = [((), oracle.identity)]
    for _ in range(length):
        nxt = []
        for word, x in frontier:
            for k in range(4):
                if word and word[-1] == k ^ 1:
                    continue
                y = oracle.mul(x, gens[k])
                checked += 1
                w2 = word + (k,)
                if y == oracle.identity:
                    relations.append(" ".join(names[j] for j in w2))
                nxt.append((w2, y))
        frontier = nxt
    return checked, relations


@dataclass
class PingPong:
    g: Word
    gp: Word
    directions: dict
    certificate: dict


def pingpong_pair(tree: SlabTree, triple: SeparatedTriple | None = None, test_length: int = 6,
                  power: int = 1, periods: int = 3) -> PingPong:
    """Elements with disjoint fixed directions, following the free subgroup
    argument: ``g = g1`` and ``g' = g2 g3``, falling back to a disjoint pair
    from the triple. The certificate multiplies out every reduced word of
    length up to ``test_length`` in ``g^{+-k}, g'^{+-k}``."""
    if triple is None:
        triple = separated_triple(tree, periods=periods)
    oracle = tree.ball.oracle
    sep = separation(tree, triple.R)
    cands = [(triple.g1, triple.g2 + triple.g3)]
    cands += [(triple.g1, triple.g2), (triple.g1, triple.g3), (triple.g2, triple.g3)]
    chosen = None
    for g, gp in cands:
        try:
            dg, dgp = _fixed_directions(sep, g, periods), _fixed_directions(sep, gp, periods)
        except ResourceError:
            continue
        comps = [d.component for d in dg + dgp]
        if len(set(comps)) == 4:
            chosen = (g, gp, {"g+": dg[0], "g-": dg[1], "g'+": dgp[0], "g'-": dgp[1]})
            break
    if chosen is None:
        raise ResourceError("no candidate pair has four distinct directions on this region")
    g, gp, dirs = chosen
    checked, relations = relation_search(oracle, g, gp, test_length, power)
    cert = {"words_checked": checked, "relations": relations, "max_length": test_length,
            "power": power, "passed": not relations}
    return PingPong(g, gp, dirs, cert)


# -- dynamics -----------------------------------------------------------------

def fixed_end_dynamics(tree: SlabTree, g: Sequence[int], samples: Sequence[tuple], R: int = 0,
                       n_max: int = 12, periods: int = 3) -> dict:
    """Translate sampled rays by ``g^n`` and watch them fall into ``[g^inf]``.

    ``samples`` holds ``(prefix, period)`` word pairs describing rays. For
    each sample the table lists the direction of ``g^n . ray`` for
    ``n = 0..n_max``; ``attracted_from`` is the first ``n`` after which
    every tested translate sits in the attracting direction.
    """
    g = tuple(g)
    f = tree.f
    if f(g) == 0:
        raise PreconditionError("g has sign 0 and fixes no end")
    sep = separation(tree, R)
    oracle = tree.ball.oracle
    attract = ray_direction(sep, g, periods=periods)
    repel = ray_direction(sep, invert_word(g), periods=periods)
    rows = []
    for prefix, period in samples:
        prefix, period = tuple(prefix), tuple(period)
        row = {"ray": f"{oracle.format(prefix)} ({oracle.format(period)})^inf", "table": []}
        try:
            d0 = ray_direction(sep, period, prefix, periods)
        except ResourceError as e:
            row["error"] = str(e)
            rows.append(row)
            continue
        if d0.component == repel.component:
            row["status"] = "repelling direction"
            rows.append(row)
            continue
        first = None
        for n in range(n_max + 1):
            try:
                d = ray_direction(sep, period, g * n + prefix, periods)
            except ResourceError as e:
                row["table"].append({"n": n, "error": str(e)})
                break
            hit = d.component == attract.component
            row["table"].append({"n": n, "component": d.component, "attracted": hit})
            if hit and first is None:
                first = n
            elif not hit:
                first = None
        row["attracted_from"] = first
        rows.append(row)
    return {
        "g": oracle.format(g),
        "attracting": attract.component,
        "repelling": repel.component,
        "samples": rows,
    }
