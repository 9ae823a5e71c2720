"""Words, generating sets and word-problem oracles.

A word is a tuple of integer letter codes. Generator ``i`` has code ``2*i``
and its formal inverse has code ``2*i + 1``, so inverting a letter is
``letter ^ 1`` and the natural letter order is ``s0, s0^-1, s1, s1^-1, ...``.

Every oracle pairs a :class:`GeneratorSet` with a group *model* (free,
free abelian, PSL(2,Z), or a finite multiplication table). Model elements
are hashable keys; the normal form of a word is the shortlex-least geodesic
word representing the same element.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .errors import AlphabetError, ResourceError

Word = tuple[int, ...]


def invert_word(word: Sequence[int]) -> Word:
    return tuple(l ^ 1 for l in reversed(word))


def free_reduce(word: Iterable[int]) -> Word:
    out: list[int] = []
    for l in word:
        if out and out[-1] == l ^ 1:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


def shortlex_key(word: Sequence[int]):
    return (len(word), tuple(word))


@dataclass(frozen=True)
class GeneratorSet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(set(self.symbols)) != len(self.symbols):
            raise AlphabetError(f"duplicate generator names in {self.symbols}")
        for s in self.symbols:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", s):
                raise AlphabetError(f"invalid generator name {s!r}")

    def __len__(self):
        return len(self.symbols)

    @property
    def letters(self) -> range:
        return range(2 * len(self.symbols))

    @property
    def involution(self) -> dict[str, str]:
        out = {}
        for l in self.letters:
            out[self.letter_name(l)] = self.letter_name(l ^ 1)
        return out

    def letter_name(self, letter: int) -> str:
        name = self.symbols[letter >> 1]
        return name if letter % 2 == 0 else name + "^-1"

    def letter(self, name: str) -> int:
        if name.endswith("^-1"):
            return 2 * self.symbols.index(name[:-3]) + 1
        return 2 * self.symbols.index(name)

    def check(self, word: Iterable[int]) -> Word:
        word = tuple(word)
        n = 2 * len(self.symbols)
        for l in word:
            if not isinstance(l, int) or not 0 <= l < n:
                raise AlphabetError(f"letter {l!r} not in alphabet of {self.symbols}")
        return word

    def _aliases(self):
        names = []
        for i, s in enumerate(self.symbols):
            names.append((s, 2 * i))
            if len(s) == 1 and s.islower() and s.upper() not in self.symbols:
                names.append((s.upper(), 2 * i + 1))
        names.sort(key=lambda p: -len(p[0]))
        return names

    def parse(self, text: str) -> Word:
        """Parse ``"a b^-1 a^3"``, ``"abA"`` (upper case = inverse) or ``"1"``.

        Multi-character names must be separated by whitespace or exponents;
        matching is greedy on the longest known name.
        """
        text = text.strip()
        if text in ("", "1", "e"):
            return ()
        aliases = self._aliases()
        out: list[int] = []
        i = 0
        while i < len(text):
            if text[i].isspace() or text[i] in "*.":
                i += 1
                continue
            for name, code in aliases:
                if text.startswith(name, i):
                    i += len(name)
                    break
            else:
                raise AlphabetError(f"cannot parse {text[i:]!r} over {self.symbols}")
            power = 1
            m = re.match(r"\^\(?(-?\d+)\)?", text[i:])
            if m:
                power = int(m.group(1))
                i += m.end()
            if power < 0:
                code ^= 1
            out.extend([code] * abs(power))
        return tuple(out)

    def format(self, word: Sequence[int]) -> str:
        if not word:
            return "1"
        parts = []
        run_letter, run = word[0], 0
        for l in list(word) + [None]:
            if l == run_letter:
                run += 1
                continue
            name = self.symbols[run_letter >> 1]
            exp = run if run_letter % 2 == 0 else -run
            parts.append(name if exp == 1 else f"{name}^{exp}")
            run_letter, run = l, 1
        return " ".join(parts)

    def extended(self, *names: str) -> "GeneratorSet":
        return GeneratorSet(self.symbols + tuple(names))


def standard_generators(rank: int, names: str = "abcdefghijklmnopqrstuvwxyz") -> GeneratorSet:
    if rank <= len(names):
        return GeneratorSet(tuple(names[:rank]))
    return GeneratorSet(tuple(f"x{i}" for i in range(rank)))


# -- group models -----------------------------------------------------------

class FreeModel:
    """Free group of a given rank; elements are freely reduced words."""

    kind = "free"

    def __init__(self, rank: int):
        self.rank = rank
        self.identity: Word = ()

    def mul(self, x: Word, y: Word) -> Word:
        k = 0
        n = min(len(x), len(y))
        while k < n and x[len(x) - 1 - k] == y[k] ^ 1:
            k += 1
        return x[: len(x) - k] + y[k:]

    def inv(self, x: Word) -> Word:
        return invert_word(x)

    def generator(self, i: int) -> Word:
        return (2 * i,)

    def power(self, x, n: int):
        return _power(self, x, n)


class FreeAbelianModel:
    kind = "free_abelian"

    def __init__(self, rank: int):
        self.rank = rank
        self.identity = (0,) * rank

    def mul(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def inv(self, x):
        return tuple(-a for a in x)

    def generator(self, i: int):
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def power(self, x, n: int):
        return tuple(n * a for a in x)


def psl_canonical(m) -> tuple[int, int, int, int]:
    """Representative of ``m`` mod +-I whose first nonzero entry is positive."""
    a, b, c, d = m
    for e in (a, b, c, d):
        if e != 0:
            if e < 0:
                return (-a, -b, -c, -d)
            break
    return (a, b, c, d)


class PSL2ZModel:
    """PSL(2,Z) as 2x2 integer matrices ``(a, b, c, d)`` modulo +-I."""

    kind = "psl2z"
    A = (1, 1, 0, 1)
    B = (1, 0, -1, 1)

    def __init__(self):
        self.identity = (1, 0, 0, 1)

    def mul(self, x, y):
        a, b, c, d = x
        e, f, g, h = y
        return psl_canonical((a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h))

    def inv(self, x):
        a, b, c, d = x
        return psl_canonical((d, -b, -c, a))

    def element(self, m):
        a, b, c, d = m
        if a * d - b * c != 1:
            raise ValueError(f"determinant of {m} is not 1")
        return psl_canonical(m)

    def power(self, x, n: int):
        return _power(self, x, n)


class FiniteModel:
    """Finite group given by a multiplication table on ``range(n)``."""

    kind = "finite"

    def __init__(self, table: Sequence[Sequence[int]]):
        self.table = tuple(tuple(row) for row in table)
        n = len(self.table)
        ids = [e for e in range(n) if all(self.table[e][x] == x == self.table[x][e] for x in range(n))]
        if len(ids) != 1:
            raise ValueError("multiplication table has no two-sided identity")
        self.identity = ids[0]
        self._inv = []
        for x in range(n):
            inv = [y for y in range(n) if self.table[x][y] == self.identity]
            if len(inv) != 1:
                raise ValueError(f"element {x} has no unique inverse")
            self._inv.append(inv[0])

    def mul(self, x, y):
        return self.table[x][y]

    def inv(self, x):
        return self._inv[x]

    def power(self, x, n: int):
        return _power(self, x, n)


def _power(model, x, n: int):
    if n < 0:
        x, n = model.inv(x), -n
    result = model.identity
    while n:
        if n & 1:
            result = model.mul(result, x)
        x = model.mul(x, x)
        n >>= 1
    return result


# -- oracles ----------------------------------------------------------------

class GroupOracle:
    """Solvable word problem over a finite generating set.

    ``images[i]`` is the model element represented by generator ``i``.
    Normal forms are shortlex-least geodesics; free and free abelian groups
    on their standard generators use closed forms, everything else a
    breadth-first geodesic search bounded by ``budget`` stored elements.
    """

    def __init__(self, generators: GeneratorSet, model, images: Sequence[Hashable],
                 name: str = "user", budget: int = 2_000_000):
        if len(images) != len(generators):
            raise ValueError("one image per generator required")
        self.generators = generators
        self.model = model
        self.images = tuple(images)
        self.name = name
        self.budget = budget
        self._letter_images = []
        for img in self.images:
            self._letter_images += [img, model.inv(img)]
        self._standard = (
            model.kind in ("free", "free_abelian")
            and len(images) == model.rank
            and all(img == model.generator(i) for i, img in enumerate(images))
        )
        self._nf_cache: dict = {model.identity: ()}
        self._frontier: list = [model.identity]
        self._explored = 0

    def __repr__(self):
        return f"GroupOracle({self.name}, {self.generators.symbols})"

    @property
    def identity(self):
        return self.model.identity

    def letter_image(self, letter: int):
        return self._letter_images[letter]

    def element(self, word: Sequence[int]):
        word = self.generators.check(word)
        if self._standard and self.model.kind == "free":
            return free_reduce(word)
        x = self.model.identity
        for l in word:
            x = self.model.mul(x, self._letter_images[l])
        return x

    def mul(self, x, y):
        return self.model.mul(x, y)

    def inv(self, x):
        return self.model.inv(x)

    def power(self, x, n: int):
        return self.model.power(x, n)

    def times_letter(self, x, letter: int):
        return self.model.mul(x, self._letter_images[letter])

    def word_of(self, x, max_length: int | None = None) -> Word:
        """Normal form word of the model element ``x``."""
        if self._standard:
            if self.model.kind == "free":
                return tuple(x)
            out: list[int] = []
            for i, e in enumerate(x):
                out += [2 * i if e > 0 else 2 * i + 1] * abs(e)
            return tuple(out)
        while x not in self._nf_cache:
            if not self._frontier:
                raise ValueError(f"{x} is not an element of {self.name}")
            if max_length is not None and self._explored >= max_length:
                raise ResourceError(f"element {x} not found within length {max_length}")
            self._grow()
        return self._nf_cache[x]

    def _grow(self):
        new = []
        for x in self._frontier:
            w = self._nf_cache[x]
            for l in self.generators.letters:
                y = self.model.mul(x, self._letter_images[l])
                if y not in self._nf_cache:
                    self._nf_cache[y] = w + (l,)
                    new.append(y)
        self._explored += 1
        self._frontier = new
        if len(self._nf_cache) > self.budget:
            raise ResourceError(
                f"geodesic search for {self.name} exceeded {self.budget} elements at length {self._explored}")

    def normal_form(self, word: Sequence[int]) -> Word:
        word = self.generators.check(word)
        return self.word_of(self.element(word), max_length=len(word))

    def parse(self, text: str) -> Word:
        return self.generators.parse(text)

    def format(self, word: Sequence[int]) -> str:
        return self.generators.format(word)

    def with_generators(self, generators: GeneratorSet, images: Sequence[Hashable], name=None):
        return GroupOracle(generators, self.model, images, name or self.name, self.budget)


def reduce(word: Sequence[int], oracle: GroupOracle) -> Word:
    return oracle.normal_form(word)


def multiply(u: Sequence[int], v: Sequence[int], oracle: GroupOracle) -> Word:
    return oracle.normal_form(tuple(u) + tuple(v))


def free_group(rank: int, names=None) -> GroupOracle:
    gens = GeneratorSet(tuple(names)) if names else standard_generators(rank)
    model = FreeModel(rank)
    return GroupOracle(gens, model, [model.generator(i) for i in range(rank)], f"free{rank}")


def free_abelian_group(rank: int, names=None) -> GroupOracle:
    gens = GeneratorSet(tuple(names)) if names else standard_generators(rank)
    model = FreeAbelianModel(rank)
    return GroupOracle(gens, model, [model.generator(i) for i in range(rank)], f"free_abelian{rank}")


def psl2z() -> GroupOracle:
    model = PSL2ZModel()
    return GroupOracle(GeneratorSet(("A", "B")), model, [model.A, model.B], "psl2z")


def finite_group(table, generators: dict[str, int]) -> GroupOracle:
    model = FiniteModel(table)
    return GroupOracle(GeneratorSet(tuple(generators)), model, list(generators.values()), "finite")


def cyclic_group(n: int, name: str = "a") -> GroupOracle:
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return finite_group(table, {name: 1 % n})


def symmetric_group_table(n: int):
    """Multiplication table of S_n (composition ``p*q = p after q``) and its elements."""
    from itertools import permutations
    perms = list(permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[q[k]] for k in range(n))] for q in perms] for p in perms]
    return table, perms


# -- presentations ----------------------------------------------------------

@dataclass(frozen=True)
class Presentation:
    generators: GeneratorSet
    relators: tuple[Word, ...] = ()

    def __post_init__(self):
        rels = tuple(self.generators.check(r) for r in self.relators)
        object.__setattr__(self, "relators", rels)

    @property
    def triangular(self) -> bool:
        return all(len(r) == 3 for r in self.relators)

    @classmethod
    def parse(cls, symbols: Sequence[str], relators: Sequence[str]) -> "Presentation":
        gens = GeneratorSet(tuple(symbols))
        return cls(gens, tuple(gens.parse(r) for r in relators))


def _fresh(symbols, stem):
    k = 1
    while f"{stem}{k}" in symbols:
        k += 1
    return f"{stem}{k}"


def triangularize(p: Presentation) -> Presentation:
    """Rewrite ``p`` so that every relator has length exactly three.

    Long relators ``s1 s2 w`` become ``x^-1 s1 s2`` and ``x w`` for a fresh
    generator ``x``; short ones are padded by a fresh generator ``t`` that is
    killed by the relator ``t t t^-1``.
    """
    if p.triangular:
        return p
    symbols = list(p.generators.symbols)
    out: list[Word] = []
    trivial = None
    for r in p.relators:
        r = list(r)
        if not r:
            continue
        while len(r) > 3:
            x = _fresh(symbols, "x")
            symbols.append(x)
            code = 2 * (len(symbols) - 1)
            out.append((code + 1, r[0], r[1]))
            r = [code] + r[2:]
        if len(r) < 3:
            if trivial is None:
                symbols.append(_fresh(symbols, "t"))
                trivial = 2 * (len(symbols) - 1)
                out.append((trivial, trivial, trivial + 1))
            r = r + ([trivial] if len(r) == 2 else [trivial, trivial + 1])
        out.append(tuple(r))
    return Presentation(GeneratorSet(tuple(symbols)), tuple(out))


def count_homomorphisms(p: Presentation, table) -> int:
    """Number of homomorphisms from the presented group into a finite group.

    Backtracking over generator images; a relator is checked as soon as all
    of its generators have images.
    """
    n = len(table)
    model = FiniteModel(table)
    ngen = len(p.generators)
    ready: list[list[Word]] = [[] for _ in range(ngen)]
    for r in p.relators:
        if r:
            ready[max(l >> 1 for l in r)].append(r)
    letter = [0] * (2 * ngen)

    def holds(r):
        x = model.identity
        for l in r:
            x = table[x][letter[l]]
        return x == model.identity

    def search(i):
        if i == ngen:
            return 1
        total = 0
        for img in range(n):
            letter[2 * i], letter[2 * i + 1] = img, model.inv(img)
            if all(holds(r) for r in ready[i]):
                total += search(i + 1)
        return total

    return search(0)


# -- Cayley balls -----------------------------------------------------------

@dataclass
class CayleyBall:
    """Finite piece of the Cayley graph (and 2-complex) around some centres.

    ``edges[k] = (i, s, j)`` joins vertex ``i`` to ``i * s`` for generator
    index ``s``; ``two_cells`` hold edge-index triples, one per relator
    triangle whose three vertices are all present. ``depth[i]`` is the graph
    distance from vertex ``i`` to the nearest vertex with a neighbour outside
    the region.
    """

    oracle: GroupOracle
    radius: int
    elements: list
    words: list[Word]
    lengths: list[int]
    edges: list[tuple[int, int, int]]
    two_cells: list[tuple[int, int, int]] = field(default_factory=list)
    depth: list[int] = field(default_factory=list)
    presentation: Presentation | None = None

    def __post_init__(self):
        self.index = {x: i for i, x in enumerate(self.elements)}
        self.edge_at = {(i, s): k for k, (i, s, j) in enumerate(self.edges)}

    def __len__(self):
        return len(self.elements)

    @property
    def vertices(self) -> list[Word]:
        return self.words

    def find(self, x) -> int | None:
        return self.index.get(x)

    def neighbours(self, i: int):
        for l in self.oracle.generators.letters:
            j = self.index.get(self.oracle.times_letter(self.elements[i], l))
            if j is not None:
                yield l, j

    def to_json(self) -> dict:
        fmt = self.oracle.format
        names = self.oracle.generators.symbols
        return {
            "radius": self.radius,
            "vertices": [{"id": i, "word": fmt(w)} for i, w in enumerate(self.words)],
            "edges": [[i, names[s], j] for i, s, j in self.edges],
            "twoCells": [list(c) for c in self.two_cells],
        }

    def to_dot(self) -> str:
        fmt = self.oracle.format
        names = self.oracle.generators.symbols
        lines = ["digraph cayley {"]
        for i, w in enumerate(self.words):
            lines.append(f'  v{i} [label="{fmt(w)}"];')
        for i, s, j in self.edges:
            lines.append(f'  v{i} -> v{j} [label="{names[s]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def cayley_ball(oracle: GroupOracle, radius: int, presentation: Presentation | None = None,
                centers: Sequence[Sequence[int]] | None = None, max_vertices: int = 3_000_000) -> CayleyBall:
    """Ball of the given radius about the identity, or about each centre word."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    model = oracle.model
    letters = list(oracle.generators.letters)
    seeds = [oracle.identity] if centers is None else [oracle.element(c) for c in centers]
    dist = {}
    order = []
    queue = deque()
    for x in seeds:
        if x not in dist:
            dist[x] = 0
            order.append(x)
            queue.append(x)
    while queue:
        x = queue.popleft()
        if dist[x] == radius:
            continue
        for l in letters:
            y = model.mul(x, oracle.letter_image(l))
            if y not in dist:
                dist[y] = dist[x] + 1
                order.append(y)
                queue.append(y)
                if len(order) > max_vertices:
                    raise ResourceError(f"Cayley region exceeds {max_vertices} vertices at radius {radius}")
    if centers is None:
        elements = order
        words = [oracle.word_of(x) for x in elements]
    else:
        words = [oracle.word_of(x) for x in order]
        perm = sorted(range(len(order)), key=lambda k: shortlex_key(words[k]))
        elements = [order[k] for k in perm]
        words = [words[k] for k in perm]
    index = {x: i for i, x in enumerate(elements)}
    edges = []
    boundary = []
    for i, x in enumerate(elements):
        outside = False
        for l in letters:
            j = index.get(model.mul(x, oracle.letter_image(l)))
            if j is None:
                outside = True
            elif l % 2 == 0:
                edges.append((i, l >> 1, j))
        if outside:
            boundary.append(i)
    ball = CayleyBall(oracle, radius, elements, words, [len(w) for w in words], edges,
                      presentation=presentation)
    ball.depth = _depths(ball, boundary)
    if presentation is not None:
        ball.two_cells = _two_cells(ball, presentation)
    return ball


def _depths(ball: CayleyBall, boundary: list[int]) -> list[int]:
    n = len(ball)
    far = 1 << 30
    depth = [far] * n
    queue = deque(boundary)
    for i in boundary:
        depth[i] = 0
    adj = [[] for _ in range(n)]
    for i, _, j in ball.edges:
        adj[i].append(j)
        adj[j].append(i)
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if depth[j] > depth[i] + 1:
                depth[j] = depth[i] + 1
                queue.append(j)
    return depth


def _two_cells(ball: CayleyBall, presentation: Presentation) -> list[tuple[int, int, int]]:
    if presentation.generators.symbols != ball.oracle.generators.symbols:
        raise AlphabetError("presentation and oracle use different generators")
    if not presentation.triangular:
        raise ValueError("two-cells need a triangular presentation")
    oracle = ball.oracle
    seen = set()
    cells = []
    for i, x in enumerate(ball.elements):
        for rel in presentation.relators:
            verts = [i]
            y = x
            for l in rel:
                y = oracle.times_letter(y, l)
                verts.append(ball.index.get(y, -1))
            if -1 in verts:
                continue
            if verts[-1] != i:
                raise ValueError(f"relator {oracle.format(rel)} is not trivial in {oracle.name}")
            cell = []
            for k, l in enumerate(rel):
                u, w = verts[k], verts[k + 1]
                cell.append(ball.edge_at[(u, l >> 1)] if l % 2 == 0 else ball.edge_at[(w, l >> 1)])
            key = tuple(sorted(cell))
            if key not in seen:
                seen.add(key)
                cells.append(tuple(cell))
    return cells


def z2_triangular() -> tuple[GroupOracle, Presentation]:
    """Z^2 as <a, b, x | x^-1 a b, x^-1 b a> with x = ab, and its presentation."""
    p = Presentation.parse("abx", ["x^-1 a b", "x^-1 b a"])
    oracle = GroupOracle(p.generators, FreeAbelianModel(2), [(1, 0), (0, 1), (1, 1)], name="Z2tri")
    return oracle, p
