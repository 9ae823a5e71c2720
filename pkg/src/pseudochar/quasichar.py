"""Quasicharacters, homogenization, defect estimates and scaling.

All values are exact :class:`fractions.Fraction`. A quasicharacter is bound
to the oracle it was built for and evaluates model elements; ``f(word)``
evaluates a word.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import count
from typing import Callable, Mapping, Sequence

from .errors import DegenerateInput, ResourceError
from .groups import GroupOracle, cayley_ball, invert_word

DEFAULT_DOUBLINGS = 12


class Quasicharacter:
    kind = "abstract"
    declared_defect: Fraction | None = None

    def __init__(self, oracle: GroupOracle):
        self.oracle = oracle

    def value(self, x) -> Fraction:
        raise NotImplementedError

    def power_value(self, x, n: int) -> Fraction:
        """Value of ``x**n``; subclasses override with closed forms."""
        return self.value(self.oracle.power(x, n))

    def __call__(self, word: Sequence[int]) -> Fraction:
        return self.value(self.oracle.element(word))

    def spec(self) -> dict:
        return {"kind": self.kind}


class Homomorphism(Quasicharacter):
    kind = "homomorphism"
    declared_defect = Fraction(0)

    def __init__(self, oracle: GroupOracle, values: Mapping[str, object]):
        super().__init__(oracle)
        unknown = set(values) - set(oracle.generators.symbols)
        if unknown:
            raise KeyError(f"unknown generators {sorted(unknown)}")
        self.values = {s: Fraction(values.get(s, 0)) for s in oracle.generators.symbols}
        self._letter = []
        for s in oracle.generators.symbols:
            self._letter += [self.values[s], -self.values[s]]

    def value(self, x) -> Fraction:
        if self.oracle._standard and self.oracle.model.kind == "free_abelian":
            return sum((e * v for e, v in zip(x, self.values.values())), Fraction(0))
        return sum((self._letter[l] for l in self.oracle.word_of(x)), Fraction(0))

    def power_value(self, x, n):
        return n * self.value(x)

    def stable_value(self, x):
        return self.value(x)

    def spec(self):
        return {"kind": self.kind, "values": {k: str(v) for k, v in self.values.items()}}


def zero_character(oracle: GroupOracle) -> Homomorphism:
    return Homomorphism(oracle, {})


def count_occurrences(text: Sequence[int], pattern: Sequence[int]) -> int:
    """Occurrences of ``pattern`` in ``text``, overlaps included."""
    m = len(pattern)
    if m == 0:
        return 0
    pattern = tuple(pattern)
    return sum(1 for i in range(len(text) - m + 1) if tuple(text[i:i + m]) == pattern)


def cyclic_decomposition(x: Sequence[int]):
    """Split a reduced word as ``u c u^-1`` with ``c`` cyclically reduced."""
    k = 0
    while k < len(x) - 1 - k and x[k] == x[len(x) - 1 - k] ^ 1:
        k += 1
    return tuple(x[:k]), tuple(x[k:len(x) - k])


class BrooksCounting(Quasicharacter):
    """Counting quasimorphism of a reduced word on a free group.

    ``value(x)`` is the number of occurrences of ``w`` minus those of
    ``w^-1`` in the reduced word of ``x``, overlaps included.
    """

    kind = "brooks"

    def __init__(self, oracle: GroupOracle, word: Sequence[int] | str):
        if oracle.model.kind != "free":
            raise ValueError("counting quasimorphisms need a free group oracle")
        super().__init__(oracle)
        if isinstance(word, str):
            word = oracle.parse(word)
        self.word = tuple(word)
        self.pattern = oracle.element(word)
        if not self.pattern:
            raise DegenerateInput("counted word is trivial")
        self.inverse_pattern = invert_word(self.pattern)

    def value(self, x) -> Fraction:
        return Fraction(count_occurrences(x, self.pattern) - count_occurrences(x, self.inverse_pattern))

    def power_value(self, x, n: int) -> Fraction:
        if n < 0:
            x, n = invert_word(x), -n
        if n == 0 or not x:
            return Fraction(0)
        u, c = cyclic_decomposition(x)
        m = max(len(self.pattern), len(self.inverse_pattern))
        base = -(-m // len(c)) + 1
        if n <= base + 1:
            return self.value(u + c * n + invert_word(u))
        v0 = self.value(u + c * base + invert_word(u))
        v1 = self.value(u + c * (base + 1) + invert_word(u))
        return v0 + (n - base) * (v1 - v0)

    def stable_value(self, x) -> Fraction:
        """Exact ``lim base(x**n) / n``: occurrences per period of the cyclic part."""
        if not x:
            return Fraction(0)
        _, c = cyclic_decomposition(x)
        period = c * (-(-len(self.pattern) // len(c)) + 1)
        m = len(self.pattern)
        cnt = 0
        for j in range(len(c)):
            seg = period[j:j + m]
            cnt += (seg == self.pattern) - (seg == self.inverse_pattern)
        return Fraction(cnt)

    def spec(self):
        return {"kind": self.kind, "word": self.oracle.format(self.word)}


class Homogenized(Quasicharacter):
    """``x -> base(x**(2**k)) / 2**k``, the truncated homogenization.

    With ``doublings=None`` the limit itself is returned, which needs a base
    with a closed form ``stable_value`` (homomorphisms, counting functions).
    Only that exact limit is a pseudocharacter: the truncated version is off
    by up to ``defect / 2**k`` at every element, so ``f(g^n) - n f(g)`` can
    reach ``(n + 1) * defect / 2**k``.
    """

    kind = "homogenized"

    def __init__(self, base: Quasicharacter, doublings: int | None = DEFAULT_DOUBLINGS):
        super().__init__(base.oracle)
        if doublings is None:
            if not hasattr(base, "stable_value"):
                raise ValueError(f"no exact limit available for {base.kind}")
        elif doublings < 1:
            raise ValueError("doublings must be at least 1")
        self.base = base
        self.doublings = doublings
        self._cache: dict = {}

    @property
    def exact(self) -> bool:
        return self.doublings is None

    def value(self, x) -> Fraction:
        v = self._cache.get(x)
        if v is None:
            if self.doublings is None:
                v = self.base.stable_value(x)
            else:
                v = homogenize_element(self.base, x, self.doublings)
            self._cache[x] = v
        return v

    def power_value(self, x, n):
        if self.doublings is None:
            return n * self.value(x)
        return self.value(self.oracle.power(x, n))

    def truncation_error(self, defect) -> Fraction:
        if self.doublings is None:
            return Fraction(0)
        return Fraction(defect) / 2 ** self.doublings

    def spec(self):
        return {"kind": self.kind, "doublings": self.doublings, "base": self.base.spec()}


class FunctionQuasicharacter(Quasicharacter):
    """User-supplied function of model elements (or an explicit value table)."""

    kind = "table"

    def __init__(self, oracle: GroupOracle, fn: Callable | Mapping, declared_defect=None):
        super().__init__(oracle)
        if isinstance(fn, Mapping):
            table = {oracle.element(oracle.parse(k) if isinstance(k, str) else k): Fraction(v)
                     for k, v in fn.items()}
            self.table = table
            fn = table.__getitem__
        self.fn = fn
        if declared_defect is not None:
            self.declared_defect = Fraction(declared_defect)

    def value(self, x) -> Fraction:
        return Fraction(self.fn(x))


class Scaled(Quasicharacter):
    def __init__(self, base: Quasicharacter, factor):
        super().__init__(base.oracle)
        self.base = base
        self.factor = Fraction(factor)
        self.kind = base.kind

    def value(self, x):
        return self.factor * self.base.value(x)

    def power_value(self, x, n):
        return self.factor * self.base.power_value(x, n)

    def spec(self):
        return {"kind": "scaled", "factor": str(self.factor), "base": self.base.spec()}


def evaluate(f: Quasicharacter, g: Sequence[int]) -> Fraction:
    return f(g)


def homogenize(f: Quasicharacter, g: Sequence[int], doublings: int = DEFAULT_DOUBLINGS,
               oracle: GroupOracle | None = None, max_length: int = 1 << 40) -> Fraction:
    """``f(g**(2**k)) / 2**k`` for a word ``g``.

    For a pseudocharacter this is ``f(g)`` exactly; in general consecutive
    terms differ by at most ``defect / 2**(k+1)``.
    """
    oracle = oracle or f.oracle
    return homogenize_element(f, oracle.element(tuple(g)), doublings, max_length)


def homogenize_element(f: Quasicharacter, x, doublings: int = DEFAULT_DOUBLINGS,
                       max_length: int = 1 << 40) -> Fraction:
    if doublings < 1:
        raise ValueError("doublings must be at least 1")
    n = 1 << doublings
    if not isinstance(f, (BrooksCounting, Homomorphism)):
        length = len(f.oracle.word_of(x)) * n
        if length > max_length:
            raise ResourceError(f"power of length {length} exceeds budget {max_length}")
    return f.power_value(x, n) / n


def defect_estimate(f: Quasicharacter, oracle: GroupOracle | None = None, radius: int = 2, ball=None) -> Fraction:
    """Max of ``|f(x) + f(y) - f(xy)|`` over pairs from the radius ball."""
    if radius < 1:
        raise ValueError("radius must be at least 1")
    oracle = oracle or f.oracle
    ball = ball or cayley_ball(oracle, radius)
    elems = [x for x, n in zip(ball.elements, ball.lengths) if n <= radius]
    vals = {x: f.value(x) for x in elems}
    cache = dict(vals)
    best = Fraction(0)
    mul = oracle.mul
    for x in elems:
        fx = vals[x]
        for y in elems:
            z = mul(x, y)
            fz = cache.get(z)
            if fz is None:
                fz = cache[z] = f.value(z)
            d = abs(fx + vals[y] - fz)
            if d > best:
                best = d
    return best


def epsilon(f: Quasicharacter, generators=None, radius: int = 2, defect=None) -> Fraction:
    """Largest generator value plus the measured defect."""
    oracle = f.oracle
    symbols = generators.symbols if generators is not None else oracle.generators.symbols
    top = max((abs(f(oracle.parse(s))) for s in symbols), default=Fraction(0))
    if defect is None:
        defect = defect_estimate(f, oracle, radius)
    return top + defect


def is_half_integer(v: Fraction) -> bool:
    return (2 * v).denominator == 1 and (2 * v).numerator % 2 == 1


def _candidate_scales():
    yield Fraction(1)
    for p in count(2):
        if all(p % q for q in range(2, int(p ** 0.5) + 1)):
            yield Fraction(1, p)


@dataclass
class PseudocharacterScaled:
    """A quasicharacter multiplied by ``scale`` so that edges change it by
    less than 1/4 and no checked vertex sits on a half-integer."""

    base: Quasicharacter
    scale: Fraction
    ball_radius_checked: int
    epsilon: Fraction
    defect: Fraction

    @property
    def oracle(self):
        return self.base.oracle

    def value(self, x) -> Fraction:
        return self.scale * self.base.value(x)

    def __call__(self, word) -> Fraction:
        return self.value(self.oracle.element(word))

    @property
    def scaled_epsilon(self) -> Fraction:
        return self.scale * self.epsilon

    @property
    def scaled_defect(self) -> Fraction:
        return self.scale * self.defect

    def check_values(self, values) -> None:
        if self.scaled_epsilon >= Fraction(1, 4):
            raise DegenerateInput(f"scaled epsilon {self.scaled_epsilon} is not below 1/4")
        for v in values:
            if is_half_integer(v):
                raise DegenerateInput(f"scaled value {v} is a half-integer")


def scale_normalize(f: Quasicharacter, oracle: GroupOracle | None = None, radius: int = 3,
                    defect=None, allow_zero: bool = False) -> PseudocharacterScaled:
    """Pick the first scale among 1, 1/2, 1/3, 1/5, 1/7, ... that works on the ball."""
    oracle = oracle or f.oracle
    ball = cayley_ball(oracle, radius)
    values = [f.value(x) for x in ball.elements]
    if defect is None:
        defect = defect_estimate(f, oracle, max(1, radius), ball=ball)
    eps = epsilon(f, radius=radius, defect=defect)
    if not any(values) and eps == 0:
        if allow_zero:
            return PseudocharacterScaled(f, Fraction(1), radius, eps, Fraction(defect))
        raise DegenerateInput("quasicharacter vanishes on the checked ball")
    for s in _candidate_scales():
        if s * eps >= Fraction(1, 4):
            continue
        if any(is_half_integer(s * v) for v in values):
            continue
        return PseudocharacterScaled(f, s, radius, eps, Fraction(defect))
