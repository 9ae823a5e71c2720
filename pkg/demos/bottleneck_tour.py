"""How far a path from x to y can stay from their midpoint.

Trees have the smallest possible constant (1/2): every path passes through
the midpoint. Long cycles let a path go round the other way, so the
constant grows with the length. A chord can raise the constant too, which
is easy to see on a path of three vertices.
"""
from fractions import Fraction

from pseudochar.bottleneck import (
    MetricGraph, bottleneck_delta, bottleneck_pair, complete_graph, cycle_graph, path_graph, star_graph,
)

for name, g in [("path P10", path_graph(10)), ("star, 3 legs of 5", star_graph(3, 5)),
                ("K4", complete_graph(4))]:
    res = bottleneck_delta(g)
    print(f"{name:20s} Delta = {res.delta}  witness {res.witness_pair}")

print()
for n in (4, 6, 8, 10):
    res = bottleneck_delta(cycle_graph(2 * n))
    print(f"C{2 * n:<3d} Delta = {res.delta}  (antipodal pair {res.witness_pair})")

print()
p3 = path_graph(3)
chorded = MetricGraph(range(3), [(0, 1), (1, 2), (0, 2, 2)])
print(f"P3:            Delta(0, 2) = {bottleneck_pair(p3, 0, 2)}")
print(f"P3 + chord 0-2: Delta(0, 2) = {bottleneck_pair(chorded, 0, 2)}")
print("the chord keeps every distance but adds a route avoiding vertex 1")

print()
weighted = MetricGraph("abc", [("a", "b", 1), ("b", "c", 3), ("a", "c", Fraction(5, 2))])
res = bottleneck_delta(weighted, per_pair=True)
for (x, y), (d, mid) in sorted(res.per_pair.items()):
    print(f"weighted triangle  Delta({x},{y}) = {d}")
