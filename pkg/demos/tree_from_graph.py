"""A tree drawn inside a graph with a small bottleneck constant.

Starting from a basepoint, points are placed at distance R = 20 Delta from
everything chosen so far, one per far-away component, each hooked to the
point it grew out of. The result is a tree whose distances match the
graph's up to the factors 8 Delta and 26 Delta.
"""
from pseudochar.treeapprox import build_tree, coarse_surjectivity_check, tree_with_chords, verify_qi

g = tree_with_chords(500, 20, 0)
t = build_tree(g, 0)
print(f"graph: {len(g)} vertices, {len(g.edges)} edges (a random tree plus 20 short chords)")
print(f"Delta = {t.delta}, R = {t.R}")
print(f"tree: {len(t)} vertices over {t.stats['rounds']} rounds")
print(f"edge images between {t.stats['edge_min']} and {t.stats['edge_max']}")

rows = []
rep = verify_qi(t, g, rows=rows)
print(f"{rep.pairs} interior pairs, {len(rep.violations)} outside the window")
print(f"graph distance per tree edge ranges from {float(rep.lower_ratio):.2f} to {float(rep.upper_ratio):.2f}")
print(f"closest approach to the window: {rep.worst_lower_slack} above the lower bound, "
      f"{rep.worst_upper_slack} below the upper bound")
print(f"every graph vertex within {coarse_surjectivity_check(t, g)} of the tree")
for x, y, n, d, ok in rows[:5]:
    print(f"  {x} -> {y}: {n} tree edges, graph distance {d}")
