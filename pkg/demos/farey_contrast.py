"""The Farey graph: a bounded bottleneck constant, an unbounded orbit.

Fractions p/q and r/s are joined when ps - qr = +-1. PSL(2,Z) acts on the
graph by Mobius maps. Slices with bigger denominators keep the same
bottleneck constant, while the orbit of infinity under longer words keeps
spreading out.
"""
from pseudochar import farey

print("Q = 1:", [farey.fmt(v) for v in farey.farey_graph(1).vertices], "a triangle")
print("A fixes", farey.fmt(farey.mobius_act(farey.A, farey.INF)),
      "and B fixes", farey.fmt(farey.mobius_act(farey.B, (0, 1))))
print("order of AB in PSL(2,Z):", farey.finite_order_check(farey.mat_mul(farey.A, farey.B)))

rep = farey.farey_bottleneck_stability([5, 10, 20, 40])
for r in rep["rows"]:
    print(f"Q = {r['Q']:3d}: {r['vertices']:4d} vertices, Delta = {r['delta']}")

g = farey.farey_graph(40)
for k in range(0, 8):
    d, info = farey.orbit_diameter(g, farey.INF, k)
    print(f"words of length <= {k}: orbit diameter {d} ({info['in_slice']} of {info['orbit_points']} points in the slice)")
