"""Ends of the free group relative to a homomorphism.

F2 with f(a) = 1, f(b) = 0. The slab tree cut out by f has many branches
going up and many going down, so f is "bushy". From the branches we pick
three elements whose rays leave through different branches, and from those
a pair that generates a free subgroup (checked on all short words).
Compare with Z^2, where the same recipe finds exactly one end each way.
"""
from pseudochar.ends import classify_ends, pingpong_pair, separated_triple
from pseudochar.groups import free_abelian_group, free_group
from pseudochar.quasichar import Homomorphism, scale_normalize
from pseudochar.slabtree import slab_tree

F2 = free_group(2)
f = scale_normalize(Homomorphism(F2, {"a": 1, "b": 0}), F2, 3)
print(f"scale chosen so edges move f by less than 1/4: {f.scale}")

trees = [slab_tree(F2, f, r) for r in (4, 6)]
for t in trees:
    print(f"radius {t.radius}: {len(t.vertex_spaces)} vertex spaces, {len(t.tracks)} tracks")

rep = classify_ends(trees)
print(f"ends above / below the barrier: {rep.counts} -> {rep.classification}"
      f" (certified across radii: {rep.certified})")

triple = separated_triple(trees[0], rep)
fmt = F2.format
print(f"g1 = {fmt(triple.g1)}, h = {fmt(triple.h)}, N = {triple.N}")
print(f"g2 = h g1^N has length {len(triple.g2)}, g3 has length {len(triple.g3)}")

pp = pingpong_pair(trees[0], triple)
cert = pp.certificate
print(f"ping-pong pair: g = {fmt(pp.g)}, |g'| = {len(pp.gp)}")
print(f"{cert['words_checked']} reduced words up to length {cert['max_length']} checked, "
      f"relations found: {len(cert['relations'])}")

# same recipe on Z^2: one end each way
Z2 = free_abelian_group(2)
fz = scale_normalize(Homomorphism(Z2, {"a": 1}), Z2, 3)
for r in (3, 5, 8):
    print(f"Z^2 radius {r}: counts {classify_ends(slab_tree(Z2, fz, r)).counts}")
