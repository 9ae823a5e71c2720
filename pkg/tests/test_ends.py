import pytest

from pseudochar.ends import (
    classify_ends, fixed_end_dynamics, pingpong_pair, ray_direction, relation_search,
    separated_triple, separation, sign_of, unambiguously_positive,
)
from pseudochar.errors import PreconditionError
from pseudochar.groups import cayley_ball, free_abelian_group, free_group
from pseudochar.quasichar import (
    BrooksCounting, Homogenized, Homomorphism, scale_normalize, zero_character,
)
from pseudochar.slabtree import slab_tree


@pytest.fixture(scope="module")
def F2():
    return free_group(2)


@pytest.fixture(scope="module")
def f2_trees(F2):
    f = scale_normalize(Homomorphism(F2, {"a": 1, "b": 0}), F2, 3)
    return [slab_tree(F2, f, 4), slab_tree(F2, f, 6)]


@pytest.fixture(scope="module")
def f2_triple(f2_trees):
    return separated_triple(f2_trees[0], classify_ends(f2_trees))


def z2_tree(radius, values=None):
    Z = free_abelian_group(2)
    f = scale_normalize(Homomorphism(Z, values or {"a": 1}), Z, 3)
    return slab_tree(Z, f, radius)


def test_sign_of(F2):
    h = Homomorphism(F2, {"a": 1, "b": 0})
    assert sign_of(h, F2.parse("a")) == 1
    assert sign_of(h, F2.parse("a^-1")) == -1
    assert sign_of(h, F2.parse("b")) == 0
    hab = Homogenized(BrooksCounting(F2, "ab"))
    assert sign_of(hab, F2.parse("ab")) == 1


def test_z2_uniform():
    for r in range(3, 9):
        rep = classify_ends(z2_tree(r))
        assert rep.counts == (1, 1)
        assert rep.classification == "consistent with uniform"
        assert not rep.certified


def test_zero_inconclusive(F2):
    f = scale_normalize(zero_character(F2), F2, 2, allow_zero=True)
    rep = classify_ends(slab_tree(F2, f, 3))
    assert rep.counts == (0, 0) and rep.classification == "inconclusive"


def test_f2_bushy(f2_trees):
    rep = classify_ends(f2_trees)
    assert rep.positive_count >= 2 and rep.negative_count >= 2
    assert rep.classification == "bushy" and rep.certified
    single = classify_ends(f2_trees[0])
    assert single.classification == "bushy" and not single.certified


def test_radius_too_small(F2):
    f = scale_normalize(Homomorphism(F2, {"a": 1, "b": 0}), F2, 3)
    with pytest.raises(PreconditionError):
        classify_ends(slab_tree(F2, f, 2))


def test_monotone_in_R():
    tree = z2_tree(26)
    counts = [classify_ends(tree, R).counts for R in (4, 3, 2)]
    for a, b in zip(counts, counts[1:]):
        assert b[0] >= a[0] and b[1] >= a[1]


def test_monotone_in_R_along_rays(F2):
    f = scale_normalize(Homomorphism(F2, {"a": 1, "b": 0}), F2, 3)
    centers = [F2.parse(p) + (0 if k > 0 else 1,) * abs(k) for p in ("1", "b") for k in range(-24, 25)]
    ball = cayley_ball(F2, 2, centers=centers)
    from pseudochar.slabtree import build_slab_tree
    tree = build_slab_tree(ball, f)
    counts = [classify_ends(tree, R).counts for R in (3, 2, 1)]
    for a, b in zip(counts, counts[1:]):
        assert b[0] >= a[0] and b[1] >= a[1]
    assert counts[0][0] >= 2


def test_scaling_invariance(F2):
    for oracle, vals, r in ((F2, {"a": 1, "b": 0}, 4), (free_abelian_group(2), {"a": 1}, 6)):
        f1 = scale_normalize(Homomorphism(oracle, vals), oracle, 3)
        f2 = scale_normalize(Homomorphism(oracle, {k: 2 * v for k, v in vals.items()}), oracle, 3)
        assert f1.scale != f2.scale
        r1 = classify_ends(slab_tree(oracle, f1, r))
        r2 = classify_ends(slab_tree(oracle, f2, r))
        assert (r1.counts, r1.classification) == (r2.counts, r2.classification)


def test_unambiguously_positive(F2):
    h = Homomorphism(F2, {"a": 1, "b": 0})
    ups = unambiguously_positive(h, F2, 2)
    assert F2.parse("a") in ups and F2.parse("b") not in ups
    assert unambiguously_positive(zero_character(F2), F2, 2) == []
    hab = Homogenized(BrooksCounting(F2, "ab"))
    from pseudochar.quasichar import defect_estimate
    d = defect_estimate(hab, F2, 2)
    assert (F2.parse("ab") in unambiguously_positive(hab, F2, 2)) == (1 > d)


def test_separated_triple(F2, f2_triple):
    t = f2_triple
    assert t.g1 == F2.parse("a")
    assert t.N == 248  # > 99 * (5/2) / 1
    assert t.g2 == t.h + t.g1 * t.N
    assert all(v is True for k, v in t.checks.items() if k.startswith(("g2", "g3", "f(g2", "f(g3", "f(h")))
    h = Homomorphism(F2, {"a": 1, "b": 0})
    assert all(h(g) > 0 for g in (t.g1, t.g2, t.g3))
    assert t.directions["g1+"].component != t.directions["g2+"].component
    assert t.directions["g1-"].component != t.directions["g3-"].component


def test_triple_not_bushy():
    tree = z2_tree(6)
    with pytest.raises(PreconditionError):
        separated_triple(tree, classify_ends(tree))


def test_triple_with_negative_b(F2):
    f = scale_normalize(Homomorphism(F2, {"a": 1, "b": -1}), F2, 3)
    trees = [slab_tree(F2, f, 4), slab_tree(F2, f, 5)]
    t = separated_triple(trees[0], classify_ends(trees))
    h = f.base
    assert h(t.g3) > 0 and h(t.g2) > 0
    assert {2, 3} & set(t.h_neg)  # the second negative direction goes through b


def test_pingpong(F2, f2_trees, f2_triple):
    pp = pingpong_pair(f2_trees[0], f2_triple)
    assert pp.certificate["passed"] and pp.certificate["words_checked"] == 4 * sum(3 ** k for k in range(6))
    assert pp.g == f2_triple.g1
    assert pp.gp == f2_triple.g2 + f2_triple.g3
    assert len({d.component for d in pp.directions.values()}) == 4


def test_relation_search_hand_supplied(F2):
    checked, rel = relation_search(F2, F2.parse("a"), F2.parse("b a b^-1"), 6)
    assert rel == [] and checked == 1456
    checked, rel = relation_search(F2, F2.parse("a"), F2.parse("a^2"), 3)
    assert rel  # a^2 = (a)^2 gives X X Y^-1


def test_pingpong_not_bushy():
    tree = z2_tree(6)
    with pytest.raises(PreconditionError):
        pingpong_pair(tree)


def test_dynamics_z():
    Z = free_group(1)
    f = scale_normalize(Homomorphism(Z, {"a": 1}), Z, 3)
    tree = slab_tree(Z, f, 12)
    rep = fixed_end_dynamics(tree, Z.parse("a"), [((), Z.parse("a")), ((), Z.parse("a^-1"))])
    assert rep["attracting"] != rep["repelling"]
    assert rep["samples"][0]["attracted_from"] == 0
    assert rep["samples"][1]["status"] == "repelling direction"
    sep = separation(tree)
    assert len(sep.positive()) == 1 and len(sep.negative()) == 1


def test_dynamics_f2(F2, f2_trees):
    rep = fixed_end_dynamics(f2_trees[0], F2.parse("a"), [(F2.parse("b"), F2.parse("a"))])
    row = rep["samples"][0]
    assert row["attracted_from"] is not None and row["attracted_from"] <= 3
    assert all(r["attracted"] for r in row["table"] if r["n"] >= row["attracted_from"])


def test_dynamics_sign_zero(F2, f2_trees):
    with pytest.raises(PreconditionError):
        fixed_end_dynamics(f2_trees[0], F2.parse("b"), [])


def test_action_compatibility(F2):
    f = scale_normalize(Homomorphism(F2, {"a": 1, "b": 0}), F2, 3)
    sep = separation(slab_tree(F2, f, 8))
    ball2 = cayley_ball(F2, 2).words
    a = F2.parse("a")
    rays = {}
    for p in ball2:
        rays.setdefault(ray_direction(sep, a, p).component, []).append(p)
    # ball-1 translates; ball-2 elements are products of two of them
    for g in cayley_ball(F2, 1).words:
        for comp, prefixes in rays.items():
            image = {ray_direction(sep, a, g + p).component for p in prefixes}
            assert len(image) == 1
