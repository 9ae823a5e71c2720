from fractions import Fraction

import numpy as np
import pytest

from pseudochar.errors import DegenerateInput, PreconditionError
from pseudochar.groups import cayley_ball, free_abelian_group, free_group, z2_triangular
from pseudochar.quasichar import BrooksCounting, Homogenized, Homomorphism, defect_estimate, scale_normalize
from pseudochar.slabtree import slab_tree
from pseudochar.xgraph import (
    build_X, build_X_rays, complete_tracks, gromov_product, interior_connected, quasiaction_to_action,
    varpi_fibres, verify_cobounded, verify_end_injectivity, verify_equivariance,
    verify_separation_lemmas, verify_x_bottleneck,
)


def scaled_tree(oracle, values, radius=3, presentation=None):
    f = scale_normalize(Homomorphism(oracle, values), oracle, 3)
    return slab_tree(oracle, f, radius, presentation=presentation)


@pytest.fixture(scope="module")
def Z():
    return free_group(1)


@pytest.fixture(scope="module")
def F2():
    return free_group(2)


@pytest.fixture(scope="module")
def zx(Z):
    return build_X(scaled_tree(Z, {"a": 1}), 4, 3, 10)


@pytest.fixture(scope="module")
def f2x(F2):
    return build_X(scaled_tree(F2, {"a": 1, "b": 0}), 3, 2, 8)


@pytest.fixture(scope="module")
def f2rays(F2):
    return build_X_rays(scaled_tree(F2, {"a": 1, "b": 0}), ("", "b", "b^-1"), "a", 25, 1)


def test_z_instance(zx):
    assert len(zx.tracks) == 2 and len(zx) == 18
    assert interior_connected(zx)
    assert verify_cobounded(zx) <= 1
    rep = verify_separation_lemmas(zx)
    assert rep["intersect_violations"] == 0 and rep["separation_violations"] == 0
    assert verify_x_bottleneck(zx).delta <= 2
    assert zx.truncation["translations_skipped"] == 0


def test_identity_tracks_adjacent(Z, zx):
    one = Z.identity
    a, b = zx.index(one, 0), zx.index(one, 1)
    assert zx.adjacency[a, b]
    h, n = zx.witness[(min(a, b), max(a, b))]
    assert h == one and n in (0, 1)


def test_z_edges_follow_levels(Z, zx):
    # in Z the condition reduces to: both translated points fit in one band
    f = zx.f
    for a in range(len(zx)):
        for b in range(a + 1, len(zx)):
            (ga, ta), (gb, tb) = zx.vertices[a], zx.vertices[b]
            va = f.value(ga) + zx.tracks[ta].level
            vb = f.value(gb) + zx.tracks[tb].level
            if abs(va - vb) > 2:
                assert not zx.adjacency[a, b]


def test_f2_instance(f2x):
    assert interior_connected(f2x)
    assert verify_cobounded(f2x) <= 1
    rep = verify_separation_lemmas(f2x)
    assert rep["intersect_violations"] == 0 and rep["separation_violations"] == 0
    assert verify_x_bottleneck(f2x).delta <= 10


def test_equivariance(F2, f2x, zx, Z):
    for x, oracle in ((f2x, F2), (zx, Z)):
        rep = verify_equivariance(x, cayley_ball(oracle, 1).elements)
        assert rep["symmetric"] and rep["checked"] > 0 and rep["violations"] == 0


def test_separation_lemma_on_rays(f2rays):
    rep = verify_separation_lemmas(f2rays)
    assert rep["separation_checked"] > 10_000
    assert rep["separation_violations"] == 0 and rep["intersect_violations"] == 0
    assert f2rays.distances().max() >= 5


def test_end_injectivity_f2(F2, f2rays):
    x = f2rays
    P = lambda w, t: x.index(F2.element(F2.parse(w)), t)
    base, omega = P("", 1), P("", 0)
    A = [P(f"a^{5 * i}" if i else "", 0) for i in range(6)]
    B = [P(f"b a^{5 * i}" if i else "b", 0) for i in range(6)]
    rep = verify_end_injectivity(x, base, A, B, omega)
    assert rep["cross_violations"] == [] and rep["same_end_violations"] == []
    D = x.distances()
    assert D[base, A[-1]] > D[base, A[1]]
    with pytest.raises(PreconditionError):
        verify_end_injectivity(x, base, A, A, omega)


def test_end_injectivity_z(Z):
    x = build_X_rays(scaled_tree(Z, {"a": 1}), ("",), "a", 30, 1)
    P = lambda k, t: x.index(Z.element(Z.parse(f"a^{k}")), t)
    base = P(0, 0)
    A = [P(5 * i, 0) for i in range(6)]
    B = [P(-5 * i, 1) for i in range(6)]
    rep = verify_end_injectivity(x, base, A, B, base)
    assert rep["bound"] == 11 and not rep["cross_violations"] and not rep["same_end_violations"]


def test_gromov_product(f2x):
    D = f2x.distances()
    base = 0
    assert gromov_product(f2x, base, 5, 5) == D[base, 5]
    assert gromov_product(f2x, base, base, 7) == 0
    n = len(f2x)
    for u in range(0, n, 7):
        for v in range(0, n, 5):
            p = gromov_product(f2x, base, u, v)
            assert 0 <= p <= min(D[base, u], D[base, v])


def test_needs_tracks():
    Z2 = free_abelian_group(2)
    with pytest.raises(PreconditionError):
        complete_tracks(scaled_tree(Z2, {"a": 1}, 4))
    T, P = z2_triangular()
    tree = scaled_tree(T, {"a": 1, "b": 0, "x": 1}, 3, presentation=P)
    # Z^2 tracks are whole lines, never contained in a finite region
    assert complete_tracks(tree) == []
    with pytest.raises(DegenerateInput):
        build_X(tree, 1, 1, 4)


def test_truncation_reported(F2):
    x = build_X(scaled_tree(F2, {"a": 1, "b": 0}), 3, 3, 8, track_radius=3)
    assert x.truncation["translations_skipped"] > 0
    assert x.truncation["non_edges_not_exhaustive"] >= 0


def test_varpi_and_exports(zx):
    fib = varpi_fibres(zx)
    assert sum(fib.values()) == len(zx)
    assert zx.to_dot().startswith("graph X {")
    js = zx.to_json()
    assert len(js["vertices"]) == 18 and js["ambient_radius"] == 10


def test_action_graph_exact_action(Z):
    els = [Z.element(Z.parse(f"a^{k}")) for k in range(-6, 7)]
    chi = lambda g: len(g) * (1 if not g or g[0] == 0 else -1)
    Y = quasiaction_to_action(Z, els, list(range(-10, 11)), lambda g, x: chi(g) + x,
                              lambda x, y: abs(x - y), Fraction(1, 2), translators=cayley_ball(Z, 1).elements)
    rep = Y.report
    assert rep["isometry_violations"] == 0 and rep["isometry_checked"] > 0
    assert rep["max_displacement"] <= 1
    # C = 1/2 only joins equal images, so Y is the disjoint union of orbits of positions
    D = Y.distances()
    o = Y.index(Z.identity, 0)
    assert D[o, Y.index(els[7], -1)] == 1 and D[o, Y.index(Z.identity, 1)] == -1


def test_action_graph_quasi_line(Z):
    els = [Z.element(Z.parse(f"a^{k}")) for k in range(-8, 9)]
    chi = lambda g: len(g) * (1 if not g or g[0] == 0 else -1)
    Y = quasiaction_to_action(Z, els, list(range(-12, 13)), lambda g, x: chi(g) + x,
                              lambda x, y: abs(x - y), 1, translators=cayley_ball(Z, 1).elements)
    D = Y.distances()
    o = Y.index(Z.identity, 0)
    for x in range(-12, 13):
        assert abs(D[o, Y.index(Z.identity, x)] - abs(x)) <= 1


def test_action_graph_brooks_quasi_action(F2):
    h = Homogenized(BrooksCounting(F2, "ab"))
    d = defect_estimate(h, F2, 2)
    act = lambda g, x: x + round(h.value(g))
    C = d + 1
    els = cayley_ball(F2, 2).elements
    Y = quasiaction_to_action(F2, els, list(range(-6, 7)), act, lambda x, y: abs(x - y), C,
                              translators=cayley_ball(F2, 1).elements)
    assert Y.report["isometry_violations"] == 0
    assert Y.report["max_displacement"] <= 1


def test_action_graph_empty_and_closed(Z):
    Y = quasiaction_to_action(Z, [], [], lambda g, x: x, lambda x, y: 0, 1)
    assert len(Y) == 0 and Y.report["edges"] == 0
    els = [Z.identity, Z.element(Z.parse("a"))]
    with pytest.raises(PreconditionError):
        quasiaction_to_action(Z, els, [0], lambda g, x: x + len(g), lambda x, y: abs(x - y), 1,
                              require_closed=True)
