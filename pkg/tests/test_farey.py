from fractions import Fraction

import networkx as nx
import pytest

from pseudochar.farey import (
    A, B, I, INF, adjacent, edge_preservation, farey_graph, farey_bottleneck_stability,
    finite_order_check, fmt, mat_inv, mat_mul, mobius_act, orbit, orbit_diameter, parse_vertex,
)


def test_q1_triangle():
    g = farey_graph(1)
    assert g.vertices == [(0, 1), (1, 1), INF]
    assert sorted(g.edges) == [(0, 1), (0, 2), (1, 2)]


def test_q2():
    g = farey_graph(2)
    half = g.index[(1, 2)]
    nbrs = {g.vertices[j] for i, j in g.edges if i == half} | {g.vertices[i] for i, j in g.edges if j == half}
    assert nbrs == {(0, 1), (1, 1)}
    assert all(i != j for i, j in g.edges)


def test_edges_match_definition():
    g = farey_graph(9, window=(-1, 2))
    want = {(i, j) for i in range(len(g)) for j in range(i + 1, len(g)) if adjacent(g.vertices[i], g.vertices[j])}
    assert set(g.edges) == want
    assert all(Fraction(-1) <= Fraction(*v) <= 2 for v in g.vertices if v != INF)


def test_parse_and_format():
    assert parse_vertex("inf") == INF and parse_vertex("3/0") == INF
    assert parse_vertex("2/-4") == (-1, 2)
    assert parse_vertex("5") == (5, 1)
    assert fmt(parse_vertex("-1/2")) == "-1/2"
    with pytest.raises(ValueError):
        parse_vertex("0/0")


def test_generators_fix_points():
    assert mobius_act(A, INF) == INF
    assert mobius_act(B, (0, 1)) == (0, 1)
    assert mobius_act(A, (0, 1)) == (1, 1)
    for v in [(0, 1), (1, 3), INF, (-2, 5)]:
        assert mobius_act(I, v) == v
    with pytest.raises(ValueError):
        mobius_act((2, 0, 0, 1), (0, 1))


def test_finite_order():
    AB = mat_mul(A, B)
    assert finite_order_check(AB) == 3
    assert finite_order_check(A) is None
    assert finite_order_check(I) == 1
    for v in [(0, 1), (2, 7), INF]:
        w = v
        for _ in range(3):
            w = mobius_act(AB, w)
        assert w == v
    assert mat_mul(A, mat_inv(A)) == I


def test_edge_preservation():
    rep = edge_preservation(farey_graph(50), 4)
    assert rep["violations"] == 0 and rep["checked"] > 1000
    assert rep["matrices"] > 1


def test_orbit_diameter():
    g = farey_graph(40)
    assert orbit_diameter(g, INF, 0)[0] == 0
    d3, r3 = orbit_diameter(g, INF, 3)
    d6, r6 = orbit_diameter(g, INF, 6)
    assert d6 > d3 > 0
    assert r6["escaped"] > 0 and r6["in_slice"] + r6["escaped"] == r6["orbit_points"]
    # A alone fixes infinity
    assert orbit_diameter(g, INF, 5, generators=(A,))[0] == 0
    assert orbit(INF, 2, (A,)) == {INF}
    with pytest.raises(ValueError):
        orbit_diameter(g, (1, 99), 1)


def test_distances_against_networkx():
    g = farey_graph(12)
    G = nx.Graph(g.edges)
    D = g.distances()
    sp = dict(nx.all_pairs_shortest_path_length(G))
    assert all(D[i, j] == sp[i][j] for i in range(len(g)) for j in range(len(g)))


def test_stability():
    rep = farey_bottleneck_stability([10, 20, 40])
    deltas = [r["delta"] for r in rep["rows"]]
    assert rep["stable"]
    assert deltas[1] <= deltas[0] + 1 and deltas[2] <= deltas[1] + 1
    # adding vertices never makes a path longer
    assert all(r["shared_pairs_longer"] == 0 for r in rep["rows"][1:])
    with pytest.raises(ValueError):
        farey_bottleneck_stability([20, 10])


def test_single_vertex_window():
    g = farey_graph(1, window=(0, 0), infinity=False)
    assert g.vertices == [(0, 1)] and g.edges == []
    assert g.distances().tolist() == [[0]]
    from pseudochar.bottleneck import bottleneck_delta
    assert bottleneck_delta(g.metric()).delta == 0


def test_exports():
    g = farey_graph(3)
    js = g.to_json()
    assert js["vertices"][-1] == "1/0" and len(js["edges"]) == len(g.edges)
    assert g.to_dot().startswith("graph farey {")
    assert g.dumps() == farey_graph(3).dumps()
