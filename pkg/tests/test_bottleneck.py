import random
from fractions import Fraction

import networkx as nx
import pytest

from oracles import atlas_connected, brute_graph, brute_pair, connected_graphs_8
from pseudochar.bottleneck import (
    DisconnectedError, MetricGraph, apsp, bottleneck_delta, bottleneck_pair, complete_graph,
    cycle_graph, midpoints, pair_maximin, path_graph, star_graph,
)


def test_apsp_examples():
    assert max(map(max, apsp(path_graph(5)))) == 4
    assert max(map(max, apsp(cycle_graph(6)))) == 3
    assert max(map(max, apsp(complete_graph(4)))) == 1
    g = MetricGraph("abc", [("a", "b", Fraction(1, 3)), ("b", "c", 2), ("a", "c", 5)])
    assert g.dist("a", "c") == Fraction(7, 3)


def test_disconnected():
    g = MetricGraph(range(4), [(0, 1), (2, 3)])
    with pytest.raises(DisconnectedError):
        apsp(g)


def test_bad_lengths():
    with pytest.raises(ValueError):
        MetricGraph(range(2), [(0, 1, 0)])


def test_trees_are_half():
    assert bottleneck_delta(path_graph(5)).delta == Fraction(1, 2)
    assert bottleneck_delta(star_graph(3, 4)).delta == Fraction(1, 2)
    assert bottleneck_delta(path_graph(5)).delta_half_edges == 1


def test_single_vertex():
    r = bottleneck_delta(MetricGraph([0], []))
    assert r.delta == 0 and r.witness_pair is None


@pytest.mark.parametrize("n", [4, 6, 8])
def test_even_cycles(n):
    r = bottleneck_delta(cycle_graph(2 * n))
    assert r.delta == Fraction(n, 2) + Fraction(1, 2)
    x, y = r.witness_pair
    assert cycle_graph(2 * n).dist(x, y) == n


def test_complete_graph():
    assert bottleneck_delta(complete_graph(4)).delta == 1


def test_midpoints():
    g = cycle_graph(8)
    assert sorted(midpoints(g, 0, 4)) == [2, 6]
    assert midpoints(g, 0, 1) == [("mid", 0)]


def test_weighted_matches_subdivided_unit_graph():
    # an edge of length 3 behaves like a path of three unit edges
    g = MetricGraph(range(4), [(0, 1), (1, 2), (2, 3), (3, 0, 3)])
    h = cycle_graph(6)
    for x, y in [(0, 2), (1, 3), (0, 3), (0, 1)]:
        assert bottleneck_pair(g, x, y) == bottleneck_pair(h, x, y)
    assert bottleneck_delta(g).delta == bottleneck_delta(h).delta


def test_io_roundtrip():
    g = MetricGraph(["a", "b", "c"], [("a", "b", Fraction(1, 2)), ("b", "c", 1)])
    back = MetricGraph.from_json(g.to_json())
    assert back.edges == g.edges
    dot = MetricGraph.from_dot('graph { a -- b [length="1/2"]; b -- c; }')
    assert dot.edges == g.edges
    assert MetricGraph.from_graph(nx.cycle_graph(5)).edges == cycle_graph(5).edges


def test_brute_pruning_is_exact():
    for G in atlas_connected(6):
        assert brute_graph(G, prune=False) == brute_graph(G)


def check_graph(G):
    b = brute_graph(G)
    g = MetricGraph.from_graph(G)
    for (x, y), v in b.items():
        assert bottleneck_pair(g, x, y) == v, (sorted(G.edges), x, y)
    batched = bottleneck_delta(g, per_pair=True)
    assert {k: v[0] for k, v in batched.per_pair.items()} == b
    if b:
        assert batched.delta == max(b.values())


def test_oracle_small_catalogue():
    for G in atlas_connected(7):
        check_graph(G)


@pytest.mark.slow
def test_oracle_eight_vertex_sample():
    graphs = connected_graphs_8()
    assert len(graphs) == 11117
    for G in random.Random(3).sample(graphs, 1500):
        check_graph(G)


def test_oracle_random_weighted():
    rng = random.Random(11)
    for _ in range(40):
        G = nx.gnp_random_graph(7, 0.45, seed=rng.randrange(1 << 30))
        if not nx.is_connected(G):
            continue
        for u, v in G.edges:
            G[u][v]["length"] = rng.choice([1, 2, 3])
        # reference: expand to unit edges, keep the original vertices
        H = nx.Graph()
        H.add_nodes_from(G.nodes)
        for u, v, d in G.edges(data=True):
            chain = [u] + [("e", u, v, k) for k in range(d["length"] - 1)] + [v]
            nx.add_path(H, chain)
        g = MetricGraph.from_graph(G)
        for x in G.nodes:
            for y in G.nodes:
                if x < y:
                    assert bottleneck_pair(g, x, y) == brute_pair(H, x, y)


def test_trees_minimal():
    for n in range(2, 8):
        graphs = [G for G in atlas_connected(7) if G.number_of_nodes() == n]
        deltas = {G: bottleneck_delta(MetricGraph.from_graph(G)).delta for G in graphs}
        low = min(deltas.values())
        assert low == Fraction(1, 2)
        assert all(deltas[G] == low for G in graphs if nx.is_tree(G))


def test_distance_preserving_chord_raises_maximin():
    # chords whose length equals the existing distance keep the metric; they add
    # paths, so each old midpoint's maximin can only go up
    for G in atlas_connected(6):
        g = MetricGraph.from_graph(G)
        D = nx.all_pairs_shortest_path_length(G)
        D = dict(D)
        nodes = sorted(G.nodes)
        for u in nodes:
            for v in nodes:
                if u < v and not G.has_edge(u, v):
                    h = MetricGraph(nodes, [(a, b, 1) for a, b in G.edges] + [(u, v, D[u][v])])
                    for x in nodes:
                        for y in nodes:
                            if x < y:
                                before, after = pair_maximin(g, x, y), pair_maximin(h, x, y)
                                for m, val in before.items():
                                    if not isinstance(m, tuple):
                                        assert after[m] >= val
                    break


def test_chord_can_raise_delta():
    g = path_graph(3)
    h = MetricGraph(range(3), [(0, 1), (1, 2), (0, 2, 2)])
    assert bottleneck_pair(g, 0, 2) == Fraction(1, 2)
    assert bottleneck_pair(h, 0, 2) == Fraction(3, 2)
