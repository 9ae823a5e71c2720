"""Independent reference implementations used only by the tests."""
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import networkx as nx


def subdivided(G):
    """Unit-length graph -> subdivided graph with integer half-edge weights."""
    S = nx.Graph()
    S.add_nodes_from(G.nodes)
    for k, (u, v) in enumerate(G.edges):
        S.add_edge(u, ("m", k))
        S.add_edge(("m", k), v)
    return S


def brute_pair(G, x, y, prune=True, S=None, dist=None):
    """Pair bottleneck constant by exhaustive simple-path search.

    Works in half-edge units on the subdivided graph and returns a Fraction
    in original units. With ``prune`` the search abandons a partial path once
    its closest approach cannot beat the best complete path (exact).
    """
    S = S or subdivided(G)
    dist = dist or dict(nx.all_pairs_shortest_path_length(S))
    dxy = dist[x][y]
    mids = [m for m in S.nodes if dist[x][m] * 2 == dxy and dist[y][m] * 2 == dxy]
    assert mids
    best_delta = None
    for m in mids:
        dm = dist[m]
        cap = min(dm[x], dm[y])
        best = -1
        stack = [(x, dm[x], frozenset([x]))]
        while stack:
            v, low, seen = stack.pop()
            if prune and low <= best:
                continue
            if v == y:
                best = max(best, low)
                if prune and best == cap:
                    break
                continue
            for w in S[v]:
                if w not in seen:
                    stack.append((w, min(low, dm[w]), seen | {w}))
        realized = sorted(set(dm.values()))
        above = [r for r in realized if r > best]
        delta = above[0] if above else realized[-1] + 1
        if best_delta is None or delta < best_delta:
            best_delta = delta
    return Fraction(best_delta, 2)


def brute_graph(G, prune=True):
    S = subdivided(G)
    dist = dict(nx.all_pairs_shortest_path_length(S))
    return {(x, y): brute_pair(G, x, y, prune, S, dist) for x, y in combinations(sorted(G.nodes), 2)}


def atlas_connected(max_n=7):
    for G in nx.graph_atlas_g():
        if 1 <= G.number_of_nodes() <= max_n and nx.is_connected(G):
            yield G


@lru_cache(maxsize=None)
def connected_graphs_8():
    """All connected graphs on 8 vertices up to isomorphism (11117 of them).

    Every connected graph has a vertex whose removal leaves some 7-vertex
    graph, so adding a vertex with every nonempty neighbourhood to every
    7-vertex atlas graph covers all of them; pynauty certificates dedupe.
    """
    import pynauty

    seen = {}
    base = [G for G in nx.graph_atlas_g() if G.number_of_nodes() == 7]
    for G in base:
        adj = {v: set(G[v]) for v in range(7)}
        for mask in range(1, 128):
            nb = {v for v in range(7) if mask >> v & 1}
            a = {v: set(adj[v]) for v in range(7)}
            a[7] = nb
            for v in nb:
                a[v].add(7)
            H = nx.Graph(a)
            if not nx.is_connected(H):
                continue
            cert = pynauty.certificate(pynauty.Graph(8, adjacency_dict={v: sorted(a[v]) for v in a}))
            if cert not in seen:
                seen[cert] = H
    return list(seen.values())


def tree_approx_reference(G, base, R):
    """Plain re-implementation of the tree construction on a unit graph.

    Returns {graph vertex: parent graph vertex or None}.
    """
    chosen = {base: None}
    prev_owner = {v: base for v in G.nodes}  # vertex -> chosen point of its previous component
    while True:
        d = nx.multi_source_dijkstra_path_length(G, set(chosen))
        far = [v for v in G.nodes if d[v] >= R]
        if not far:
            return chosen
        H = G.subgraph(far)
        owner = {}
        for comp in nx.connected_components(H):
            low = min(d[v] for v in comp)
            v = min(u for u in comp if d[u] == low)
            chosen[v] = prev_owner[v]
            for u in comp:
                owner[u] = v
        prev_owner = owner
