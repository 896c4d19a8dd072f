"""Small brute-force oracles shared by the tests.

Everything here trades efficiency for obviousness: graphs are enumerated
exhaustively and properties are computed straight from their definitions,
independently of the package's own algorithms.
"""

import itertools

from bnorder import CycleError, Dag, Pdag


def all_dags(nodes):
    """Every DAG on the given labelled nodes, by brute enumeration.

    Each unordered pair is absent, oriented one way, or oriented the
    other; cyclic combinations are discarded.
    """
    nodes = tuple(nodes)
    pairs = list(itertools.combinations(nodes, 2))
    out = []
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (u, v), s in zip(pairs, states):
            if s == 1:
                edges.append((u, v))
            elif s == 2:
                edges.append((v, u))
        try:
            out.append(Dag(nodes, edges))
        except CycleError:
            continue
    return out


def skeleton_of(edges):
    return frozenset(frozenset(e) for e in edges)


def v_structures_of(dag):
    """Unshielded colliders as ((x, y) sorted, z) triples."""
    found = set()
    for z in dag.nodes:
        ps = sorted(dag.parents(z))
        for x, y in itertools.combinations(ps, 2):
            if not dag.adjacent(x, y):
                found.add(((x, y), z))
    return frozenset(found)


def mec_key(dag):
    """Equivalence-class fingerprint: skeleton plus v-structures."""
    return (skeleton_of(dag.edges), v_structures_of(dag))


def group_by(items, key):
    groups = {}
    for item in items:
        groups.setdefault(key(item), []).append(item)
    return {k: tuple(v) for k, v in groups.items()}


def random_dag(rng, nodes, p=0.4):
    """A random DAG: orient each pair along a random node permutation."""
    order = list(rng.permutation(len(nodes)))
    rank = {nodes[i]: order.index(i) for i in range(len(nodes))}
    edges = []
    for u, v in itertools.combinations(nodes, 2):
        if rng.random() < p:
            edges.append((u, v) if rank[u] < rank[v] else (v, u))
    return Dag(nodes, edges)


def random_pdag(rng, nodes, p=0.4):
    """A random PDAG: each pair absent, directed either way, or undirected."""
    directed = []
    undirected = []
    for u, v in itertools.combinations(nodes, 2):
        if rng.random() >= p:
            continue
        kind = rng.integers(0, 3)
        if kind == 0:
            directed.append((u, v))
        elif kind == 1:
            directed.append((v, u))
        else:
            undirected.append((u, v))
    return Pdag(nodes, directed, undirected)
