"""Directed and partially directed graphs over named variables.

Graphs carry their node sequence explicitly. The sequence mirrors the column
order of the dataset under study, and every operation that scans nodes, node
pairs or candidate edits does so in that order. Search behaviour is therefore
a deterministic function of the column ordering and of nothing else.
"""

import itertools
from dataclasses import dataclass

__all__ = [
    "ADD",
    "DELETE",
    "REVERSE",
    "CycleError",
    "Dag",
    "EdgeChange",
    "Pdag",
    "dag_to_cpdag",
    "enumerate_changes",
    "extend_pdag",
    "is_acyclic",
    "is_covered",
    "markov_equivalent",
    "propagate_orientations",
    "topological_order",
]

ADD = "add"
DELETE = "delete"
REVERSE = "reverse"


class CycleError(ValueError):
    """The operation needs an acyclic graph but was handed a cyclic one."""


@dataclass(frozen=True)
class EdgeChange:
    """A single-arc edit of kind "add", "delete" or "reverse"."""

    kind: str
    arc: tuple[str, str]

    def __post_init__(self):
        if self.kind not in (ADD, DELETE, REVERSE):
            raise ValueError(f"unknown change kind {self.kind!r}")
        u, v = self.arc
        if u == v:
            raise ValueError(f"self loop {u!r}")

    def __repr__(self):
        return f"{self.kind}({self.arc[0]}->{self.arc[1]})"


def _check_nodes(nodes):
    if len(set(nodes)) != len(nodes):
        raise ValueError("duplicate node names")
    return nodes


class Dag:
    """Directed graph with named nodes, acyclic unless built with check=False.

    Instances are immutable; edits go through apply() and return new graphs,
    so values can be shared freely between threads or worker processes.
    The unchecked form exists so that is_acyclic() has something to reject.
    """

    __slots__ = ("nodes", "edges", "_pos", "_parents", "_children")

    def __init__(self, nodes, edges=(), check=True):
        self.nodes = _check_nodes(tuple(nodes))
        self._pos = {name: i for i, name in enumerate(self.nodes)}
        edges = frozenset((u, v) for u, v in edges)
        parents = {v: set() for v in self.nodes}
        children = {v: set() for v in self.nodes}
        for u, v in edges:
            if u not in self._pos or v not in self._pos:
                raise ValueError(f"edge ({u!r}, {v!r}) mentions an unknown node")
            if u == v:
                raise ValueError(f"self loop on {u!r}")
            parents[v].add(u)
            children[u].add(v)
        self.edges = edges
        self._parents = {v: frozenset(s) for v, s in parents.items()}
        self._children = {v: frozenset(s) for v, s in children.items()}
        if check and not is_acyclic(self):
            raise CycleError("edge set contains a directed cycle")

    def position(self, name):
        return self._pos[name]

    def parents(self, v):
        return self._parents[v]

    def children(self, v):
        return self._children[v]

    def in_degree(self, v):
        return len(self._parents[v])

    def has_edge(self, u, v):
        return (u, v) in self.edges

    def adjacent(self, u, v):
        return (u, v) in self.edges or (v, u) in self.edges

    def skeleton(self):
        """Undirected edge set as name-canonical (min, max) pairs."""
        return frozenset((u, v) if u < v else (v, u) for u, v in self.edges)

    def apply(self, change):
        """Return the graph after one edit; the result is re-checked."""
        u, v = change.arc
        if change.kind == ADD:
            if self.adjacent(u, v):
                raise ValueError(f"cannot add {u}->{v}: pair already linked")
            edges = self.edges | {(u, v)}
        elif change.kind == DELETE:
            if (u, v) not in self.edges:
                raise ValueError(f"cannot delete absent arc {u}->{v}")
            edges = self.edges - {(u, v)}
        else:
            if (u, v) not in self.edges:
                raise ValueError(f"cannot reverse absent arc {u}->{v}")
            edges = (self.edges - {(u, v)}) | {(v, u)}
        return Dag(self.nodes, edges)

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def __hash__(self):
        return hash((self.nodes, self.edges))

    def __repr__(self):
        return f"Dag({len(self.nodes)} nodes, {len(self.edges)} arcs)"


class Pdag:
    """Graph with a directed part and an undirected part, disjoint on pairs.

    Undirected edges are stored as name-canonical (min, max) pairs. A Dag is
    the special case with an empty undirected part.
    """

    __slots__ = ("nodes", "directed", "undirected", "_pos")

    def __init__(self, nodes, directed=(), undirected=()):
        self.nodes = _check_nodes(tuple(nodes))
        self._pos = {name: i for i, name in enumerate(self.nodes)}
        self.directed = frozenset((u, v) for u, v in directed)
        und = set()
        for u, v in undirected:
            if u == v:
                raise ValueError(f"self loop on {u!r}")
            und.add((u, v) if u < v else (v, u))
        self.undirected = frozenset(und)
        pairs = set()
        for u, v in self.directed:
            if u not in self._pos or v not in self._pos:
                raise ValueError(f"edge ({u!r}, {v!r}) mentions an unknown node")
            if u == v:
                raise ValueError(f"self loop on {u!r}")
            pair = (u, v) if u < v else (v, u)
            if pair in pairs or (v, u) in self.directed:
                raise ValueError(f"pair {pair} carries more than one edge")
            pairs.add(pair)
        for u, v in self.undirected:
            if u not in self._pos or v not in self._pos:
                raise ValueError(f"edge ({u!r}, {v!r}) mentions an unknown node")
            if (u, v) in pairs:
                raise ValueError(f"pair ({u}, {v}) is both directed and undirected")

    def position(self, name):
        return self._pos[name]

    def skeleton(self):
        out = set(self.undirected)
        for u, v in self.directed:
            out.add((u, v) if u < v else (v, u))
        return frozenset(out)

    def adjacent(self, u, v):
        pair = (u, v) if u < v else (v, u)
        return pair in self.skeleton()

    def __eq__(self, other):
        if not isinstance(other, Pdag):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.directed == other.directed
            and self.undirected == other.undirected
        )

    def __hash__(self):
        return hash((self.nodes, self.directed, self.undirected))

    def __repr__(self):
        return (
            f"Pdag({len(self.nodes)} nodes, {len(self.directed)} directed, "
            f"{len(self.undirected)} undirected)"
        )


def is_acyclic(dag):
    """True iff the edge set admits a topological order (Kahn count)."""
    indeg = {v: dag.in_degree(v) for v in dag.nodes}
    frontier = [v for v in dag.nodes if indeg[v] == 0]
    seen = 0
    while frontier:
        v = frontier.pop()
        seen += 1
        for c in sorted(dag.children(v)):
            indeg[c] -= 1
            if indeg[c] == 0:
                frontier.append(c)
    return seen == len(dag.nodes)


def topological_order(dag):
    """Unique topological order: parents first, names as late as the
    constraints allow for late-alphabet nodes.

    Built back to front by repeatedly placing the name-largest sink last,
    which puts every node as early as its ancestors permit, prioritised by
    ascending name. Raises CycleError on cyclic input.
    """
    outdeg = {v: len(dag.children(v)) for v in dag.nodes}
    available = {v for v, d in outdeg.items() if d == 0}
    placed_rev = []
    while available:
        x = max(available)
        available.remove(x)
        placed_rev.append(x)
        for p in dag.parents(x):
            outdeg[p] -= 1
            if outdeg[p] == 0:
                available.add(p)
    if len(placed_rev) != len(dag.nodes):
        raise CycleError("graph has no topological order")
    placed_rev.reverse()
    return placed_rev


def is_covered(dag, arc):
    """True iff the arc's endpoints have identical parents apart from the
    source itself; reversing such an arc preserves the equivalence class."""
    u, v = arc
    if (u, v) not in dag.edges:
        raise ValueError(f"arc {u}->{v} not in graph")
    return dag.parents(u) == dag.parents(v) - {u}


def _v_structures(dag):
    """Colliders x->z<-y with x, y non-adjacent, as ((min, max), z) triples."""
    out = set()
    for z in dag.nodes:
        ps = sorted(dag.parents(z))
        for x, y in itertools.combinations(ps, 2):
            if not dag.adjacent(x, y):
                out.add(((x, y), z))
    return frozenset(out)


def markov_equivalent(d1, d2):
    """Same skeleton and same v-structures, hence the same equivalence class."""
    if set(d1.nodes) != set(d2.nodes):
        raise ValueError("graphs are over different node sets")
    return d1.skeleton() == d2.skeleton() and _v_structures(d1) == _v_structures(d2)


def propagate_orientations(nodes, adjacency, directed, blocked=frozenset()):
    """Close a partial orientation of a skeleton under the collider
    propagation rules.

    The three rules orient an undirected edge a-b whenever leaving it
    undirected would either create a fresh collider or make every completion
    cyclic: (1) a-b with a parent c of a not adjacent to b orients a->b;
    (2) a directed path a->c->b alongside a-b orients a->b; (3) two
    non-adjacent parents of b that are both undirected neighbours of a
    orient a->b.

    Rule hits are collected per pass against the pass-start state and applied
    together, so the outcome does not depend on scan order. An edge demanded
    in both directions within one pass is pinned undirected instead (the
    blocked set), which is how disagreeing collider tests are resolved.

    Returns (directed, blocked) as frozensets.
    """
    directed = set(directed)
    blocked = {((u, v) if u < v else (v, u)) for u, v in blocked}
    adjacency = {v: set(adjacency[v]) for v in nodes}

    def undirected_pair(a, b):
        pair = (a, b) if a < b else (b, a)
        return (
            b in adjacency[a]
            and pair not in blocked
            and (a, b) not in directed
            and (b, a) not in directed
        )

    while True:
        demands = {}

        def demand(a, b):
            pair = (a, b) if a < b else (b, a)
            demands.setdefault(pair, set()).add((a, b))

        for b in nodes:
            in_parents = [a for a in nodes if (a, b) in directed]
            und_nbrs = [a for a in nodes if undirected_pair(a, b)]
            # rule 1: c->b, b-a, c and a non-adjacent  =>  b->a
            for c in in_parents:
                for a in und_nbrs:
                    if a != c and a not in adjacency[c]:
                        demand(b, a)
            # rule 2: a->c->b with a-b undirected  =>  a->b
            for a in und_nbrs:
                for c in nodes:
                    if (a, c) in directed and (c, b) in directed:
                        demand(a, b)
                        break
            # rule 3: a-b undirected, a-c, a-d undirected, c->b, d->b,
            # c and d non-adjacent  =>  a->b
            for a in und_nbrs:
                cs = [
                    c
                    for c in in_parents
                    if undirected_pair(a, c)
                ]
                if any(
                    d not in adjacency[c]
                    for c, d in itertools.combinations(sorted(cs), 2)
                ):
                    demand(a, b)

        changed = False
        for pair, arcs in demands.items():
            if len(arcs) > 1:
                blocked.add(pair)
                changed = True
            else:
                (arc,) = arcs
                directed.add(arc)
                changed = True
        if not changed:
            break
    return frozenset(directed), frozenset(blocked)


def dag_to_cpdag(dag):
    """Completed partially directed graph of the equivalence class.

    Keeps the skeleton, orients exactly the v-structures, then closes under
    the propagation rules; whatever stays unoriented is reversible within
    the class.
    """
    adjacency = {v: set() for v in dag.nodes}
    for u, v in dag.edges:
        adjacency[u].add(v)
        adjacency[v].add(u)
    seed = set()
    for (x, y), z in _v_structures(dag):
        seed.add((x, z))
        seed.add((y, z))
    directed, _ = propagate_orientations(dag.nodes, adjacency, seed)
    undirected = [
        pair
        for pair in sorted(dag.skeleton())
        if pair not in {((u, v) if u < v else (v, u)) for u, v in directed}
    ]
    return Pdag(dag.nodes, directed, undirected)


def _peel_extension(pdag):
    """Classic sink-peeling extension attempt: repeatedly remove a node
    with no outgoing directed edge whose undirected neighbours are
    adjacent to its whole neighbourhood, orienting undirected edges
    inward. Finds an extension that adds no v-structure, or None."""
    adjacency = {v: set() for v in pdag.nodes}
    for u, v in pdag.directed:
        adjacency[u].add(v)
        adjacency[v].add(u)
    for u, v in pdag.undirected:
        adjacency[u].add(v)
        adjacency[v].add(u)

    active = set(pdag.nodes)
    directed = set(pdag.directed)
    undirected = set(pdag.undirected)
    result = set(pdag.directed)
    while active:
        pick = None
        for x in pdag.nodes:
            if x not in active:
                continue
            if any((x, w) in directed for w in adjacency[x] if w in active):
                continue
            und_nbrs = [
                y
                for y in adjacency[x]
                if y in active and ((x, y) if x < y else (y, x)) in undirected
            ]
            all_nbrs = [w for w in adjacency[x] if w in active]
            if all(
                w == y or w in adjacency[y]
                for y in und_nbrs
                for w in all_nbrs
            ):
                pick = x
                break
        if pick is None:
            return None
        for y in sorted(adjacency[pick]):
            if y in active:
                pair = (pick, y) if pick < y else (y, pick)
                if pair in undirected:
                    undirected.discard(pair)
                    result.add((y, pick))
                else:
                    directed.discard((pick, y))
                    directed.discard((y, pick))
        active.remove(pick)
    return Dag(pdag.nodes, result)


def extend_pdag(pdag):
    """Orient the undirected part into a DAG whose equivalence class keeps
    every one of pdag's directed edges compelled.

    A no-new-v-structure extension is not always what this needs: a
    directed input edge may only become compelled if the orientation
    CREATES a collider next to it. So after the cheap attempts fail, the
    remaining orientations are searched exhaustively (pruning partial
    assignments that already close a directed cycle). Returns None when
    no qualifying DAG exists, a normal outcome for graphs produced by
    noisy independence tests.
    """
    peeled = _peel_extension(pdag)
    if peeled is not None and pdag.directed <= dag_to_cpdag(peeled).directed:
        return peeled

    if not pdag.directed:
        # no consistent extension exists, but with nothing to keep
        # compelled any acyclic orientation qualifies; follow positions
        edges = [
            (u, v) if pdag.position(u) < pdag.position(v) else (v, u)
            for u, v in sorted(pdag.undirected)
        ]
        return Dag(pdag.nodes, edges)

    free = sorted(pdag.undirected)
    children = {v: set() for v in pdag.nodes}
    for u, v in pdag.directed:
        children[u].add(v)

    def closes_cycle(u, v):
        # would u -> v complete a directed cycle in the partial graph
        stack, seen = [v], {v}
        while stack:
            w = stack.pop()
            if w == u:
                return True
            for c in children[w]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def search(k):
        if k == len(free):
            edges = set(pdag.directed)
            for u in children:
                edges.update((u, v) for v in children[u])
            candidate = Dag(pdag.nodes, edges, check=False)
            if pdag.directed <= dag_to_cpdag(candidate).directed:
                return candidate
            return None
        a, b = free[k]
        for u, v in ((a, b), (b, a)):
            if closes_cycle(u, v):
                continue
            children[u].add(v)
            found = search(k + 1)
            if found is not None:
                return found
            children[u].remove(v)
        return None

    return search(0)


def _reaches(dag, src, dst, skip=None):
    """True iff a directed path src -> ... -> dst exists, optionally
    ignoring one arc."""
    if src == dst:
        return True
    stack = [src]
    seen = {src}
    while stack:
        v = stack.pop()
        for c in dag.children(v):
            if skip is not None and (v, c) == skip:
                continue
            if c == dst:
                return True
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return False


def enumerate_changes(dag, max_in_degree=None):
    """Legal single-arc edits in canonical order.

    Ordered node pairs (i, j) are scanned by column position, i outer and j
    inner; each pair contributes Add(i->j) when the pair is unlinked and the
    arc would keep the graph acyclic, else Delete(i->j) and Reverse(i->j)
    when that arc is present. This enumeration order is the sole tie-breaker
    the searchers use, which is precisely where column-order sensitivity
    enters.
    """
    changes = []
    nodes = dag.nodes
    for i, u in enumerate(nodes):
        for j, v in enumerate(nodes):
            if i == j:
                continue
            if not dag.adjacent(u, v):
                if max_in_degree is not None and dag.in_degree(v) + 1 > max_in_degree:
                    continue
                if not _reaches(dag, v, u):
                    changes.append(EdgeChange(ADD, (u, v)))
            elif (u, v) in dag.edges:
                changes.append(EdgeChange(DELETE, (u, v)))
                if max_in_degree is not None and dag.in_degree(u) + 1 > max_in_degree:
                    continue
                if not _reaches(dag, u, v, skip=(u, v)):
                    changes.append(EdgeChange(REVERSE, (u, v)))
    return changes
