"""Structure learners: greedy score search, tabu search, PC-stable and
max-min parent-child variants.

All of them consume the dataset's column order through one funnel, the
canonical change/candidate enumeration, so permuting columns is the only
way to perturb their tie-breaking. Score-based searchers also report, per
accepted edit, whether the choice was arbitrary: whether some equally good
alternative edit would have produced a graph in the same equivalence class.
"""

import itertools
import time
from collections import deque
from dataclasses import dataclass, field

from .citest import ci_test
from .graph import (
    ADD,
    DELETE,
    EdgeChange,
    Pdag,
    enumerate_changes,
    markov_equivalent,
    propagate_orientations,
)
from .model import single_valued
from .scores import ScoreCache, ScoreParams

__all__ = [
    "CiCache",
    "LearnConfig",
    "LearnResult",
    "LearnTimeout",
    "TraceRecord",
    "hill_climb",
    "mmhc",
    "mmpc",
    "pc_stable",
    "tabu_search",
]


class LearnTimeout(RuntimeError):
    """Raised when a learner crosses its cooperative deadline."""


@dataclass(frozen=True)
class LearnConfig:
    """Knobs shared by every learner.

    tie_tolerance is relative: two deltas tie when they are within
    tie_tolerance * max(1, |best delta|) of each other, so mathematically
    equal scores that differ only in rounding are treated as equal and the
    tie goes to enumeration order rather than to floating-point noise.
    deadline, when set, is a time.monotonic() value checked at iteration
    granularity.
    """

    score: ScoreParams = field(default_factory=ScoreParams)
    ci_kind: str = "mi"
    alpha: float = 0.05
    max_in_degree: int | None = None
    tabu_length: int = 10
    max_worsening: int = 10
    tie_tolerance: float = 1e-9
    deadline: float | None = None

    def __post_init__(self):
        if self.ci_kind not in ("mi", "x2"):
            raise ValueError(f"unknown test kind {self.ci_kind!r}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.max_in_degree is not None and self.max_in_degree < 1:
            raise ValueError("max_in_degree must be at least 1")
        if self.tabu_length < 1:
            raise ValueError("tabu_length must be at least 1")
        if self.max_worsening < 0:
            raise ValueError("max_worsening must be non-negative")
        if self.tie_tolerance < 0:
            raise ValueError("tie_tolerance must be non-negative")


@dataclass(frozen=True)
class TraceRecord:
    """One accepted edit: 1-based iteration, the edit, its score delta, how
    many candidates tied with the best, and whether the choice among them
    was arbitrary (an unchosen tie would have landed in the same
    equivalence class)."""

    iteration: int
    change: EdgeChange
    delta: float
    tied_count: int
    arbitrary: bool


@dataclass
class LearnResult:
    graph: object
    final_score: float | None
    trace: list
    iterations: int
    arbitrary_fraction_curve: list


def _check_deadline(cfg):
    if cfg.deadline is not None and time.monotonic() > cfg.deadline:
        raise LearnTimeout("learner exceeded its deadline")


def _require_varying(dataset):
    flat = single_valued(dataset)
    if flat:
        raise ValueError(
            "dataset is degenerate, single-valued columns: " + ", ".join(flat)
        )


def _edges_after(dag, change):
    u, v = change.arc
    if change.kind == ADD:
        return dag.edges | {(u, v)}
    if change.kind == DELETE:
        return dag.edges - {(u, v)}
    return (dag.edges - {(u, v)}) | {(v, u)}


def _signature(edges):
    return tuple(sorted(edges))


@dataclass(frozen=True)
class _Pick:
    change: EdgeChange
    delta: float
    tied_count: int
    arbitrary: bool
    improving: bool


def _pick_change(cache, cfg, skeleton=None, banned=None):
    """Price every legal edit and pick the winner.

    The winner is the first edit, in enumeration order, whose delta ties
    the maximum; the tie set and the arbitrariness of the pick are computed
    from the same tolerance window.
    """
    dag = cache.dag
    candidates = []
    for change in enumerate_changes(dag, cfg.max_in_degree):
        if skeleton is not None and change.kind == ADD:
            u, v = change.arc
            pair = (u, v) if u < v else (v, u)
            if pair not in skeleton:
                continue
        if banned is not None and _signature(_edges_after(dag, change)) in banned:
            continue
        candidates.append((change, cache.delta(change)))
    if not candidates:
        return None
    best_delta = max(delta for _, delta in candidates)
    window = cfg.tie_tolerance * max(1.0, abs(best_delta))
    ties = [change for change, delta in candidates if best_delta - delta <= window]
    chosen = ties[0]
    chosen_delta = next(d for c, d in candidates if c is chosen)
    arbitrary = False
    if len(ties) > 1:
        resulting = dag.apply(chosen)
        arbitrary = any(
            markov_equivalent(dag.apply(other), resulting) for other in ties[1:]
        )
    return _Pick(
        change=chosen,
        delta=chosen_delta,
        tied_count=len(ties),
        arbitrary=arbitrary,
        improving=best_delta > window,
    )


def _result(graph, final_score, trace):
    curve = []
    arbitrary_so_far = 0
    for i, rec in enumerate(trace, start=1):
        if rec.arbitrary:
            arbitrary_so_far += 1
        curve.append(arbitrary_so_far / i)
    return LearnResult(
        graph=graph,
        final_score=final_score,
        trace=list(trace),
        iterations=len(trace),
        arbitrary_fraction_curve=curve,
    )


def hill_climb(dataset, cfg=None, skeleton=None):
    """Greedy forward search from the empty graph.

    Repeatedly accepts the best-scoring single edit until no edit improves
    the score beyond the tie window. When a skeleton is given, additions
    are restricted to its pairs; deletions and reversals stay unrestricted.
    """
    cfg = cfg if cfg is not None else LearnConfig()
    _require_varying(dataset)
    cache = ScoreCache(dataset, cfg.score)
    trace = []
    while True:
        _check_deadline(cfg)
        pick = _pick_change(cache, cfg, skeleton=skeleton)
        if pick is None or not pick.improving:
            break
        trace.append(
            TraceRecord(
                iteration=len(trace) + 1,
                change=pick.change,
                delta=pick.delta,
                tied_count=pick.tied_count,
                arbitrary=pick.arbitrary,
            )
        )
        cache.commit(pick.change)
    return _result(cache.dag, cache.total(), trace)


def tabu_search(dataset, cfg=None):
    """Greedy search that may walk downhill to escape local maxima.

    Behaves exactly like hill_climb while improvements exist. Once they run
    out it accepts least-worsening edits, refusing any edit whose resulting
    graph signature sits in the ring of the last tabu_length visited
    graphs, and gives up after max_worsening consecutive accepted edits
    without a new best. Returns the best graph visited, so its final score
    is never below hill_climb's on the same inputs.
    """
    cfg = cfg if cfg is not None else LearnConfig()
    _require_varying(dataset)
    cache = ScoreCache(dataset, cfg.score)
    ring = deque(maxlen=cfg.tabu_length)
    ring.append(_signature(cache.dag.edges))
    best_dag = cache.dag
    best_score = cache.total()
    since_best = 0
    trace = []
    while True:
        _check_deadline(cfg)
        pick = _pick_change(cache, cfg, banned=set(ring))
        if pick is None:
            break
        if not pick.improving and since_best >= cfg.max_worsening:
            break
        trace.append(
            TraceRecord(
                iteration=len(trace) + 1,
                change=pick.change,
                delta=pick.delta,
                tied_count=pick.tied_count,
                arbitrary=pick.arbitrary,
            )
        )
        cache.commit(pick.change)
        ring.append(_signature(cache.dag.edges))
        if cache.total() > best_score:
            best_dag = cache.dag
            best_score = cache.total()
            since_best = 0
        else:
            since_best += 1
    return _result(best_dag, best_score, trace)


class CiCache:
    """Memoized independence tests bound to one dataset.

    The key is symmetric in the pair and set-valued in the conditioning
    set, mirroring the invariances of the test itself.
    """

    def __init__(self, dataset, kind, alpha, deadline=None):
        self.dataset = dataset
        self.kind = kind
        self.alpha = alpha
        self.deadline = deadline
        self._memo = {}

    def test(self, x, y, z=()):
        a, b = (x, y) if x < y else (y, x)
        key = (a, b, frozenset(z))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise LearnTimeout("learner exceeded its deadline")
        result = ci_test(self.dataset, x, y, z, kind=self.kind, alpha=self.alpha)
        self._memo[key] = result
        return result


def pc_stable(dataset, cfg=None):
    """Constraint-based learner with order-stable skeleton estimation.

    Neighbourhoods are frozen at the start of every level, so which edges
    survive a level does not depend on the order edges are visited in; the
    column order can still influence which separating set is found first
    and hence the orientation phase. Unshielded triples are oriented as
    colliders when the middle node is outside the recorded separating set,
    disagreements between triples leave edges undirected, and the standard
    propagation rules finish the job.
    """
    cfg = cfg if cfg is not None else LearnConfig()
    _require_varying(dataset)
    tester = CiCache(dataset, cfg.ci_kind, cfg.alpha, deadline=cfg.deadline)
    nodes = list(dataset.columns)
    adj = {v: set(nodes) - {v} for v in nodes}
    sepsets = {}

    level = 0
    while True:
        _check_deadline(cfg)
        frozen = {v: sorted(adj[v], key=dataset.position) for v in nodes}
        pairs = [
            (x, y)
            for i, x in enumerate(nodes)
            for y in nodes[i + 1 :]
            if y in adj[x]
        ]
        for x, y in pairs:
            if y not in adj[x]:
                continue
            separator = None
            for first, second in ((x, y), (y, x)):
                neighbours = [w for w in frozen[first] if w != second]
                if len(neighbours) < level:
                    continue
                for subset in itertools.combinations(neighbours, level):
                    if tester.test(x, y, subset).independent:
                        separator = subset
                        break
                if separator is not None:
                    break
            if separator is not None:
                adj[x].discard(y)
                adj[y].discard(x)
                pair = (x, y) if x < y else (y, x)
                sepsets[pair] = frozenset(separator)
        level += 1
        if not any(
            len(adj[x]) - 1 >= level or len(adj[y]) - 1 >= level
            for x in nodes
            for y in adj[x]
            if x < y
        ):
            break

    demands = {}
    for z in nodes:
        neighbours = sorted(adj[z], key=dataset.position)
        for x, y in itertools.combinations(neighbours, 2):
            if y in adj[x]:
                continue
            pair = (x, y) if x < y else (y, x)
            sep = sepsets.get(pair)
            if sep is None or z in sep:
                continue
            for arc in ((x, z), (y, z)):
                edge = (arc[0], arc[1]) if arc[0] < arc[1] else (arc[1], arc[0])
                demands.setdefault(edge, set()).add(arc)
    directed = set()
    blocked = set()
    for edge, arcs in sorted(demands.items()):
        if len(arcs) > 1:
            blocked.add(edge)
        else:
            directed.add(next(iter(arcs)))
    directed, blocked = propagate_orientations(nodes, adj, directed, blocked)
    directed_pairs = {(u, v) if u < v else (v, u) for u, v in directed}
    undirected = [
        (x, y)
        for i, x in enumerate(nodes)
        for y in nodes[i + 1 :]
        if y in adj[x] and ((x, y) if x < y else (y, x)) not in directed_pairs
    ]
    return Pdag(dataset.columns, directed, undirected)


def _subsets(members, dataset):
    """All subsets of the member list, sizes ascending, members ordered by
    column position within each size."""
    ordered = sorted(members, key=dataset.position)
    for size in range(len(ordered) + 1):
        yield from itertools.combinations(ordered, size)


def mmpc(dataset, cfg=None):
    """Parents-and-children skeleton by max-min association.

    The association of a candidate with the target is one minus the
    largest p-value over subsets of the current candidate set. The forward
    phase repeatedly admits the candidate with maximal association,
    stopping when even the best candidate is independent of the target
    given some subset; the backward phase then prunes members that a
    subset of the rest separates. Ties fall to the earlier column, and the
    final edge set keeps a pair only when each endpoint recovers the
    other.
    """
    cfg = cfg if cfg is not None else LearnConfig()
    _require_varying(dataset)
    tester = CiCache(dataset, cfg.ci_kind, cfg.alpha, deadline=cfg.deadline)
    pc_sets = {}
    for target in dataset.columns:
        _check_deadline(cfg)
        cpc = []
        while True:
            best = None
            best_assoc = None
            for cand in dataset.columns:
                if cand == target or cand in cpc:
                    continue
                assoc = min(
                    1.0 - tester.test(cand, target, subset).p_value
                    for subset in _subsets(cpc, dataset)
                )
                if best is None or assoc > best_assoc:
                    best = cand
                    best_assoc = assoc
            if best is None:
                break
            if best_assoc < 1.0 - cfg.alpha:
                break
            cpc.append(best)
        for member in [m for m in dataset.columns if m in cpc]:
            rest = [c for c in cpc if c != member]
            if any(
                tester.test(member, target, subset).independent
                for subset in _subsets(rest, dataset)
            ):
                cpc.remove(member)
        pc_sets[target] = set(cpc)
    edges = set()
    for target in dataset.columns:
        for other in pc_sets[target]:
            if target in pc_sets[other]:
                edges.add((target, other) if target < other else (other, target))
    return frozenset(edges)


def mmhc(dataset, cfg=None):
    """Hybrid learner: mmpc builds the skeleton, hill_climb orients it."""
    cfg = cfg if cfg is not None else LearnConfig()
    skeleton = mmpc(dataset, cfg)
    return hill_climb(dataset, cfg, skeleton=skeleton)
