"""Decomposable graph scores over complete discrete data.

Both scores are sums of per-node terms that depend only on the node's
contingency counts against its parent set, which is what makes cached
incremental search possible. Logarithms are natural throughout and
0*log(0) is taken as 0.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .graph import ADD, DELETE, Dag

__all__ = [
    "ContingencyCounts",
    "ScoreCache",
    "ScoreParams",
    "bdeu_node",
    "bic_node",
    "counts",
    "dag_score",
    "free_params",
    "loglik_term",
    "node_score",
]


@dataclass(frozen=True)
class ScoreParams:
    """Which score to use and its strength knobs.

    kind "bic" uses k_scale to scale the complexity penalty; kind "bdeu"
    uses ess as the equivalent sample size of the Dirichlet prior.
    """

    kind: str = "bic"
    k_scale: float = 1.0
    ess: float = 1.0

    def __post_init__(self):
        if self.kind not in ("bic", "bdeu"):
            raise ValueError(f"unknown score kind {self.kind!r}")
        if not self.k_scale > 0:
            raise ValueError("k_scale must be positive")
        if not self.ess > 0:
            raise ValueError("ess must be positive")


@dataclass(frozen=True)
class ContingencyCounts:
    """Counts of a child against one parent set.

    cell_counts has one row per parent configuration and one column per
    child state; config_totals is its row sum. Parent configurations are
    indexed lexicographically over parent state indices with parents sorted
    by column position, and include configurations never observed.
    """

    n_configs: int
    arity: int
    config_totals: np.ndarray
    cell_counts: np.ndarray

    @property
    def n(self):
        return int(self.config_totals.sum())


def counts(dataset, child, parents):
    """Tally the child against every configuration of the parent set."""
    pars = sorted(parents, key=dataset.position)
    if child in pars:
        raise ValueError(f"{child!r} cannot be its own parent")
    r = dataset.arity(child)
    q = 1
    cfg = np.zeros(dataset.n, dtype=np.int64)
    for p in pars:
        a = dataset.arity(p)
        cfg = cfg * a + dataset.column(p)
        q *= a
    flat = cfg * r + dataset.column(child)
    cells = np.bincount(flat, minlength=q * r).reshape(q, r)
    return ContingencyCounts(
        n_configs=q,
        arity=r,
        config_totals=cells.sum(axis=1),
        cell_counts=cells,
    )


def loglik_term(c):
    """Maximized multinomial log-likelihood: sum of n*log(n/total) cells."""
    cells = c.cell_counts
    mask = cells > 0
    totals = np.broadcast_to(c.config_totals[:, None], cells.shape)
    picked = cells[mask].astype(float)
    return float(np.sum(picked * np.log(picked / totals[mask])))


def bic_node(c, params, n_rows):
    """Log-likelihood term minus k_scale * (log n / 2) per free parameter."""
    if n_rows < 1:
        raise ValueError("BIC needs at least one row")
    penalty = params.k_scale * 0.5 * math.log(n_rows) * c.n_configs * (c.arity - 1)
    return loglik_term(c) - penalty


def bdeu_node(c, params):
    """Marginal likelihood under a uniform Dirichlet prior of weight ess.

    Parent configurations with no observations contribute exactly zero, so
    only the observed part of the table is evaluated.
    """
    q = c.n_configs
    r = c.arity
    aq = params.ess / q
    aqr = params.ess / (q * r)
    seen = c.config_totals > 0
    totals = c.config_totals[seen].astype(float)
    cells = c.cell_counts[seen].astype(float)
    per_config = (
        gammaln(aq)
        - gammaln(totals + aq)
        + (gammaln(cells + aqr) - gammaln(aqr)).sum(axis=1)
    )
    return float(per_config.sum())


def node_score(dataset, child, parents, params):
    """Score one node against one parent set."""
    c = counts(dataset, child, parents)
    if params.kind == "bic":
        return bic_node(c, params, dataset.n)
    return bdeu_node(c, params)


def dag_score(dag, dataset, params):
    """Sum of node scores, node terms combined with exact summation so the
    total is independent of how it is assembled."""
    return math.fsum(
        node_score(dataset, v, dag.parents(v), params) for v in dag.nodes
    )


def free_params(dag, arities):
    """Free parameter count: per node, parent configurations times
    (arity - 1)."""
    total = 0
    for v in dag.nodes:
        q = 1
        for p in dag.parents(v):
            q *= arities[p]
        total += q * (arities[v] - 1)
    return total


class ScoreCache:
    """Memoized per-node scores bound to one dataset and one parameter set.

    delta() prices a candidate edit against the cached graph without
    committing it; commit() advances the graph. Totals are exact sums of
    the memoized node terms, so delta always equals the difference of full
    rescores bit for bit.
    """

    def __init__(self, dataset, params, dag=None):
        self.dataset = dataset
        self.params = params
        self.dag = dag if dag is not None else Dag(dataset.columns)
        if tuple(self.dag.nodes) != tuple(dataset.columns):
            raise ValueError("graph nodes must equal the dataset columns, in order")
        self._memo = {}
        self.memo_hits = 0
        self.memo_misses = 0
        self._total = None

    def node_score(self, child, parents):
        key = (child, tuple(sorted(parents, key=self.dataset.position)))
        hit = self._memo.get(key)
        if hit is not None:
            self.memo_hits += 1
            return hit
        self.memo_misses += 1
        value = node_score(self.dataset, child, key[1], self.params)
        self._memo[key] = value
        return value

    def total(self):
        if self._total is None:
            self._total = math.fsum(
                self.node_score(v, self.dag.parents(v)) for v in self.dag.nodes
            )
        return self._total

    def _parents_after(self, change):
        u, v = change.arc
        if change.kind == ADD:
            if self.dag.adjacent(u, v):
                raise ValueError(f"cannot add {u}->{v}: pair already linked")
            return {v: self.dag.parents(v) | {u}}
        if change.kind == DELETE:
            if (u, v) not in self.dag.edges:
                raise ValueError(f"cannot delete absent arc {u}->{v}")
            return {v: self.dag.parents(v) - {u}}
        if (u, v) not in self.dag.edges:
            raise ValueError(f"cannot reverse absent arc {u}->{v}")
        return {v: self.dag.parents(v) - {u}, u: self.dag.parents(u) | {v}}

    def delta(self, change):
        """Score difference the edit would produce, computed as the exact
        total after minus the exact total before."""
        replaced = self._parents_after(change)
        total_after = math.fsum(
            self.node_score(v, replaced.get(v, self.dag.parents(v)))
            for v in self.dag.nodes
        )
        return total_after - self.total()

    def commit(self, change):
        """Apply the edit to the cached graph; memoized terms carry over."""
        self.dag = self.dag.apply(change)
        self._total = None
