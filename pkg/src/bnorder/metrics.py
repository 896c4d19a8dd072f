"""Structural and likelihood comparison of learnt graphs against a
reference equivalence class.

The structural tally follows the convention of the bnlearn software: a
learnt edge scores a true positive only when its orientation status
matches the reference exactly, an edge present in both but with any
orientation mismatch (including directed against undirected) counts one
false positive plus one false negative, and the structural Hamming
distance counts every differing pair once.
"""

import math
from dataclasses import dataclass

from .graph import Dag, dag_to_cpdag, extend_pdag
from .scores import counts, loglik_term

__all__ = ["MetricsRecord", "compare", "normalized_loglik", "to_comparable"]


@dataclass(frozen=True)
class MetricsRecord:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    shd: int
    same: int
    extra: int
    missing: int
    misorientated: int
    loglik_per_row: float | None = None


def _states(pdag):
    """Map each linked name-canonical pair to '>', '<' or '-'."""
    out = {}
    for u, v in pdag.directed:
        if u < v:
            out[(u, v)] = ">"
        else:
            out[(v, u)] = "<"
    for pair in pdag.undirected:
        out[pair] = "-"
    return out


def compare(learnt, truth):
    """Tally learnt against truth pair by pair.

    Both are partially directed graphs over the same node set; truth is
    normally the reference structure's completed pattern. Callers convert
    search output with to_comparable first.
    """
    if set(learnt.nodes) != set(truth.nodes):
        raise ValueError("graphs are over different node sets")
    learnt_states = _states(learnt)
    truth_states = _states(truth)

    tp = fp = fn = same = extra = missing = misorientated = 0
    for pair in sorted(set(learnt_states) | set(truth_states)):
        ls = learnt_states.get(pair)
        ts = truth_states.get(pair)
        if ls is not None and ts is None:
            fp += 1
            extra += 1
        elif ls is None and ts is not None:
            fn += 1
            missing += 1
        elif ls == ts:
            tp += 1
            same += 1
        else:
            fp += 1
            fn += 1
            misorientated += 1

    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return MetricsRecord(
        tp=tp,
        fp=fp,
        fn=fn,
        precision=precision,
        recall=recall,
        f1=f1,
        shd=extra + missing + misorientated,
        same=same,
        extra=extra,
        missing=missing,
        misorientated=misorientated,
    )


def to_comparable(graph):
    """Normalize search output for comparison against a reference pattern.

    A DAG maps to its completed pattern. A partially directed graph is
    completed via a consistent extension when one exists; when it does not,
    which happens routinely for constraint learners on noisy tests, the
    graph is compared as it stands.
    """
    if isinstance(graph, Dag):
        return dag_to_cpdag(graph)
    extension = extend_pdag(graph)
    if extension is not None:
        return dag_to_cpdag(extension)
    return graph


def normalized_loglik(graph, dataset):
    """Per-row log-likelihood of the data under the graph with maximum
    likelihood parameters.

    This is exactly the likelihood part of the BIC score divided by the
    row count; the penalty term is excluded.
    """
    if dataset.n < 1:
        raise ValueError("need at least one row")
    if set(graph.nodes) != set(dataset.columns):
        raise ValueError("graph nodes must match the dataset columns")
    total = math.fsum(
        loglik_term(counts(dataset, v, graph.parents(v))) for v in graph.nodes
    )
    return total / dataset.n
