"""Structure learning for discrete Bayesian networks, plus a benchmark
harness that measures how sensitive each learner is to the order in which
the dataset happens to list its columns."""

from .bif import BifParseError, parse_bif
from .graph import (
    ADD,
    DELETE,
    REVERSE,
    CycleError,
    Dag,
    EdgeChange,
    Pdag,
    dag_to_cpdag,
    enumerate_changes,
    extend_pdag,
    is_acyclic,
    is_covered,
    markov_equivalent,
    topological_order,
)
from .learn import (
    LearnConfig,
    LearnResult,
    LearnTimeout,
    TraceRecord,
    hill_climb,
    mmhc,
    mmpc,
    pc_stable,
    tabu_search,
)
from .citest import CiResult, chisq_sf, ci_test
from .metrics import MetricsRecord, compare, normalized_loglik, to_comparable
from .model import (
    Dataset,
    DiscreteBn,
    NetworkStats,
    OrderingSpec,
    Variable,
    network_stats,
    reorder,
    sample,
    single_valued,
)
from .scores import (
    ContingencyCounts,
    ScoreCache,
    ScoreParams,
    bdeu_node,
    bic_node,
    counts,
    dag_score,
    free_params,
    loglik_term,
    node_score,
)

__version__ = "0.1.0"

__all__ = [
    "ADD",
    "DELETE",
    "REVERSE",
    "BifParseError",
    "CiResult",
    "ContingencyCounts",
    "CycleError",
    "Dag",
    "Dataset",
    "DiscreteBn",
    "EdgeChange",
    "LearnConfig",
    "LearnResult",
    "LearnTimeout",
    "MetricsRecord",
    "NetworkStats",
    "OrderingSpec",
    "Pdag",
    "ScoreCache",
    "ScoreParams",
    "TraceRecord",
    "Variable",
    "bdeu_node",
    "bic_node",
    "chisq_sf",
    "ci_test",
    "compare",
    "counts",
    "dag_score",
    "dag_to_cpdag",
    "enumerate_changes",
    "extend_pdag",
    "free_params",
    "hill_climb",
    "is_acyclic",
    "is_covered",
    "loglik_term",
    "markov_equivalent",
    "mmhc",
    "mmpc",
    "network_stats",
    "node_score",
    "normalized_loglik",
    "parse_bif",
    "pc_stable",
    "reorder",
    "sample",
    "single_valued",
    "tabu_search",
    "to_comparable",
    "topological_order",
]
