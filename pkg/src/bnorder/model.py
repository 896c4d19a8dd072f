"""Networks, datasets and the column-ordering transforms applied to them."""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .graph import Dag, dag_to_cpdag, topological_order

__all__ = [
    "Dataset",
    "DiscreteBn",
    "NetworkStats",
    "OrderingSpec",
    "Variable",
    "network_stats",
    "reorder",
    "sample",
    "single_valued",
]


@dataclass(frozen=True)
class Variable:
    """A named discrete variable with an ordered tuple of state labels."""

    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        if not self.states:
            raise ValueError(f"variable {self.name!r} has no states")
        if len(set(self.states)) != len(self.states):
            raise ValueError(f"variable {self.name!r} repeats a state label")


class DiscreteBn:
    """A discrete Bayesian network: variables, parent sets and CPTs.

    CPT rows are indexed lexicographically over parent state indices with
    parents in declared order (the order of the probability block header),
    one row per parent configuration, each row a distribution over the
    child's states.
    """

    __slots__ = ("variables", "parents", "cpts", "structure")

    def __init__(self, variables, parents, cpts):
        self.variables = tuple(variables)
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        by_name = {v.name: v for v in self.variables}
        self.parents = {name: tuple(parents.get(name, ())) for name in names}
        self.cpts = {}
        edges = []
        for name in names:
            pars = self.parents[name]
            for p in pars:
                if p not in by_name:
                    raise ValueError(f"unknown parent {p!r} of {name!r}")
                edges.append((p, name))
            if name not in cpts:
                raise ValueError(f"variable {name!r} has no CPT")
            table = np.asarray(cpts[name], dtype=float)
            q = 1
            for p in pars:
                q *= len(by_name[p].states)
            r = len(by_name[name].states)
            if table.shape != (q, r):
                raise ValueError(
                    f"CPT for {name!r} has shape {table.shape}, expected {(q, r)}"
                )
            if not np.all(np.isfinite(table)) or np.any(table < 0):
                raise ValueError(f"CPT for {name!r} has invalid entries")
            sums = table.sum(axis=1)
            if np.any(np.abs(sums - 1.0) > 1e-6):
                raise ValueError(f"CPT rows for {name!r} do not sum to one")
            self.cpts[name] = table / sums[:, None]
        self.structure = Dag(names, edges)

    def variable(self, name):
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    @property
    def names(self):
        return tuple(v.name for v in self.variables)

    def __repr__(self):
        return f"DiscreteBn({len(self.variables)} variables, " \
               f"{len(self.structure.edges)} arcs)"


class Dataset:
    """Complete discrete data: named columns, per-column state labels, and
    rows of state indices. Column order is the ordering under study."""

    __slots__ = ("columns", "states", "rows", "_pos")

    def __init__(self, columns, states, rows):
        self.columns = tuple(columns)
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("duplicate column names")
        self.states = tuple(tuple(s) for s in states)
        if len(self.states) != len(self.columns):
            raise ValueError("states and columns disagree in length")
        rows = np.asarray(rows, dtype=np.int16)
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValueError("rows must be a 2-D array matching the columns")
        for i, labels in enumerate(self.states):
            if not labels:
                raise ValueError(f"column {self.columns[i]!r} has no states")
            if rows.shape[0] and (
                rows[:, i].min() < 0 or rows[:, i].max() >= len(labels)
            ):
                raise ValueError(
                    f"column {self.columns[i]!r} holds an out-of-range state index"
                )
        self.rows = rows
        self.rows.setflags(write=False)
        self._pos = {name: i for i, name in enumerate(self.columns)}

    @property
    def n(self):
        return self.rows.shape[0]

    def position(self, name):
        return self._pos[name]

    def arity(self, name):
        return len(self.states[self._pos[name]])

    def column(self, name):
        return self.rows[:, self._pos[name]]

    def to_csv(self):
        """Serialize as CSV: header = column names, cells = state labels."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        labels = [np.asarray(s, dtype=object) for s in self.states]
        for i in range(self.n):
            writer.writerow([labels[j][self.rows[i, j]]
                             for j in range(len(self.columns))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        """Read CSV written by to_csv. The state universe of a column is its
        set of observed labels, sorted ascending; states never observed are
        not representable in this format."""
        reader = csv.reader(io.StringIO(text))
        try:
            columns = next(reader)
        except StopIteration:
            raise ValueError("empty CSV input")
        raw = list(reader)
        if not raw:
            raise ValueError("CSV input has a header but no rows")
        for lineno, row in enumerate(raw, start=2):
            if len(row) != len(columns):
                raise ValueError(f"CSV line {lineno} has {len(row)} cells, "
                                 f"expected {len(columns)}")
        states = []
        encoded = np.empty((len(raw), len(columns)), dtype=np.int16)
        for j in range(len(columns)):
            observed = sorted({row[j] for row in raw})
            if not observed:
                observed = ["?"]
            index = {lab: k for k, lab in enumerate(observed)}
            states.append(tuple(observed))
            for i, row in enumerate(raw):
                encoded[i, j] = index[row[j]]
        return cls(columns, states, encoded)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.columns == other.columns
            and self.states == other.states
            and self.rows.shape == other.rows.shape
            and bool(np.all(self.rows == other.rows))
        )

    def __repr__(self):
        return f"Dataset({self.n} rows, {len(self.columns)} columns)"


@dataclass(frozen=True)
class OrderingSpec:
    """How to permute dataset columns before learning.

    alphabetic: ascending name order (the tool-default ingestion order).
    optimal: the reference graph's topological order, parents first.
    worst: the optimal order reversed, children first.
    random: a seeded uniform permutation.
    """

    mode: str
    seed: int | None = None
    reference: Dag | None = None

    def __post_init__(self):
        if self.mode not in ("alphabetic", "optimal", "worst", "random"):
            raise ValueError(f"unknown ordering mode {self.mode!r}")
        if self.mode == "random" and self.seed is None:
            raise ValueError("random ordering needs a seed")
        if self.mode in ("optimal", "worst") and self.reference is None:
            raise ValueError(f"{self.mode} ordering needs a reference graph")


def sample(bn, n, seed):
    """Draw n complete rows, ancestrally, with a counter-based generator.

    Uses the Philox generator so the stream is a documented function of the
    seed alone. One uniform is drawn per (row, variable) slot, variables in
    the network's topological order; each value is mapped through the
    inverse CDF of its CPT row (cumulative sums left to right). Identical
    (bn, n, seed) therefore reproduce the dataset bit for bit.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    order = topological_order(bn.structure)
    rng = np.random.Generator(np.random.Philox(seed))
    u = rng.random((n, len(order)))
    drawn = {}
    for t, name in enumerate(order):
        cpt = bn.cpts[name]
        pars = bn.parents[name]
        cfg = np.zeros(n, dtype=np.int64)
        for p in pars:
            cfg = cfg * len(bn.variable(p).states) + drawn[p]
        thresholds = np.cumsum(cpt, axis=1)[cfg][:, :-1]
        drawn[name] = (u[:, t : t + 1] >= thresholds).sum(axis=1).astype(np.int64)
    names = bn.names
    rows = np.column_stack([drawn[name] for name in names]) if names else \
        np.empty((n, 0))
    return Dataset(
        names,
        tuple(bn.variable(name).states for name in names),
        rows,
    )


def reorder(dataset, spec):
    """Return the dataset with columns permuted per the ordering choice.

    Cell contents are untouched; only column order changes, which is the
    whole experimental manipulation this package studies.
    """
    if spec.mode == "alphabetic":
        order = sorted(dataset.columns)
    elif spec.mode in ("optimal", "worst"):
        if set(spec.reference.nodes) != set(dataset.columns):
            raise ValueError("reference graph does not match the dataset columns")
        order = topological_order(spec.reference)
        if spec.mode == "worst":
            order = list(reversed(order))
    else:
        rng = np.random.Generator(np.random.Philox(spec.seed))
        perm = rng.permutation(len(dataset.columns))
        order = [dataset.columns[i] for i in perm]
    idx = [dataset.position(name) for name in order]
    return Dataset(
        order,
        tuple(dataset.states[i] for i in idx),
        dataset.rows[:, idx],
    )


def single_valued(dataset):
    """Names of columns that never vary; learners reject such datasets."""
    if dataset.n == 0:
        return tuple(dataset.columns)
    flat = (dataset.rows == dataset.rows[0]).all(axis=0)
    return tuple(
        name for name, const in zip(dataset.columns, flat) if const
    )


@dataclass(frozen=True)
class NetworkStats:
    n_vars: int
    n_arcs: int
    mean_in_degree: float
    max_in_degree: int
    mean_degree: float
    max_degree: int
    fraction_reversible: float


def network_stats(bn):
    """Structural summary of a network, including how much of it is
    orientation-reversible within its equivalence class."""
    dag = bn.structure
    n_vars = len(dag.nodes)
    n_arcs = len(dag.edges)
    in_degrees = [dag.in_degree(v) for v in dag.nodes]
    degrees = [dag.in_degree(v) + len(dag.children(v)) for v in dag.nodes]
    cpdag = dag_to_cpdag(dag)
    return NetworkStats(
        n_vars=n_vars,
        n_arcs=n_arcs,
        mean_in_degree=n_arcs / n_vars if n_vars else 0.0,
        max_in_degree=max(in_degrees, default=0),
        mean_degree=2.0 * n_arcs / n_vars if n_vars else 0.0,
        max_degree=max(degrees, default=0),
        fraction_reversible=(
            len(cpdag.undirected) / n_arcs if n_arcs else 0.0
        ),
    )
