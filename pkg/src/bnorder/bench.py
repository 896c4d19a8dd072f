"""Experiment matrix runner and result aggregation.

A run crosses networks, sample sizes, sampling seeds, column orderings,
algorithms and objective settings. Each (network, size, seed) triple is
sampled exactly once and every ordering and algorithm sees that same data,
which isolates column order as the only varying factor. Output is a flat
CSV sorted on the experiment axes; given the same configuration the bytes
are reproducible, so result files can be diffed across machines and
commits. Wall-clock times are recorded only when record_runtime is set,
because they are the one column that cannot be reproducible.
"""

import functools
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bif import parse_bif
from .graph import dag_to_cpdag, extend_pdag
from .learn import (
    LearnConfig,
    LearnTimeout,
    hill_climb,
    mmhc,
    pc_stable,
    tabu_search,
)
from .metrics import compare, normalized_loglik, to_comparable
from .model import OrderingSpec, reorder, sample, single_valued
from .scores import ScoreParams

__all__ = [
    "ExperimentConfig",
    "ImpactSummary",
    "RankTable",
    "ResultRow",
    "impact_summary",
    "parse_config",
    "rank_table",
    "read_results_csv",
    "run_matrix",
    "write_results_csv",
]

ALGORITHMS = ("HC", "TABU", "PCSTABLE", "MMHC")
ORDERING_MODES = ("alphabetic", "optimal", "worst", "random")

RESULT_FIELDS = (
    "network",
    "algorithm",
    "ordering_mode",
    "seed",
    "sample_size",
    "score_kind",
    "k_scale",
    "ess",
    "alpha",
    "f1",
    "shd",
    "tp",
    "fp",
    "fn",
    "extra",
    "missing",
    "misorientated",
    "loglik_per_row",
    "iterations",
    "arbitrary_fraction_final",
    "runtime_ms",
    "status",
)


@dataclass(frozen=True)
class ExperimentConfig:
    networks: tuple
    sample_sizes: tuple
    seeds: tuple
    algorithms: tuple = ("HC",)
    orderings: tuple = ("alphabetic",)
    random_orders: int = 10
    scores: tuple = ("bic",)
    k_scales: tuple = (1.0,)
    ess_values: tuple = (1.0,)
    ci_kinds: tuple = ("mi",)
    alphas: tuple = (0.05,)
    output: str = "results.csv"
    max_runtime_per_cell: float = 600.0
    workers: int = 1
    record_runtime: bool = False

    def __post_init__(self):
        if not self.networks or not self.sample_sizes or not self.seeds:
            raise ValueError("networks, sample_sizes and seeds must be non-empty")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r}")
        for m in self.orderings:
            if m not in ORDERING_MODES:
                raise ValueError(f"unknown ordering mode {m!r}")
        for s in self.scores:
            if s not in ("bic", "bdeu"):
                raise ValueError(f"unknown score {s!r}")
        for c in self.ci_kinds:
            if c not in ("mi", "x2"):
                raise ValueError(f"unknown ci kind {c!r}")
        for a in self.alphas:
            if not 0 < a < 1:
                raise ValueError("alpha must lie in (0, 1)")
        if any(n < 1 for n in self.sample_sizes):
            raise ValueError("sample sizes must be positive")
        if "random" in self.orderings and self.random_orders < 1:
            raise ValueError("random_orders must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if "MMHC" in self.algorithms and len(self.ci_kinds) > 1:
            raise ValueError("MMHC rows cannot record more than one ci kind; "
                             "run separate configs")


@dataclass(frozen=True)
class ResultRow:
    network: str
    algorithm: str
    ordering_mode: str
    seed: int
    sample_size: int
    score_kind: str | None
    k_scale: float | None
    ess: float | None
    alpha: float | None
    f1: float | None
    shd: int | None
    tp: int | None
    fp: int | None
    fn: int | None
    extra: int | None
    missing: int | None
    misorientated: int | None
    loglik_per_row: float | None
    iterations: int | None
    arbitrary_fraction_final: float | None
    runtime_ms: int | None
    status: str


@functools.lru_cache(maxsize=None)
def _load_network(path):
    with open(path, "r", encoding="utf-8") as fh:
        bn = parse_bif(fh.read())
    return bn


@functools.lru_cache(maxsize=None)
def _reference_cpdag(path):
    return dag_to_cpdag(_load_network(path).structure)


@functools.lru_cache(maxsize=64)
def _base_dataset(path, size, seed):
    return sample(_load_network(path), size, seed)


def _settings_for(algorithm, cfg):
    """Objective settings a given algorithm crosses, as row-field dicts."""
    score_settings = []
    for kind in cfg.scores:
        if kind == "bic":
            for k in cfg.k_scales:
                score_settings.append(
                    {"score_kind": "bic", "k_scale": k, "ess": None}
                )
        else:
            for e in cfg.ess_values:
                score_settings.append(
                    {"score_kind": "bdeu", "k_scale": None, "ess": e}
                )
    ci_settings = [
        {"ci_kind": kind, "alpha": a} for kind in cfg.ci_kinds for a in cfg.alphas
    ]
    if algorithm in ("HC", "TABU"):
        return [dict(s, alpha=None, ci_kind=cfg.ci_kinds[0]) for s in score_settings]
    if algorithm == "PCSTABLE":
        # constraint rows carry the test kind in the score_kind column
        return [
            {"score_kind": c["ci_kind"], "k_scale": None, "ess": None,
             "alpha": c["alpha"], "ci_kind": c["ci_kind"]}
            for c in ci_settings
        ]
    return [
        dict(s, alpha=c["alpha"], ci_kind=c["ci_kind"])
        for s in score_settings
        for c in ci_settings
    ]


def _ordering_labels(cfg):
    labels = []
    for mode in cfg.orderings:
        if mode == "random":
            for k in range(1, cfg.random_orders + 1):
                labels.append((f"random-{k:02d}", "random", k))
        else:
            labels.append((mode, mode, None))
    return labels


def _cells(cfg):
    out = []
    for path in cfg.networks:
        label = os.path.splitext(os.path.basename(path))[0]
        for size in cfg.sample_sizes:
            for seed in cfg.seeds:
                for olabel, omode, oseed in _ordering_labels(cfg):
                    for algorithm in cfg.algorithms:
                        for setting in _settings_for(algorithm, cfg):
                            out.append(
                                {
                                    "path": path,
                                    "network": label,
                                    "size": size,
                                    "seed": seed,
                                    "ordering_label": olabel,
                                    "ordering_mode": omode,
                                    "ordering_seed": oseed,
                                    "algorithm": algorithm,
                                    "setting": setting,
                                    "max_runtime": cfg.max_runtime_per_cell,
                                    "record_runtime": cfg.record_runtime,
                                }
                            )
    return out


def _empty_metrics():
    return {
        "f1": None, "shd": None, "tp": None, "fp": None, "fn": None,
        "extra": None, "missing": None, "misorientated": None,
        "loglik_per_row": None, "iterations": None,
        "arbitrary_fraction_final": None,
    }


def _run_cell(cell):
    setting = cell["setting"]
    base = {
        "network": cell["network"],
        "algorithm": cell["algorithm"],
        "ordering_mode": cell["ordering_label"],
        "seed": cell["seed"],
        "sample_size": cell["size"],
        "score_kind": setting["score_kind"],
        "k_scale": setting["k_scale"],
        "ess": setting["ess"],
        "alpha": setting["alpha"],
        "runtime_ms": None,
    }
    data = _base_dataset(cell["path"], cell["size"], cell["seed"])
    if single_valued(data):
        return ResultRow(**base, **_empty_metrics(), status="skipped_single_valued")

    bn = _load_network(cell["path"])
    if cell["ordering_mode"] == "random":
        spec = OrderingSpec("random", seed=cell["ordering_seed"])
    else:
        spec = OrderingSpec(cell["ordering_mode"], reference=bn.structure)
    data = reorder(data, spec)

    params = ScoreParams(
        kind=setting["score_kind"] if setting["score_kind"] in ("bic", "bdeu")
        else "bic",
        k_scale=setting["k_scale"] if setting["k_scale"] is not None else 1.0,
        ess=setting["ess"] if setting["ess"] is not None else 1.0,
    )
    deadline = (
        time.monotonic() + cell["max_runtime"] if cell["max_runtime"] else None
    )
    lc = LearnConfig(
        score=params,
        ci_kind=setting["ci_kind"],
        alpha=setting["alpha"] if setting["alpha"] is not None else 0.05,
        deadline=deadline,
    )

    started = time.perf_counter()
    try:
        if cell["algorithm"] == "HC":
            res = hill_climb(data, lc)
        elif cell["algorithm"] == "TABU":
            res = tabu_search(data, lc)
        elif cell["algorithm"] == "MMHC":
            res = mmhc(data, lc)
        else:
            res = None
            learnt_pdag = pc_stable(data, lc)
    except LearnTimeout:
        if cell["record_runtime"]:
            base["runtime_ms"] = int(
                round((time.perf_counter() - started) * 1000.0)
            )
        return ResultRow(**base, **_empty_metrics(), status="timeout")
    elapsed_ms = int(round((time.perf_counter() - started) * 1000.0))

    metrics = _empty_metrics()
    if res is not None:
        graph = res.graph
        comparable = to_comparable(graph)
        metrics["loglik_per_row"] = normalized_loglik(graph, data)
        metrics["iterations"] = res.iterations
        if res.arbitrary_fraction_curve:
            metrics["arbitrary_fraction_final"] = res.arbitrary_fraction_curve[-1]
    else:
        comparable = to_comparable(learnt_pdag)
        extension = extend_pdag(learnt_pdag)
        if extension is not None:
            metrics["loglik_per_row"] = normalized_loglik(extension, data)
    m = compare(comparable, _reference_cpdag(cell["path"]))
    metrics.update(
        f1=m.f1, shd=m.shd, tp=m.tp, fp=m.fp, fn=m.fn,
        extra=m.extra, missing=m.missing, misorientated=m.misorientated,
    )
    if cell["record_runtime"]:
        base["runtime_ms"] = elapsed_ms
    return ResultRow(**base, **metrics, status="ok")


def _sort_key(row):
    return (
        row.network,
        row.algorithm,
        row.ordering_mode,
        row.seed,
        row.sample_size,
        row.score_kind or "",
        -1.0 if row.k_scale is None else row.k_scale,
        -1.0 if row.ess is None else row.ess,
        -1.0 if row.alpha is None else row.alpha,
    )


def run_matrix(cfg):
    """Run every cell of the experiment matrix and return sorted rows.

    Timeouts and degenerate datasets become rows with a non-ok status
    rather than aborting the matrix. With workers > 1 the cells run in
    separate processes; each process rebuilds its datasets from the same
    (network, size, seed) recipe, which yields bit-identical data.
    """
    cells = _cells(cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_cell, cells, chunksize=1))
    else:
        rows = [_run_cell(cell) for cell in cells]
    rows.sort(key=_sort_key)
    return rows


# fixed six decimals for measured quantities, compact form for settings
_METRIC_FLOATS = ("f1", "loglik_per_row", "arbitrary_fraction_final")
_SETTING_FLOATS = ("k_scale", "ess", "alpha")


def _format_value(field, value):
    if value is None:
        return ""
    if field in _METRIC_FLOATS:
        if not math.isfinite(value):
            raise ValueError(f"non-finite {field} in results")
        return f"{value:.6f}"
    if field in _SETTING_FLOATS:
        return f"{value:g}"
    return str(value)


def write_results_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(RESULT_FIELDS) + "\n")
        for row in rows:
            fh.write(
                ",".join(_format_value(f, getattr(row, f)) for f in RESULT_FIELDS)
                + "\n"
            )


def _parse_cell(field, text):
    if text == "":
        return None
    if field in ("seed", "sample_size", "shd", "tp", "fp", "fn", "extra",
                 "missing", "misorientated", "iterations", "runtime_ms"):
        return int(text)
    if field in ("k_scale", "ess", "alpha", "f1", "loglik_per_row",
                 "arbitrary_fraction_final"):
        return float(text)
    return text


def read_results_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or lines[0] != ",".join(RESULT_FIELDS):
        raise ValueError("not a results CSV: header mismatch")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(RESULT_FIELDS):
            raise ValueError(f"line {lineno}: expected {len(RESULT_FIELDS)} cells")
        rows.append(
            ResultRow(
                **{
                    f: _parse_cell(f, v)
                    for f, v in zip(RESULT_FIELDS, parts)
                }
            )
        )
    return rows


@dataclass(frozen=True)
class ImpactSummary:
    factor: str
    mean: float
    median: float
    q1: float
    q3: float
    min: float
    max: float
    n: int
    unmatched: int


# factor name -> (kind, detail); "field" factors pair rows differing only in
# one field, "size" factors pair rows whose sample sizes differ by a factor
_FACTORS = {
    "size_x10": ("size", 10),
    "size_x100": ("size", 100),
    "worst_to_optimal": ("field", ("ordering_mode", "worst", "optimal")),
    "alphabetic_to_optimal": ("field", ("ordering_mode", "alphabetic", "optimal")),
    "bic_to_bdeu": ("score_swap", None),
    "k_1_to_5": ("field", ("k_scale", 1.0, 5.0)),
    "ess_1_to_5": ("field", ("ess", 1.0, 5.0)),
    "mi_to_x2": ("field", ("score_kind", "mi", "x2")),
    "alpha_005_to_001": ("field", ("alpha", 0.05, 0.01)),
}


def _row_key(row, exclude):
    return tuple(
        getattr(row, f)
        for f in (
            "network", "algorithm", "ordering_mode", "seed", "sample_size",
            "score_kind", "k_scale", "ess", "alpha",
        )
        if f not in exclude
    )


def impact_summary(rows, factor, reverse=False):
    """Distribution of paired F1 differences for one changed factor.

    Rows are paired on identical remaining axes; each delta is the "to"
    side minus the "from" side. Quartiles use linear interpolation on the
    sorted deltas at the 0.25 and 0.75 points (midpoints of adjacent order
    statistics when the point falls between them). Unmatched rows are
    counted and excluded.
    """
    if factor not in _FACTORS:
        raise ValueError(f"unknown factor {factor!r}; known: "
                         + ", ".join(sorted(_FACTORS)))
    kind, detail = _FACTORS[factor]
    ok = [r for r in rows if r.status == "ok" and r.f1 is not None]

    from_map = {}
    to_map = {}
    if kind == "size":
        mult = detail
        for r in ok:
            from_map[_row_key(r, ()) ] = r
            if r.sample_size % mult == 0:
                shrunk = replace(r, sample_size=r.sample_size // mult)
                to_map[_row_key(shrunk, ())] = r
    elif kind == "field":
        field_name, side_a, side_b = detail
        for r in ok:
            value = getattr(r, field_name)
            if value == side_a:
                from_map[_row_key(r, (field_name,))] = r
            elif value == side_b:
                to_map[_row_key(r, (field_name,))] = r
    else:
        # bic at its default strength against bdeu at its default weight
        exclude = ("score_kind", "k_scale", "ess")
        for r in ok:
            if r.score_kind == "bic" and r.k_scale == 1.0:
                from_map[_row_key(r, exclude)] = r
            elif r.score_kind == "bdeu" and r.ess == 1.0:
                to_map[_row_key(r, exclude)] = r

    if reverse:
        from_map, to_map = to_map, from_map

    shared = sorted(set(from_map) & set(to_map))
    unmatched = (
        len(set(from_map) - set(to_map)) + len(set(to_map) - set(from_map))
    )
    deltas = [to_map[k].f1 - from_map[k].f1 for k in shared]
    if not deltas:
        raise ValueError(f"no matched pairs for factor {factor!r}")
    arr = np.asarray(deltas, dtype=float)
    q1, med, q3 = np.quantile(arr, [0.25, 0.5, 0.75])
    return ImpactSummary(
        factor=factor + (" (reversed)" if reverse else ""),
        mean=float(arr.mean()),
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        min=float(arr.min()),
        max=float(arr.max()),
        n=len(deltas),
        unmatched=unmatched,
    )


@dataclass(frozen=True)
class RankTable:
    baseline: str
    deltas: dict
    missing: tuple


def _ordering_group(mode):
    return "random" if mode.startswith("random") else mode


def rank_table(rows, baseline="HC"):
    """Mean F1 of each algorithm relative to a baseline, split by ordering.

    Rows are grouped into cells of (network, sample size, seed, ordering
    group); an algorithm's rows within a cell are averaged first, so the
    random orderings enter as one observation per cell. Cells without
    baseline rows are reported in missing and skipped.
    """
    ok = [r for r in rows if r.status == "ok" and r.f1 is not None]
    if not ok:
        raise ValueError("no usable rows")
    cells = {}
    for r in ok:
        key = (r.network, r.sample_size, r.seed, _ordering_group(r.ordering_mode))
        cells.setdefault(key, {}).setdefault(r.algorithm, []).append(r.f1)

    missing = []
    per_algo = {}
    for key in sorted(cells):
        algos = cells[key]
        if baseline not in algos:
            missing.append(key)
            continue
        base = sum(algos[baseline]) / len(algos[baseline])
        group = key[3]
        for algorithm, f1s in algos.items():
            delta = sum(f1s) / len(f1s) - base
            per_algo.setdefault(algorithm, {}).setdefault(group, []).append(delta)

    deltas = {
        algorithm: {
            group: sum(values) / len(values)
            for group, values in sorted(groups.items())
        }
        for algorithm, groups in sorted(per_algo.items())
    }
    return RankTable(baseline=baseline, deltas=deltas, missing=tuple(missing))


_CONFIG_DEFAULTS = {
    "orderings": "alphabetic",
    "random_orders": "10",
    "algorithms": "HC",
    "scores": "bic",
    "k_scales": "1",
    "ess_values": "1",
    "ci_kinds": "mi",
    "alphas": "0.05",
    "output": "results.csv",
    "max_runtime_per_cell": "600",
    "workers": "1",
    "record_runtime": "false",
}

_CONFIG_KEYS = set(_CONFIG_DEFAULTS) | {
    "networks", "sample_sizes", "seeds",
}


def parse_config(text, base_dir="."):
    """Parse the flat key = value experiment format.

    One assignment per line, lists comma-separated, '#' starts a comment.
    Relative network and output paths resolve against base_dir.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        values[key] = value

    for key in ("networks", "sample_sizes", "seeds"):
        if key not in values:
            raise ValueError(f"config is missing required key {key!r}")
    merged = dict(_CONFIG_DEFAULTS)
    merged.update(values)

    def split(key):
        return [part.strip() for part in merged[key].split(",") if part.strip()]

    def ints(key):
        try:
            return tuple(int(part) for part in split(key))
        except ValueError:
            raise ValueError(f"config key {key!r} must list integers")

    def floats(key):
        try:
            return tuple(float(part) for part in split(key))
        except ValueError:
            raise ValueError(f"config key {key!r} must list numbers")

    record = merged["record_runtime"].lower()
    if record not in ("true", "false"):
        raise ValueError("record_runtime must be true or false")

    return ExperimentConfig(
        networks=tuple(
            os.path.normpath(os.path.join(base_dir, p)) for p in split("networks")
        ),
        sample_sizes=ints("sample_sizes"),
        seeds=ints("seeds"),
        algorithms=tuple(a.upper() for a in split("algorithms")),
        orderings=tuple(m.lower() for m in split("orderings")),
        random_orders=int(merged["random_orders"]),
        scores=tuple(s.lower() for s in split("scores")),
        k_scales=floats("k_scales"),
        ess_values=floats("ess_values"),
        ci_kinds=tuple(c.lower() for c in split("ci_kinds")),
        alphas=floats("alphas"),
        output=os.path.normpath(os.path.join(base_dir, merged["output"])),
        max_runtime_per_cell=float(merged["max_runtime_per_cell"]),
        workers=int(merged["workers"]),
        record_runtime=record == "true",
    )
