"""Static-rank metrics: citation count, ACR, S-RCR and PageRank."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .cocitation import NeighborAcrAccumulator, accumulate_neighbor_acr
from .errors import InconsistencyError, MetricError
from .ingest import CitationGraph, PaperTable, _frozen

logger = logging.getLogger(__name__)

METRICS = ("citations", "acr", "srcr", "pagerank")


@dataclass(frozen=True)
class MetricParams:
    as_of_year: int | None = None
    alpha: float = 1.0
    damping: float = 0.85
    pagerank_tolerance: float = 1e-10
    pagerank_max_iterations: int = 200

    def __post_init__(self):
        if not self.alpha >= 0:
            raise MetricError(f"alpha must be >= 0, got {self.alpha}")
        if not 0 < self.damping < 1:
            raise MetricError(f"damping must lie in (0, 1), got {self.damping}")
        if not self.pagerank_tolerance > 0:
            raise MetricError("pagerank_tolerance must be positive")
        if self.pagerank_max_iterations <= 0:
            raise MetricError("pagerank_max_iterations must be positive")


class PaperValues:
    """Per-paper float values aligned with a tuple of paper tokens."""

    def __init__(self, ids, values, index: Mapping[str, int] | None = None):
        self.ids = tuple(ids)
        self.values = _frozen(np.array(values, dtype=np.float64))
        if len(self.ids) != len(self.values):
            raise ValueError("ids and values differ in length")
        if index is None:
            index = MappingProxyType({t: i for i, t in enumerate(self.ids)})
        self.index = index

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, token) -> bool:
        return token in self.index

    def __getitem__(self, token) -> float:
        return float(self.values[self.index[token]])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.ids, self.values.tolist()))


class ScoreTable(PaperValues):
    def __init__(self, metric_name, ids, values, params=None, index=None, converged=None, iterations=None):
        if metric_name not in METRICS:
            raise MetricError(f"unknown metric {metric_name!r}")
        super().__init__(ids, values, index)
        if not np.all(np.isfinite(self.values)):
            raise MetricError(f"{metric_name}: non-finite scores")
        self.metric_name = metric_name
        self.params = dict(params or {})
        self.converged = converged
        self.iterations = iterations

    def __repr__(self) -> str:
        return f"ScoreTable({self.metric_name}, n={len(self)})"


def citation_counts(graph: CitationGraph) -> ScoreTable:
    return ScoreTable("citations", graph.ids, graph.in_degree, index=graph.papers.index)


def resolve_as_of_year(papers: PaperTable, params: MetricParams) -> int:
    return papers.max_year if params.as_of_year is None else params.as_of_year


def acr(graph: CitationGraph, papers: PaperTable, params: MetricParams = MetricParams()) -> ScoreTable:
    """Citations per year since publication: ``citations / (age + 1)``.

    Ages are clamped at zero, so a paper dated after ``as_of_year`` is
    treated as published that year.
    """
    if papers is graph.papers or tuple(papers.ids) == graph.ids:
        years = papers.years
    else:
        missing = [t for t in graph.ids if t not in papers.index][:5]
        if missing:
            raise InconsistencyError(f"papers missing from paper table, e.g. {missing}")
        years = np.array([papers.year_of(t) for t in graph.ids], dtype=np.int64)
    as_of = resolve_as_of_year(papers, params)
    future = int((years > as_of).sum())
    if future:
        logger.warning("%d papers dated after as_of_year=%d; ages clamped to 0", future, as_of)
    age = np.maximum(0, as_of - years)
    scores = graph.in_degree / (age + 1.0)
    return ScoreTable("acr", graph.ids, scores, {"as_of_year": as_of}, index=graph.papers.index)


def srcr_value(acr_value, neighbor_mean, alpha):
    """Smoothed ratio of a paper's ACR to its neighborhood mean ACR."""
    return (acr_value + alpha) / (neighbor_mean + alpha)


def srcr(acr_table: ScoreTable, accumulator: NeighborAcrAccumulator, params: MetricParams = MetricParams()) -> ScoreTable:
    if acr_table.metric_name != "acr":
        raise MetricError(f"srcr needs an acr table, got {acr_table.metric_name}")
    if len(accumulator.sums) != len(acr_table):
        raise InconsistencyError("accumulator and ACR table cover different papers")
    means = accumulator.means()
    alpha = float(params.alpha)
    if alpha == 0 and np.any(means == 0):
        bad = int((means == 0).sum())
        raise MetricError(
            f"alpha=0 divides by a zero neighborhood mean for {bad} papers; use a positive alpha"
        )
    scores = srcr_value(acr_table.values, means, alpha)
    out_params = dict(acr_table.params, alpha=alpha, neighborhoods=accumulator.mode)
    return ScoreTable("srcr", acr_table.ids, scores, out_params, index=acr_table.index)


def transition_matrix(graph: CitationGraph) -> sp.csr_matrix:
    """Column-stochastic on non-dangling columns: entry (cited, citing)."""
    n = graph.paper_count
    k = graph.out_degree
    citing = graph.citing()
    data = 1.0 / k[citing]
    return sp.csr_matrix((data, (graph.indices, citing)), shape=(n, n))


def pagerank(graph: CitationGraph, params: MetricParams = MetricParams()) -> ScoreTable:
    """Power iteration; a paper receives rank from the papers citing it.

    Dangling mass is spread uniformly each sweep. Stops once the L1 change
    drops below the tolerance; otherwise returns with ``converged=False``.
    """
    n = graph.paper_count
    d = params.damping
    run_params = {
        "damping": d,
        "tolerance": params.pagerank_tolerance,
        "max_iterations": params.pagerank_max_iterations,
    }
    if n == 0:
        return ScoreTable("pagerank", (), [], run_params, converged=True, iterations=0)
    M = transition_matrix(graph)
    dangling = graph.out_degree == 0
    x = np.full(n, 1.0 / n)
    converged = False
    it = 0
    for it in range(1, params.pagerank_max_iterations + 1):
        x_new = d * (M @ x) + (d * x[dangling].sum() + (1.0 - d)) / n
        delta = np.abs(x_new - x).sum()
        x = x_new
        if delta < params.pagerank_tolerance:
            converged = True
            break
    if not converged:
        logger.warning("pagerank did not converge in %d iterations", it)
    x /= x.sum()
    return ScoreTable(
        "pagerank", graph.ids, x, run_params, index=graph.papers.index, converged=converged, iterations=it
    )


def format_params(params: Mapping) -> str:
    return ",".join(f"{k}={v}" for k, v in params.items())


def write_scores(table: ScoreTable, path) -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# metric={table.metric_name} params={format_params(table.params)}\n")
            for token, v in zip(table.ids, table.values.tolist()):
                fh.write(f"{token}\t{v!r}\n")
    except OSError as exc:
        raise MetricError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_scores(path) -> ScoreTable:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise MetricError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not lines or not lines[0].startswith("# metric="):
        raise MetricError(f"{path}: missing '# metric=' header")
    head = lines[0][2:]
    name, _, rest = head.partition(" params=")
    params = {}
    for item in filter(None, rest.split(",")):
        k, _, v = item.partition("=")
        params[k] = v
    ids, values = [], []
    for line in lines[1:]:
        token, _, v = line.partition("\t")
        ids.append(token)
        values.append(float(v))
    return ScoreTable(name.removeprefix("metric="), ids, values, params)


def compute(metric: str, graph: CitationGraph, params: MetricParams = MetricParams(), **neighborhood_kwargs) -> ScoreTable:
    """Run one metric end to end on ``graph``."""
    if metric == "citations":
        return citation_counts(graph)
    if metric == "acr":
        return acr(graph, graph.papers, params)
    if metric == "srcr":
        acr_table = acr(graph, graph.papers, params)
        return srcr(acr_table, accumulate_neighbor_acr(graph, acr_table, **neighborhood_kwargs), params)
    if metric == "pagerank":
        return pagerank(graph, params)
    raise MetricError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")
