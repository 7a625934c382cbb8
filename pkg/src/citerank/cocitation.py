"""Co-citation neighborhoods: q is a neighbor of p when some paper cites both."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import BudgetExceededError, CocitationError
from .ingest import CitationGraph, _frozen

logger = logging.getLogger(__name__)

DEFAULT_MEMORY_BUDGET = 4 * 1024**3
# working bytes per ordered co-citation pair: chunk keys, merged keys, CSR indices
BYTES_PER_PAIR = 32
CHUNK_PAIRS = 1 << 22

EXACT = "exact"
STREAMING = "streaming"


@dataclass(frozen=True)
class NeighborhoodIndex:
    """Per-paper sorted neighbor sets in CSR form."""

    indptr: np.ndarray
    indices: np.ndarray
    has_citation_info: np.ndarray

    @property
    def paper_count(self) -> int:
        return len(self.indptr) - 1

    @property
    def total_size(self) -> int:
        return len(self.indices)

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]


@dataclass(frozen=True)
class NeighborAcrAccumulator:
    sums: np.ndarray
    counts: np.ndarray
    mode: str

    def means(self) -> np.ndarray:
        out = np.zeros_like(self.sums)
        nz = self.counts > 0
        np.divide(self.sums, self.counts, out=out, where=nz)
        return out


def cocitation_pair_count(graph: CitationGraph) -> int:
    """Number of ordered pairs (p, q), p != q, summed over reference lists."""
    k = graph.out_degree.astype(np.int64)
    return int((k * (k - 1)).sum())


def _chunks(graph: CitationGraph, chunk_pairs: int) -> list[np.ndarray]:
    k = graph.out_degree.astype(np.int64)
    citing = np.flatnonzero(k >= 2)
    if len(citing) == 0:
        return []
    cost = np.cumsum(k[citing] * (k[citing] - 1))
    bounds = np.searchsorted(cost, np.arange(chunk_pairs, cost[-1], chunk_pairs), side="right")
    return [c for c in np.split(citing, bounds) if len(c)]


def _pair_keys(graph: CitationGraph, citing: np.ndarray) -> np.ndarray:
    n = graph.paper_count
    indptr, indices = graph.indptr, graph.indices
    k = indptr[citing + 1] - indptr[citing]
    # edge positions of every reference of every citing paper in this chunk
    edge_start = np.repeat(indptr[citing], k)
    edge_pos = edge_start + (np.arange(k.sum()) - np.repeat(np.cumsum(k) - k, k))
    edge_k = np.repeat(k, k)
    left = np.repeat(indices[edge_pos], edge_k)
    right_start = np.repeat(edge_start, edge_k)
    block = np.repeat(np.cumsum(edge_k) - edge_k, edge_k)
    right = indices[right_start + (np.arange(edge_k.sum()) - block)]
    keep = left != right
    return np.unique(left[keep] * n + right[keep])


def build_neighborhoods(
    graph: CitationGraph,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    threads: int = 1,
    chunk_pairs: int = CHUNK_PAIRS,
    progress: Callable[[int, int], None] | None = None,
) -> NeighborhoodIndex:
    """Materialize every paper's co-citation set.

    Work is O(sum of squared reference-list lengths); the estimate is checked
    against ``memory_budget`` before anything is allocated. Output does not
    depend on ``threads``.
    """
    n = graph.paper_count
    pairs = cocitation_pair_count(graph)
    need = pairs * BYTES_PER_PAIR
    if need > memory_budget:
        raise BudgetExceededError(
            f"co-citation expansion needs ~{need / 2**30:.2f} GiB for {pairs} ordered pairs "
            f"(largest reference list {int(graph.out_degree.max(initial=0))}); "
            f"budget is {memory_budget / 2**30:.2f} GiB"
        )
    chunks = _chunks(graph, chunk_pairs)
    logger.info("co-citation: %d ordered pairs in %d chunks", pairs, len(chunks))

    parts: list[np.ndarray] = []
    if threads > 1 and len(chunks) > 1:
        pool = ThreadPoolExecutor(max_workers=threads)
        results = pool.map(lambda c: _pair_keys(graph, c), chunks)
    else:
        pool = None
        results = (_pair_keys(graph, c) for c in chunks)
    try:
        # map() yields in chunk order, so the merge is deterministic
        for keys in results:
            parts.append(keys)
            if progress:
                progress(len(parts), len(chunks))
    finally:
        if pool is not None:
            pool.shutdown()

    if len(parts) == 1:
        keys = parts[0]
    elif parts:
        keys = np.unique(np.concatenate(parts))
    else:
        keys = np.empty(0, dtype=np.int64)

    rows = keys // n if n else keys
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    has_info = (graph.in_degree > 0) | (graph.out_degree > 0)
    return NeighborhoodIndex(
        indptr=_frozen(indptr),
        indices=_frozen(keys % n if n else keys),
        has_citation_info=_frozen(np.asarray(has_info)),
    )


def _acr_values(graph: CitationGraph, acr) -> np.ndarray:
    values = np.asarray(acr.values, dtype=np.float64)
    if len(values) != graph.paper_count or tuple(acr.ids) != graph.ids:
        missing = set(graph.ids) - set(acr.ids)
        sample = sorted(missing)[:5]
        raise CocitationError(f"ACR table does not cover the graph; missing e.g. {sample}")
    return values


def accumulate_neighbor_acr(
    graph: CitationGraph,
    acr,
    mode: str = EXACT,
    index: NeighborhoodIndex | None = None,
    **build_kwargs,
) -> NeighborAcrAccumulator:
    """Per-paper sum and count of neighbor ACR values.

    ``exact`` sums over the neighbor *set*. ``streaming`` makes one pass over
    reference lists and counts a neighbor once per co-citing paper, so a pair
    co-cited twice contributes twice; it never materializes the sets.
    """
    values = _acr_values(graph, acr)
    n = graph.paper_count
    if mode == EXACT:
        if index is None:
            index = build_neighborhoods(graph, **build_kwargs)
        rows = np.repeat(np.arange(n, dtype=np.int64), index.sizes)
        sums = np.bincount(rows, weights=values[index.indices], minlength=n)
        counts = index.sizes.astype(np.int64)
    elif mode == STREAMING:
        citing = graph.citing()
        cited = graph.indices
        list_sum = np.bincount(citing, weights=values[cited], minlength=n)
        k = graph.out_degree
        sums = np.bincount(cited, weights=list_sum[citing] - values[cited], minlength=n)
        counts = np.bincount(cited, weights=(k[citing] - 1), minlength=n).astype(np.int64)
    else:
        raise CocitationError(f"unknown neighborhood mode {mode!r}")
    return NeighborAcrAccumulator(
        sums=_frozen(np.asarray(sums, dtype=np.float64)), counts=_frozen(counts), mode=mode
    )


def size_bucket(size: int) -> tuple[int, int]:
    """Power-of-two bucket: 0, 1, 2-3, 4-7, ..."""
    if size == 0:
        return (0, 0)
    lo = 1 << (int(size).bit_length() - 1)
    return (lo, 2 * lo - 1)


@dataclass(frozen=True)
class DistributionSummary:
    histogram: dict[tuple[int, int], int]
    mean: float
    max: int
    zero_count: int
    considered: int

    def to_csv(self) -> str:
        lines = ["bucket_lo,bucket_hi,count"]
        lines += [f"{lo},{hi},{c}" for (lo, hi), c in self.histogram.items()]
        lines.append(f"# mean={self.mean!r},max={self.max},zero_count={self.zero_count}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def neighborhood_stats(index: NeighborhoodIndex, citation_info_only: bool = False) -> DistributionSummary:
    sizes = index.sizes
    if citation_info_only:
        sizes = sizes[index.has_citation_info]
    if len(sizes) == 0:
        return DistributionSummary({}, 0.0, 0, 0, 0)
    uniq, counts = np.unique(sizes, return_counts=True)
    histogram: dict[tuple[int, int], int] = {}
    for s, c in zip(uniq.tolist(), counts.tolist()):
        b = size_bucket(s)
        histogram[b] = histogram.get(b, 0) + c
    return DistributionSummary(
        histogram=histogram,
        mean=float(sizes.mean()),
        max=int(sizes.max()),
        zero_count=int((sizes == 0).sum()),
        considered=len(sizes),
    )
