"""Reproducible synthetic citation graphs with a long-tailed, MAG-like shape."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SynthError
from .evaluation import JudgmentSet, write_judgments
from .ingest import EdgeList, PaperTable

logger = logging.getLogger(__name__)

_BLOCK = 1 << 16


@dataclass(frozen=True)
class SynthParams:
    paper_count: int = 100_000
    year_range: tuple[int, int] = (1980, 2015)
    attachment_exponent: float = 1.0
    mean_out_degree: float = 10.0
    zero_info_fraction: float = 0.59
    seed: int = 0

    def __post_init__(self):
        if self.paper_count <= 0:
            raise SynthError("paper_count must be positive")
        lo, hi = self.year_range
        if lo > hi:
            raise SynthError(f"year_range {self.year_range} is reversed")
        if lo < 1500:
            raise SynthError("years before 1500 would be rejected on ingest")
        if not self.attachment_exponent > 0:
            raise SynthError("attachment_exponent must be positive")
        if not 0 <= self.zero_info_fraction < 1:
            raise SynthError("zero_info_fraction must lie in [0, 1)")
        if not self.mean_out_degree >= 1:
            raise SynthError("mean_out_degree must be >= 1 (reference lists are never empty)")
        if not 0 <= self.seed < 2**64:
            raise SynthError("seed must be an unsigned 64-bit integer")

    @property
    def participants(self) -> int:
        return self.paper_count - round(self.paper_count * self.zero_info_fraction)


@dataclass
class SynthOutput:
    papers: PaperTable
    edges: EdgeList
    planted_rank: list[str]
    in_degree: np.ndarray = field(repr=False)


class _Fenwick:
    """Prefix sums over float weights with O(log n) update and sampling."""

    def __init__(self, size: int):
        self.size = size
        self.tree = [0.0] * (size + 1)
        self.weights = [0.0] * size
        self.total = 0.0
        self.top = 1 << max(0, size.bit_length() - 1) if size else 0

    def set(self, i: int, w: float) -> None:
        delta = w - self.weights[i]
        self.weights[i] = w
        self.total += delta
        tree = self.tree
        j = i + 1
        while j <= self.size:
            tree[j] += delta
            j += j & -j

    def find(self, u: float) -> int:
        """Smallest index whose prefix sum exceeds ``u``."""
        pos = 0
        step = self.top
        tree = self.tree
        while step:
            nxt = pos + step
            if nxt <= self.size and tree[nxt] <= u:
                pos = nxt
                u -= tree[nxt]
            step >>= 1
        return min(pos, self.size - 1)


class _Uniforms:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.buf: list[float] = []
        self.pos = 0

    def next(self) -> float:
        if self.pos == len(self.buf):
            self.buf = self.rng.random(_BLOCK).tolist()
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u


def _token_width(n: int) -> int:
    return max(8, len(f"{max(n - 1, 0):x}"))


def generate(params: SynthParams) -> SynthOutput:
    """Build papers, edges and the planted in-degree ranking for ``params``.

    Citing papers are processed in (year, index) order; each draws a
    geometric reference-list size and cites distinct earlier papers with
    probability proportional to ``(in_degree + 1) ** attachment_exponent``.
    """
    n = params.paper_count
    m = params.participants
    if m >= 2 and params.mean_out_degree > m - 1:
        raise SynthError(
            f"mean_out_degree={params.mean_out_degree} exceeds the {m - 1} papers "
            f"any citing paper could reference ({m} of {n} papers participate)"
        )
    rng = np.random.default_rng(params.seed)
    lo, hi = params.year_range
    years = rng.integers(lo, hi + 1, size=n)
    members = np.sort(rng.choice(n, size=m, replace=False))
    order = members[np.argsort(years[members], kind="stable")]
    sizes = rng.geometric(1.0 / params.mean_out_degree, size=m).tolist()
    uniforms = _Uniforms(rng)

    expo = params.attachment_exponent
    tree = _Fenwick(m)
    in_deg = [0] * m
    order_list = order.tolist()
    citing_out: list[int] = []
    cited_out: list[int] = []
    for pos in range(m):
        k = min(sizes[pos], pos)
        if k:
            chosen = []
            while len(chosen) < k:
                t = tree.find(uniforms.next() * tree.total)
                if tree.weights[t] == 0.0:
                    continue
                chosen.append(t)
                tree.set(t, 0.0)
            src = order_list[pos]
            for t in chosen:
                in_deg[t] += 1
                tree.set(t, (in_deg[t] + 1) ** expo)
                citing_out.append(src)
                cited_out.append(order_list[t])
        tree.set(pos, 1.0)

    width = _token_width(n)
    ids = [f"{i:0{width}x}" for i in range(n)]
    papers = PaperTable.from_records(zip(ids, years.tolist()))
    edges = EdgeList([(ids[s], ids[d]) for s, d in zip(citing_out, cited_out)])
    in_degree = np.zeros(n, dtype=np.int64)
    in_degree[order] = in_deg
    # tokens sort like their integer index, so index order is ID order
    planted = np.lexsort((np.arange(n), -in_degree))
    logger.info("generated %d papers, %d edges (%d participating)", n, len(edges), m)
    return SynthOutput(papers, edges, [ids[i] for i in planted.tolist()], in_degree)


def sample_judgments(output: SynthOutput, count: int, min_gap: int, seed: int = 0) -> JudgmentSet:
    """Draw ``(better, worse)`` pairs at least ``min_gap`` apart in planted rank.

    Pairs whose two papers have equal in-degree carry no ground-truth order
    and are rejected.
    """
    n = len(output.planted_rank)
    if not 0 < min_gap < n:
        raise SynthError(f"min_gap must lie in (0, {n}), got {min_gap}")
    index = output.papers.index
    ranked_deg = output.in_degree[[index[t] for t in output.planted_rank]]
    if ranked_deg[0] <= ranked_deg[min_gap]:
        raise SynthError(f"no pair {min_gap} ranks apart has distinct in-degrees")
    rng = np.random.default_rng([seed, 1])
    got_i: list[np.ndarray] = []
    got_j: list[np.ndarray] = []
    have = 0
    for _ in range(10_000):
        if have >= count:
            break
        i = rng.integers(0, n - min_gap, size=4 * count)
        j = rng.integers(i + min_gap, n)
        ok = ranked_deg[i] > ranked_deg[j]
        got_i.append(i[ok])
        got_j.append(j[ok])
        have += int(ok.sum())
    else:
        raise SynthError("could not sample enough ordered judgment pairs")
    i = np.concatenate(got_i)[:count]
    j = np.concatenate(got_j)[:count]
    ranked = output.planted_rank
    return JudgmentSet([(ranked[a], ranked[b]) for a, b in zip(i.tolist(), j.tolist())])


def write_output(output: SynthOutput, directory, judgments: JudgmentSet | None = None) -> dict[str, Path]:
    """Write papers/references/planted_rank (and judgments) TSV files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "papers": directory / "papers.tsv",
        "references": directory / "references.tsv",
        "planted_rank": directory / "planted_rank.txt",
    }
    try:
        with open(paths["papers"], "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(f"{t}\t{y}\n" for t, y in zip(output.papers.ids, output.papers.years.tolist()))
        with open(paths["references"], "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(f"{c}\t{d}\n" for c, d in output.edges)
        with open(paths["planted_rank"], "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(f"{t}\n" for t in output.planted_rank)
        if judgments is not None:
            paths["judgments"] = directory / "judgments.tsv"
            write_judgments(judgments, paths["judgments"])
    except OSError as exc:
        raise SynthError(f"cannot write synthetic data to {directory}: {exc}") from exc
    return paths
