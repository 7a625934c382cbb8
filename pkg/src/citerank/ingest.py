"""Parse papers/references TSV files into an immutable CSR citation graph."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import EmptyDatasetError, IngestError

logger = logging.getLogger(__name__)

MIN_YEAR = 1500
MAX_TOKEN_BYTES = 64


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _valid_token(token: str) -> bool:
    return bool(token) and len(token.encode("utf-8")) <= MAX_TOKEN_BYTES


def _rows(path: Path):
    try:
        fh = open(path, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with fh:
        try:
            for line in fh:
                line = line.rstrip("\r\n")
                if line:
                    yield line.split("\t")
        except (OSError, UnicodeDecodeError) as exc:
            raise IngestError(f"cannot read {path}: {exc}") from exc


@dataclass(frozen=True)
class PaperTable:
    """Paper tokens and publication years, aligned on a dense index."""

    ids: tuple[str, ...]
    years: np.ndarray
    index: Mapping[str, int]
    duplicates: int = 0
    malformed: int = 0
    out_of_range: int = 0

    @classmethod
    def from_records(cls, records: Iterable[tuple[str, int]], **counters) -> "PaperTable":
        ids: list[str] = []
        years: list[int] = []
        index: dict[str, int] = {}
        for token, year in records:
            if token in index:
                raise IngestError(f"duplicate paper id {token!r}")
            index[token] = len(ids)
            ids.append(token)
            years.append(year)
        return cls(
            ids=tuple(ids),
            years=_frozen(np.asarray(years, dtype=np.int64)),
            index=MappingProxyType(index),
            **counters,
        )

    @property
    def count(self) -> int:
        return len(self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def year_of(self, token: str) -> int:
        return int(self.years[self.index[token]])

    @property
    def max_year(self) -> int:
        return int(self.years.max())


def parse_papers(path, max_year: int | None = None) -> PaperTable:
    """Read ``paper_id<TAB>year`` rows.

    Duplicate ids keep their first occurrence. Malformed rows and years
    outside ``[1500, max_year]`` are skipped; all three are counted on the
    returned table.
    """
    path = Path(path)
    seen: set[str] = set()
    records = []
    duplicates = malformed = out_of_range = 0
    for parts in _rows(path):
        if len(parts) != 2 or not _valid_token(parts[0]):
            malformed += 1
            continue
        token, raw_year = parts
        try:
            year = int(raw_year)
        except ValueError:
            malformed += 1
            continue
        if year < MIN_YEAR or (max_year is not None and year > max_year):
            out_of_range += 1
            continue
        if token in seen:
            duplicates += 1
            continue
        seen.add(token)
        records.append((token, year))

    if not records:
        raise EmptyDatasetError(f"no valid paper rows in {path}")
    for name, n in (("duplicate", duplicates), ("malformed", malformed), ("out-of-range", out_of_range)):
        if n:
            logger.warning("%s: skipped %d %s paper rows", path, n, name)
    return PaperTable.from_records(
        records, duplicates=duplicates, malformed=malformed, out_of_range=out_of_range
    )


@dataclass(frozen=True)
class EdgeList:
    """Raw ``(citing, cited)`` token pairs in file order."""

    pairs: list[tuple[str, str]]
    malformed: int = 0

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]


def parse_references(path) -> EdgeList:
    path = Path(path)
    pairs = []
    malformed = 0
    for parts in _rows(path):
        if len(parts) != 2 or not (_valid_token(parts[0]) and _valid_token(parts[1])):
            malformed += 1
            continue
        pairs.append((parts[0], parts[1]))
    if malformed:
        logger.warning("%s: skipped %d malformed reference rows", path, malformed)
    return EdgeList(pairs, malformed)


@dataclass(frozen=True)
class IngestReport:
    papers: int = 0
    edges: int = 0
    duplicate_papers: int = 0
    malformed_papers: int = 0
    out_of_range_years: int = 0
    malformed_references: int = 0
    duplicate_edges: int = 0
    self_loops: int = 0
    unknown_id_edges: int = 0

    @property
    def warnings(self) -> int:
        return sum(getattr(self, f.name) for f in fields(self)[2:])

    def to_line(self) -> str:
        return " ".join(f"{f.name}={getattr(self, f.name)}" for f in fields(self))


@dataclass(frozen=True)
class CitationGraph:
    """Directed citing -> cited graph in CSR form.

    ``indices[indptr[c]:indptr[c + 1]]`` is the sorted reference list of
    paper ``c`` (dense indices). Arrays are read-only.
    """

    papers: PaperTable
    indptr: np.ndarray
    indices: np.ndarray
    in_degree: np.ndarray
    report: IngestReport = field(default_factory=IngestReport)

    @property
    def ids(self) -> tuple[str, ...]:
        return self.papers.ids

    @property
    def paper_count(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.indices)

    @property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def references(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def citing(self) -> np.ndarray:
        """Source index of every edge, aligned with ``indices``."""
        return np.repeat(np.arange(self.paper_count, dtype=np.int64), self.out_degree)

    def edge_tokens(self) -> list[tuple[str, str]]:
        ids = self.ids
        return [(ids[s], ids[d]) for s, d in zip(self.citing().tolist(), self.indices.tolist())]


def build_graph(papers: PaperTable, edges: Iterable[tuple[str, str]]) -> CitationGraph:
    """Clean an edge list against ``papers`` and pack it into CSR.

    Self-loops, duplicate edges and edges naming an unknown paper are
    dropped and counted in ``graph.report``.
    """
    index = papers.index
    n = papers.count
    src, dst = [], []
    unknown = 0
    for citing, cited in edges:
        s = index.get(citing)
        d = index.get(cited)
        if s is None or d is None:
            unknown += 1
            continue
        src.append(s)
        dst.append(d)

    src_a = np.asarray(src, dtype=np.int64)
    dst_a = np.asarray(dst, dtype=np.int64)
    loops = src_a == dst_a
    self_loops = int(loops.sum())
    keys = src_a[~loops] * n + dst_a[~loops]
    unique_keys = np.unique(keys)
    duplicates = len(keys) - len(unique_keys)

    cite_src = unique_keys // n if n else unique_keys
    cite_dst = unique_keys % n if n else unique_keys
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(cite_src, minlength=n), out=indptr[1:])
    in_degree = np.bincount(cite_dst, minlength=n).astype(np.int64)

    report = IngestReport(
        papers=n,
        edges=len(unique_keys),
        duplicate_papers=papers.duplicates,
        malformed_papers=papers.malformed,
        out_of_range_years=papers.out_of_range,
        malformed_references=getattr(edges, "malformed", 0),
        duplicate_edges=duplicates,
        self_loops=self_loops,
        unknown_id_edges=unknown,
    )
    if duplicates or self_loops or unknown:
        logger.warning(
            "dropped %d duplicate, %d self-loop, %d unknown-id edges", duplicates, self_loops, unknown
        )
    return CitationGraph(
        papers=papers,
        indptr=_frozen(indptr),
        indices=_frozen(cite_dst.astype(np.int64)),
        in_degree=_frozen(in_degree),
        report=report,
    )


def load_graph(papers_path, references_path, max_year: int | None = None) -> CitationGraph:
    papers = parse_papers(papers_path, max_year=max_year)
    return build_graph(papers, parse_references(references_path))
