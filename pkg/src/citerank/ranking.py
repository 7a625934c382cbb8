"""Normalize scores to importance probabilities and write submission files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import RankingError
from .metrics import PaperValues, ScoreTable


class ProbabilityTable(PaperValues):
    def __init__(self, ids, values, source_metric=None, index=None):
        super().__init__(ids, values, index)
        self.source_metric = source_metric

    def __repr__(self) -> str:
        return f"ProbabilityTable({self.source_metric}, n={len(self)})"


def normalize(scores: ScoreTable) -> ProbabilityTable:
    """Min-max scale into [0, 1]; constant tables map to 0.5."""
    if len(scores) == 0:
        raise RankingError("cannot normalize an empty score table")
    v = scores.values
    if not np.all(np.isfinite(v)):
        raise RankingError("scores must be finite")
    lo, hi = v.min(), v.max()
    if hi == lo:
        probs = np.full(len(v), 0.5)
    else:
        probs = np.clip((v - lo) / (hi - lo), 0.0, 1.0)
    return ProbabilityTable(scores.ids, probs, getattr(scores, "metric_name", None), scores.index)


@dataclass(frozen=True)
class RankedList:
    ids: tuple[str, ...]
    probs: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(zip(self.ids, self.probs.tolist()))

    @property
    def entries(self) -> list[tuple[str, float]]:
        return list(self)


def rank(probs: PaperValues) -> RankedList:
    """Sort by probability descending, ties by ascending paper token."""
    ids = np.array(probs.ids, dtype=object)
    # lexsort: last key is primary
    order = np.lexsort((ids, -probs.values)) if len(ids) else np.empty(0, dtype=np.int64)
    return RankedList(tuple(ids[order].tolist()), probs.values[order])


def format_probability(p: float) -> str:
    return f"{p:#.9g}"


def write_submission(ranked: RankedList, path) -> None:
    if len(ranked) == 0:
        raise RankingError("refusing to write an empty submission")
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for token, p in ranked:
                fh.write(f"{token}\t{format_probability(p)}\n")
    except OSError as exc:
        raise RankingError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_submission(path) -> ProbabilityTable:
    path = Path(path)
    ids, probs = [], []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\r\n")
                if not line:
                    continue
                token, sep, p = line.partition("\t")
                try:
                    probs.append(float(p))
                except ValueError:
                    raise RankingError(f"{path}:{lineno}: bad probability {p!r}") from None
                if not sep or not token:
                    raise RankingError(f"{path}:{lineno}: expected paper_id<TAB>probability")
                ids.append(token)
    except OSError as exc:
        raise RankingError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not ids:
        raise RankingError(f"{path}: empty submission")
    if len(set(ids)) != len(ids):
        raise RankingError(f"{path}: duplicate paper ids")
    return ProbabilityTable(ids, probs, source_metric="submission")
