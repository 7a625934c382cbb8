"""Pairwise agreement between a ranking and expert judgments."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EvalError
from .metrics import PaperValues

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class JudgmentSet:
    """``(better, worse)`` paper token pairs in file order."""

    pairs: list[tuple[str, str]]
    malformed: int = 0
    reflexive: int = 0

    def __post_init__(self):
        for better, worse in self.pairs:
            if better == worse:
                raise EvalError(f"reflexive judgment ({better}, {worse})")

    @property
    def count(self) -> int:
        return len(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


def parse_judgments(path) -> JudgmentSet:
    path = Path(path)
    pairs = []
    malformed = reflexive = 0
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\r\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    malformed += 1
                elif parts[0] == parts[1]:
                    reflexive += 1
                else:
                    pairs.append((parts[0], parts[1]))
    except (OSError, UnicodeDecodeError) as exc:
        raise EvalError(f"cannot read {path}: {exc}") from exc
    if malformed or reflexive:
        logger.warning("%s: skipped %d malformed and %d reflexive rows", path, malformed, reflexive)
    if not pairs:
        raise EvalError(f"no valid judgment pairs in {path}")
    return JudgmentSet(pairs, malformed, reflexive)


def write_judgments(judgments: JudgmentSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for better, worse in judgments.pairs:
            fh.write(f"{better}\t{worse}\n")


@dataclass(frozen=True)
class AgreementReport:
    agreement: float
    agree_count: int
    disagree_count: int
    tie_count: int
    missing_count: int

    @property
    def count(self) -> int:
        return self.agree_count + self.disagree_count + self.tie_count + self.missing_count

    def to_line(self) -> str:
        return (
            f"agreement={self.agreement!r} agree={self.agree_count} disagree={self.disagree_count} "
            f"tie={self.tie_count} missing={self.missing_count}"
        )

    def to_csv(self) -> str:
        return (
            "agreement,agree,disagree,tie,missing\n"
            f"{self.agreement!r},{self.agree_count},{self.disagree_count},{self.tie_count},{self.missing_count}\n"
        )


def agreement(scores: PaperValues, judgments: JudgmentSet) -> AgreementReport:
    """Fraction of judged pairs the scores order the same way; ties count half.

    Pairs naming a paper absent from ``scores`` are reported as missing and
    left out of the denominator.
    """
    index = scores.index
    better = np.array([index.get(b, -1) for b, _ in judgments.pairs], dtype=np.int64)
    worse = np.array([index.get(w, -1) for _, w in judgments.pairs], dtype=np.int64)
    present = (better >= 0) & (worse >= 0)
    missing = int(len(better) - present.sum())
    if not present.any():
        raise EvalError("no judged pair has both papers in the ranking")
    vb = scores.values[better[present]]
    vw = scores.values[worse[present]]
    agree = int((vb > vw).sum())
    disagree = int((vb < vw).sum())
    tie = int(present.sum()) - agree - disagree
    return AgreementReport(
        agreement=(agree + 0.5 * tie) / (agree + disagree + tie),
        agree_count=agree,
        disagree_count=disagree,
        tie_count=tie,
        missing_count=missing,
    )
