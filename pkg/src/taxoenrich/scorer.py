"""Connectivity-component MAP@k and MRR.

Each gold orphan carries a list of disjoint synset groups. A candidate
that lands in a group not yet matched is a hit. Candidates from a group
that is already matched are skipped: they neither score nor take up a
rank position. Everything else is a miss and advances the position. So a
list that names each group once, in any order and with redundant
same-group synsets mixed in, earns full credit.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Collection, Mapping, Sequence, TextIO

from .gold import GoldStandard

log = logging.getLogger(__name__)

DEFAULT_K = 10


def _component_lookup(components: Sequence[Collection[str]]) -> dict[str, int]:
    if not components:
        raise ValueError("at least one gold component is required")
    owner: dict[str, int] = {}
    for i, comp in enumerate(components):
        for sid in comp:
            if sid in owner:
                raise ValueError(f"components overlap on {sid}")
            owner[sid] = i
    return owner


def _check_distinct(ranked: Sequence[str]) -> None:
    if len(set(ranked)) != len(ranked):
        raise ValueError("ranked list contains duplicate synsets")


def _trace(components, ranked, k):
    owner = _component_lookup(components)
    ranked = list(ranked)[:k]
    _check_distinct(ranked)
    matched: set[int] = set()
    position = 1
    hits = 0
    precision_sum = 0.0
    first_hit = None
    for sid in ranked:
        comp = owner.get(sid)
        if comp is None:
            position += 1
        elif comp in matched:
            continue
        else:
            hits += 1
            precision_sum += hits / position
            matched.add(comp)
            if first_hit is None:
                first_hit = position
            position += 1
    return precision_sum, matched, first_hit


def average_precision(components: Sequence[Collection[str]], ranked: Sequence[str], k: int = DEFAULT_K) -> float:
    precision_sum, _, _ = _trace(components, ranked, k)
    return precision_sum / min(len(components), k)


def reciprocal_rank(components: Sequence[Collection[str]], ranked: Sequence[str], k: int = DEFAULT_K) -> float:
    _, _, first_hit = _trace(components, ranked, k)
    return 0.0 if first_hit is None else 1.0 / first_hit


@dataclass(frozen=True)
class OrphanScore:
    orphan: str
    ap: float
    rr: float
    matched: int
    total: int


@dataclass
class EvalReport:
    map_score: float
    mrr_score: float
    per_orphan: list[OrphanScore]
    missing_orphans: list[str] = field(default_factory=list)
    unknown_orphans: list[str] = field(default_factory=list)

    def summary(self) -> str:
        return f"MAP\t{self.map_score:.4f}\nMRR\t{self.mrr_score:.4f}\n"

    def write_tsv(self, stream: TextIO) -> None:
        stream.write("orphan\tap\trr\tmatched\ttotal\n")
        for row in self.per_orphan:
            stream.write(f"{row.orphan}\t{row.ap:.6f}\t{row.rr:.6f}\t{row.matched}\t{row.total}\n")
        stream.write(self.summary())


def evaluate(
    gold: GoldStandard,
    submission: Mapping[str, Sequence[str]],
    k: int = DEFAULT_K,
    strict: bool = False,
) -> EvalReport:
    """Score a submission; orphans without predictions count as zeros."""
    unknown = sorted(set(submission) - set(gold.entries))
    if unknown:
        msg = f"{len(unknown)} submitted orphans are not in the gold standard: {', '.join(unknown[:5])}"
        if strict:
            raise ValueError(msg)
        log.warning(msg)

    rows, missing = [], []
    for orphan, entry in gold.entries.items():
        ranked = submission.get(orphan)
        if ranked is None:
            missing.append(orphan)
            ranked = ()
        precision_sum, matched, first_hit = _trace(entry.components, ranked, k)
        rows.append(OrphanScore(
            orphan,
            precision_sum / min(len(entry.components), k),
            0.0 if first_hit is None else 1.0 / first_hit,
            len(matched),
            len(entry.components),
        ))
    n = len(rows)
    return EvalReport(
        map_score=sum(r.ap for r in rows) / n if n else 0.0,
        mrr_score=sum(r.rr for r in rows) / n if n else 0.0,
        per_orphan=rows,
        missing_orphans=missing,
        unknown_orphans=unknown,
    )
