from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ..embeddings import TaxonomyEmbedding
from ..taxonomy import TaxonomyGraph

MAX_CANDIDATES = 10


class PredictionError(ValueError):
    pass


@dataclass(frozen=True)
class Prediction:
    orphan: str
    candidates: tuple[str, ...]
    fallback: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        cands = tuple(self.candidates)
        if len(cands) > MAX_CANDIDATES:
            raise PredictionError(f"{self.orphan}: {len(cands)} candidates, at most {MAX_CANDIDATES} allowed")
        if len(set(cands)) != len(cands):
            raise PredictionError(f"{self.orphan}: duplicate candidates")
        object.__setattr__(self, "candidates", cands)

    def check_pos(self, g: TaxonomyGraph, pos: str) -> None:
        bad = [c for c in self.candidates if g[c].pos != pos]
        if bad:
            raise PredictionError(f"{self.orphan}: candidates {bad} are not {pos}")


def frequency_prior(g: TaxonomyGraph, pos: str, n: int = MAX_CANDIDATES) -> tuple[str, ...]:
    """Synsets of ``pos`` with the most hyponyms, ties by id."""
    ranked = sorted(
        (sid for sid in g.ids(pos) if g.hyponyms(sid)),
        key=lambda sid: (-len(g.hyponyms(sid)), sid),
    )
    return tuple(ranked[:n])


def fallback_prediction(orphan: str, ctx: TaxonomyEmbedding, n: int = MAX_CANDIDATES) -> Prediction:
    return Prediction(orphan, frequency_prior(ctx.graph, ctx.pos, n), fallback=True)


def orphan_query(orphan: str, ctx: TaxonomyEmbedding) -> np.ndarray | None:
    """Orphan vector, or None when degenerate or zero and the caller must fall back."""
    emb = ctx.embed(orphan)
    if emb.degenerate or not np.any(emb.vector) or len(ctx.index) == 0:
        return None
    return emb.vector


def top_by_score(scores: dict[str, float], tiebreak: dict[str, tuple], n: int) -> list[str]:
    return sorted(scores, key=lambda c: (-scores[c], *tiebreak.get(c, ()), c))[:n]


def first_n_unique(ids: Iterable[str], n: int) -> list[str]:
    out: dict[str, None] = {}
    for sid in ids:
        if len(out) == n:
            break
        out.setdefault(sid, None)
    return list(out)
