"""Embedding-neighbourhood predictors that need no training."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..embeddings import TaxonomyEmbedding
from .common import (
    MAX_CANDIDATES,
    Prediction,
    fallback_prediction,
    first_n_unique,
    orphan_query,
    top_by_score,
)


def baseline_predict(orphan: str, ctx: TaxonomyEmbedding, k: int = 10, n: int = 10) -> Prediction:
    """Hypernyms of the ``k`` nearest synsets, taken in neighbour order, first ``n`` kept."""
    query = orphan_query(orphan, ctx)
    if query is None:
        return fallback_prediction(orphan, ctx, n)
    neighbours = ctx.nearest(query, k)
    g = ctx.graph
    hypernyms = (p for sid, _ in neighbours for p in g.hypernyms(sid))
    return Prediction(orphan, tuple(first_n_unique(hypernyms, min(n, MAX_CANDIDATES))))


@dataclass(frozen=True)
class NeighborScoreParams:
    decay: float = 3.0
    sim_power: int = 5
    second_order_discount: float = 0.5
    neighbor_count: int = 100

    def __post_init__(self):
        if self.decay < 0:
            raise ValueError("decay must be non-negative")
        if self.sim_power < 1:
            raise ValueError("sim_power must be >= 1")
        if not 0 < self.second_order_discount <= 1:
            raise ValueError("second_order_discount must be in (0, 1]")
        if self.neighbor_count < 1:
            raise ValueError("neighbor_count must be >= 1")


def neighbor_scores(orphan: str, ctx: TaxonomyEmbedding, params: NeighborScoreParams) -> dict[str, float] | None:
    query = orphan_query(orphan, ctx)
    if query is None:
        return None
    unit_query = query / np.linalg.norm(query)
    g = ctx.graph
    scores: dict[str, float] = {}
    for sid, sim in ctx.nearest(query, params.neighbor_count):
        dist = float(np.linalg.norm(unit_query - ctx.index.unit_vector(sid)))
        contribution = math.exp(-params.decay * dist) * sim ** params.sim_power
        for parent in g.hypernyms(sid):
            scores[parent] = scores.get(parent, 0.0) + contribution
        for grand in g.second_order_hypernyms(sid):
            scores[grand] = scores.get(grand, 0.0) + contribution * params.second_order_discount
    return scores


def neighbor_score_predict(
    orphan: str, ctx: TaxonomyEmbedding, params: NeighborScoreParams | None = None
) -> Prediction:
    """Rank direct and second-order hypernyms of neighbours by summed neighbour scores.

    Each neighbour at distance ``d`` with cosine ``s`` adds
    ``exp(-decay * d) * s ** sim_power`` to its direct hypernyms and the
    discounted amount to its second-order ones. Distances are taken between
    unit vectors.
    """
    params = params or NeighborScoreParams()
    scores = neighbor_scores(orphan, ctx, params)
    if scores is None:
        return fallback_prediction(orphan, ctx)
    return Prediction(orphan, tuple(top_by_score(scores, {}, MAX_CANDIDATES)), meta={"scores": scores})


def hypernym_vote_predict(orphan: str, ctx: TaxonomyEmbedding, neighbor_count: int = 10) -> Prediction:
    """Most frequent hypernyms among the nearest synsets.

    Each neighbour votes once for every synset in its direct plus
    second-order hypernyms. Ties go to the candidate seen at the better
    neighbour rank, then to the smaller id.
    """
    if neighbor_count < 1:
        raise ValueError("neighbor_count must be >= 1")
    query = orphan_query(orphan, ctx)
    if query is None:
        return fallback_prediction(orphan, ctx)
    g = ctx.graph
    votes: dict[str, float] = {}
    best_rank: dict[str, tuple] = {}
    for rank, (sid, _) in enumerate(ctx.nearest(query, neighbor_count)):
        for cand in dict.fromkeys(g.hypernyms(sid) + g.second_order_hypernyms(sid)):
            votes[cand] = votes.get(cand, 0) + 1
            best_rank.setdefault(cand, (rank,))
    return Prediction(orphan, tuple(top_by_score(votes, best_rank, MAX_CANDIDATES)))


DEFAULT_FEATURE_WEIGHTS = (1.0, 2.0, 1.0)


def feature_rank_predict(
    orphan: str,
    ctx: TaxonomyEmbedding,
    weights: tuple[float, float, float] = DEFAULT_FEATURE_WEIGHTS,
    top: int = 10,
) -> Prediction:
    """Linear score over three binary features of a candidate:
    is a nearest synset, is a hypernym of one, is a second-order hypernym of one.
    """
    if len(weights) != 3 or any(w < 0 for w in weights):
        raise ValueError("weights must be three non-negative numbers")
    query = orphan_query(orphan, ctx)
    if query is None:
        return fallback_prediction(orphan, ctx)
    g = ctx.graph
    features: dict[str, list[int]] = {}
    best_rank: dict[str, tuple] = {}
    for rank, (sid, _) in enumerate(ctx.nearest(query, top)):
        groups = ((sid,), g.hypernyms(sid), g.second_order_hypernyms(sid))
        for slot, group in enumerate(groups):
            for cand in group:
                features.setdefault(cand, [0, 0, 0])[slot] = 1
                best_rank.setdefault(cand, (rank,))
    scores = {c: float(sum(w * f for w, f in zip(weights, fs))) for c, fs in features.items()}
    return Prediction(orphan, tuple(top_by_score(scores, best_rank, MAX_CANDIDATES)), meta={"scores": scores})
