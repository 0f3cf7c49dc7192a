"""Hypernym candidate predictors and a name-based registry for the CLI."""
from __future__ import annotations

from typing import Callable, Collection, Mapping, Sequence

from ..embeddings import POS_WEIGHTED_MEAN, UNIFORM_MEAN, EmbeddingStore, TaxonomyEmbedding
from ..taxonomy import TaxonomyGraph
from .classifier import (
    ClassifierModel,
    ClassifierParams,
    classifier_predict,
    train_classifier,
)
from .common import MAX_CANDIDATES, Prediction, PredictionError, frequency_prior
from .ranking import (
    NeighborScoreParams,
    baseline_predict,
    feature_rank_predict,
    hypernym_vote_predict,
    neighbor_score_predict,
)

PREDICTORS = ("baseline", "neighbor_score", "hypernym_vote", "feature_rank", "classifier")

_SCHEME = {
    "baseline": UNIFORM_MEAN,
    "neighbor_score": POS_WEIGHTED_MEAN,
    "hypernym_vote": UNIFORM_MEAN,
    "feature_rank": UNIFORM_MEAN,
}

_INT_PARAMS = {"k", "n", "sim_power", "neighbor_count", "top", "hidden_dim", "batch_size",
               "max_epochs", "patience", "min_class_freq"}


def coerce_params(raw: Mapping[str, str]) -> dict:
    """Turn CLI ``key=value`` strings into typed hyperparameters."""
    out = {}
    for key, value in raw.items():
        if key == "weights":
            out[key] = tuple(float(v) for v in value.split(","))
        elif key in _INT_PARAMS:
            out[key] = int(value)
        else:
            out[key] = float(value)
    return out


def make_predictor(
    name: str,
    graph: TaxonomyGraph,
    store: EmbeddingStore,
    pos: str,
    params: Mapping | None = None,
    *,
    k: int = MAX_CANDIDATES,
    train: Sequence[tuple[str, str]] | None = None,
    model: ClassifierModel | None = None,
    seed: int = 0,
    function_words: Collection[str] = frozenset(),
) -> Callable[[str], Prediction]:
    """Bind a predictor to its resources; the result maps an orphan to a Prediction."""
    params = dict(params or {})
    if name not in PREDICTORS:
        raise KeyError(f"unknown predictor {name!r}; choose from {', '.join(PREDICTORS)}")

    def trim(pred: Prediction) -> Prediction:
        return Prediction(pred.orphan, pred.candidates[:k], pred.fallback, pred.meta)

    if name == "classifier":
        if model is None:
            if train is None:
                raise ValueError("the classifier needs training pairs or a saved model")
            model = train_classifier(train, store, ClassifierParams(seed=seed, **params))

        def predict(orphan: str) -> Prediction:
            return trim(classifier_predict(model, orphan, store, graph, pos))

        predict.model = model
        return predict

    ctx = TaxonomyEmbedding(graph, store, pos, _SCHEME[name], function_words)
    if name == "baseline":
        return lambda orphan: trim(baseline_predict(orphan, ctx, **params))
    if name == "neighbor_score":
        nparams = NeighborScoreParams(**params)
        return lambda orphan: trim(neighbor_score_predict(orphan, ctx, nparams))
    if name == "hypernym_vote":
        return lambda orphan: trim(hypernym_vote_predict(orphan, ctx, **params))
    return lambda orphan: trim(feature_rank_predict(orphan, ctx, **params))


__all__ = [
    "PREDICTORS",
    "ClassifierModel",
    "ClassifierParams",
    "NeighborScoreParams",
    "Prediction",
    "PredictionError",
    "baseline_predict",
    "classifier_predict",
    "coerce_params",
    "feature_rank_predict",
    "frequency_prior",
    "hypernym_vote_predict",
    "make_predictor",
    "neighbor_score_predict",
    "train_classifier",
]
