import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import neighbor_score_oracle, vote_oracle
from taxoenrich.embeddings import POS_WEIGHTED_MEAN, EmbeddingStore, TaxonomyEmbedding
from taxoenrich.predictors import (
    PREDICTORS,
    NeighborScoreParams,
    Prediction,
    PredictionError,
    baseline_predict,
    feature_rank_predict,
    frequency_prior,
    hypernym_vote_predict,
    make_predictor,
    neighbor_score_predict,
)
from taxoenrich.predictors.ranking import neighbor_scores
from taxoenrich.synthetic import random_taxonomy
from taxoenrich.taxonomy import build_taxonomy


def ctx_for(nodes, edges, vectors, scheme="uniform_mean"):
    """nodes: (id, lemma); lemmas without a vector make the synset unusable for kNN."""
    g = build_taxonomy([(sid, lemma, [lemma]) for sid, lemma in nodes], edges)
    return TaxonomyEmbedding(g, EmbeddingStore.from_dict(vectors), "noun", scheme)


def test_prediction_invariants():
    with pytest.raises(PredictionError, match="at most 10"):
        Prediction("w", tuple(str(i) for i in range(11)))
    with pytest.raises(PredictionError, match="duplicate"):
        Prediction("w", ("a", "a"))


class TestBaseline:
    @pytest.fixture
    def toy(self):
        nodes = [("R", "root"), ("A", "animal"), ("B", "bird"), ("a1", "dog"), ("b1", "duck"), ("c", "goose")]
        edges = [("A", "R"), ("B", "R"), ("a1", "A"), ("b1", "B"), ("c", "B"), ("c", "A")]
        vectors = {
            "root": [0.0, 0.0, 1.0], "animal": [1.0, 0.0, 0.2], "bird": [0.0, 1.0, 0.2],
            "dog": [1.0, 0.1, 0.0], "duck": [0.1, 1.0, 0.0], "goose": [0.6, 0.8, 0.0],
            "swan": [0.5, 0.9, 0.0],
        }
        return ctx_for(nodes, edges, vectors)

    def test_hand_trace(self, toy):
        # cosines with swan: goose .991, duck .918, bird .857, dog .570, animal .476, root 0
        # k=3 -> goose, duck, bird; hypernyms in order: B, A | B | R
        assert baseline_predict("swan", toy, k=3).candidates == ("B", "A", "R")
        assert baseline_predict("swan", toy, k=3, n=2).candidates == ("B", "A")
        # k=1 -> goose only
        assert baseline_predict("swan", toy, k=1).candidates == ("B", "A")

    def test_identity_neighbour_first(self, toy):
        pred = baseline_predict("goose", toy)
        assert pred.candidates[:2] == ("B", "A") and not pred.fallback

    def test_dedup_single_parent(self):
        nodes = [("P", "zzz")] + [(f"x{i}", f"leaf{i}") for i in range(10)]
        rng = np.random.default_rng(0)
        vectors = {f"leaf{i}": (np.array([1.0, 0, 0]) + 0.01 * rng.normal(size=3)).tolist() for i in range(10)}
        vectors["query"] = [1.0, 0.0, 0.0]
        ctx = ctx_for(nodes, [(f"x{i}", "P") for i in range(10)], vectors)
        assert baseline_predict("query", ctx).candidates == ("P",)

    def test_degenerate_falls_back(self, toy):
        pred = baseline_predict("qqqq", toy)
        assert pred.fallback
        assert pred.candidates == frequency_prior(toy.graph, "noun") == ("A", "B", "R")


def test_frequency_prior_order():
    g = build_taxonomy([(s, s, [s]) for s in "abcxyz"], [("x", "a"), ("y", "a"), ("z", "b"), ("a", "c")])
    assert frequency_prior(g, "noun") == ("a", "b", "c")
    assert frequency_prior(g, "noun", 1) == ("a",)


class TestNeighborScore:
    def test_direct_parent_unit_score(self):
        ctx = ctx_for([("p", "nope"), ("x", "ex")], [("x", "p")], {"ex": [1.0, 0.0, 0.0]}, POS_WEIGHTED_MEAN)
        scores = neighbor_scores("ex", ctx, NeighborScoreParams(neighbor_count=1))
        assert scores == {"p": 1.0}
        assert neighbor_score_predict("ex", ctx, NeighborScoreParams(neighbor_count=1)).candidates == ("p",)

    def test_second_order_is_halved(self):
        ctx = ctx_for([("p", "nope"), ("m", "nada"), ("x", "ex")], [("x", "m"), ("m", "p")],
                      {"ex": [1.0, 0.0, 0.0]}, POS_WEIGHTED_MEAN)
        scores = neighbor_scores("ex", ctx, NeighborScoreParams(neighbor_count=1))
        assert scores == {"m": 1.0, "p": 0.5}
        assert neighbor_score_predict("ex", ctx).candidates == ("m", "p")

    def test_both_direct_and_second_order_accrues_both(self):
        # n1 -> p directly, n2 -> m -> p
        ctx = ctx_for([("p", "nope"), ("m", "nada"), ("n1", "one"), ("n2", "two")],
                      [("n1", "p"), ("n2", "m"), ("m", "p")],
                      {"one": [1.0, 0.0], "two": [1.0, 0.0]}, POS_WEIGHTED_MEAN)
        scores = neighbor_scores("one", ctx, NeighborScoreParams(neighbor_count=2))
        assert scores["p"] == pytest.approx(1.5, abs=1e-12)

    def test_random_against_loop_oracle(self):
        rng = np.random.default_rng(21)
        # 5 neighbour synsets over 8 candidate hypernyms (h0..h7)
        nodes = [(f"h{i}", f"hyp{i}") for i in range(8)] + [(f"n{i}", f"nb{i}") for i in range(5)]
        edges = [("h0", "h5"), ("h1", "h5"), ("h1", "h6"), ("h2", "h7"), ("h3", "h7"), ("h4", "h6")]
        parents = {}
        for i in range(5):
            for p in rng.choice(5, size=rng.integers(1, 3), replace=False):
                edges.append((f"n{i}", f"h{p}"))
                parents.setdefault(f"n{i}", []).append(f"h{p}")
        vectors = {f"nb{i}": rng.normal(size=6).tolist() for i in range(5)}
        vectors["query"] = rng.normal(size=6).tolist()
        ctx = ctx_for(nodes, edges, vectors, POS_WEIGHTED_MEAN)
        grand = {n: set(ctx.graph.second_order_hypernyms(n)) for n in parents}
        expected = neighbor_score_oracle(vectors["query"], [(f"n{i}", vectors[f"nb{i}"]) for i in range(5)],
                                         parents, grand)
        got = neighbor_scores("query", ctx, NeighborScoreParams(neighbor_count=5))
        assert set(got) == set(expected)
        for c in expected:
            assert abs(got[c] - expected[c]) < 1e-9
        pred = neighbor_score_predict("query", ctx, NeighborScoreParams(neighbor_count=5))
        assert list(pred.candidates) == sorted(expected, key=lambda c: (-expected[c], c))[:10]

    def test_zero_decay_scale_invariant(self):
        g = random_taxonomy(40, seed=3)
        rng = np.random.default_rng(3)
        base = {s: rng.normal(size=5) for s in g.lemma_inventory()}
        base["query"] = rng.normal(size=5)
        params = NeighborScoreParams(decay=0.0, neighbor_count=15)
        rankings = []
        for scale in (1.0, 7.5):
            store = EmbeddingStore.from_dict({k: (v * scale).tolist() for k, v in base.items()})
            ctx = TaxonomyEmbedding(g, store, "noun", POS_WEIGHTED_MEAN)
            rankings.append(neighbor_score_predict("query", ctx, params).candidates)
        assert rankings[0] == rankings[1]

    def test_params_validated(self):
        with pytest.raises(ValueError):
            NeighborScoreParams(sim_power=0)
        with pytest.raises(ValueError):
            NeighborScoreParams(second_order_discount=0)


class TestVote:
    def test_shared_parent(self):
        nodes = [("p", "nope")] + [(f"x{i}", f"x{i}w") for i in range(3)]
        vectors = {f"x{i}w": [1.0, 0.1 * i] for i in range(3)}
        vectors["q"] = [1.0, 0.0]
        ctx = ctx_for(nodes, [(f"x{i}", "p") for i in range(3)], vectors)
        assert hypernym_vote_predict("q", ctx, neighbor_count=3).candidates == ("p",)

    def test_tie_rule(self):
        nodes = [("r", "nor"), ("q", "noq"), ("p", "nop"), ("n1", "one"), ("n2", "two"), ("n3", "three")]
        edges = [("n1", "p"), ("n1", "q"), ("n2", "p"), ("n2", "r"), ("n3", "p"), ("n3", "q"), ("n3", "r")]
        vectors = {"one": [1.0, 0.0], "two": [1.0, 0.3], "three": [1.0, 0.6], "orphan": [1.0, 0.0]}
        ctx = ctx_for(nodes, edges, vectors)
        # counts p:3, q:2, r:2; q first seen at rank 0, r at rank 1
        assert hypernym_vote_predict("orphan", ctx, neighbor_count=3).candidates == ("p", "q", "r")

    def test_random_against_counting_oracle(self):
        g = random_taxonomy(80, seed=12, max_parents=3)
        rng = np.random.default_rng(12)
        vectors = {s: rng.normal(size=8).tolist() for s in g.lemma_inventory()}
        vectors["orphan"] = rng.normal(size=8).tolist()
        ctx = TaxonomyEmbedding(g, EmbeddingStore.from_dict(vectors), "noun")
        neighbours = [s for s, _ in ctx.nearest(np.array(vectors["orphan"]), 10)]
        parents = {s: g.hypernyms(s) for s in neighbours}
        grand = {s: g.second_order_hypernyms(s) for s in neighbours}
        expected = vote_oracle(neighbours, parents, grand)
        assert list(hypernym_vote_predict("orphan", ctx).candidates) == expected


class TestFeatureRank:
    def test_all_three_features(self):
        nodes = [("c", "cw"), ("b", "bw"), ("a", "aw")]
        vectors = {"cw": [1.0, 0.0], "bw": [0.9, 0.1], "aw": [0.8, 0.2], "orphan": [1.0, 0.0]}
        ctx = ctx_for(nodes, [("a", "b"), ("b", "c")], vectors)
        pred = feature_rank_predict("orphan", ctx, weights=(1.0, 1.0, 1.0))
        assert pred.meta["scores"]["c"] == 3.0
        assert pred.candidates[0] == "c"

    def test_zero_weights_use_tie_order(self):
        nodes = [("c", "cw"), ("b", "bw"), ("a", "aw"), ("z", "nothing")]
        vectors = {"cw": [1.0, 0.0], "bw": [0.9, 0.1], "aw": [0.8, 0.2], "orphan": [0.8, 0.2]}
        ctx = ctx_for(nodes, [("a", "z"), ("b", "z"), ("c", "z")], vectors)
        pred = feature_rank_predict("orphan", ctx, weights=(0.0, 0.0, 0.0))
        # neighbour ranks: a 0, b 1, c 2; z is first reached at rank 0 and sorts after a by id
        assert pred.candidates == ("a", "z", "b", "c")

    def test_random_against_set_membership(self):
        g = random_taxonomy(70, seed=8, max_parents=3)
        rng = np.random.default_rng(8)
        vectors = {s: rng.normal(size=6).tolist() for s in g.lemma_inventory()}
        vectors["orphan"] = rng.normal(size=6).tolist()
        ctx = TaxonomyEmbedding(g, EmbeddingStore.from_dict(vectors), "noun")
        weights = (1.0, 2.0, 1.0)
        top = [s for s, _ in ctx.nearest(np.array(vectors["orphan"]), 10)]
        f1 = set(top)
        f2 = {p for s in top for p in g.hypernyms(s)}
        f3 = {gp for s in top for gp in g.second_order_hypernyms(s)}
        pred = feature_rank_predict("orphan", ctx, weights)
        for cand in f1 | f2 | f3:
            expected = weights[0] * (cand in f1) + weights[1] * (cand in f2) + weights[2] * (cand in f3)
            assert pred.meta["scores"][cand] == expected

    def test_bad_weights(self):
        ctx = ctx_for([("a", "aw")], [], {"aw": [1.0]})
        with pytest.raises(ValueError):
            feature_rank_predict("aw", ctx, weights=(1.0, -1.0, 0.0))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), name=st.sampled_from(PREDICTORS))
def test_every_predictor_yields_valid_deterministic_output(seed, name):
    g = random_taxonomy(60, seed=seed, max_parents=3)
    rng = np.random.default_rng(seed)
    vectors = {s: rng.normal(size=8).tolist() for s in g.lemma_inventory()}
    orphans = ["fresh", "s1", "totally-unknown"]
    vectors["fresh"] = rng.normal(size=8).tolist()
    store = EmbeddingStore.from_dict(vectors)
    train = [(s, p) for sid in g for s in g[sid].senses for p in g.hypernyms(sid)]
    runs = []
    for _ in range(2):
        predict = make_predictor(name, g, store, "noun", {"max_epochs": 5, "hidden_dim": 16} if name == "classifier" else {},
                                 train=train, seed=seed)
        runs.append([predict(o) for o in orphans])
    assert runs[0] == runs[1]
    for pred in runs[0]:
        assert len(pred.candidates) <= 10
        assert len(set(pred.candidates)) == len(pred.candidates)
        pred.check_pos(g, "noun")


def test_unknown_predictor():
    g = random_taxonomy(5)
    with pytest.raises(KeyError, match="unknown predictor"):
        make_predictor("magic", g, EmbeddingStore.from_dict({"s0": [1.0]}), "noun")


def test_sanity_math():
    # hand-trace cosines quoted in TestBaseline
    swan = np.array([0.5, 0.9, 0.0])
    for vec, expected in (([0.6, 0.8, 0.0], 0.991), ([0.1, 1.0, 0.0], 0.918), ([0.0, 1.0, 0.2], 0.857)):
        v = np.array(vec)
        assert math.isclose(swan @ v / np.linalg.norm(swan) / np.linalg.norm(v), expected, abs_tol=1e-3)
