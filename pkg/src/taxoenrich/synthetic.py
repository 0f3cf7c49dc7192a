"""Synthetic taxonomies and planted-geometry embeddings for tests and demos."""
from __future__ import annotations

import numpy as np

from .embeddings import EmbeddingStore
from .taxonomy import NOUN, Synset, TaxonomyGraph

_SUFFIX = {"noun": "N", "verb": "V"}


def synset_id(i: int, pos: str = NOUN) -> str:
    return f"{i:05d}-{_SUFFIX[pos]}"


def random_taxonomy(
    n: int, seed: int = 0, pos: str = NOUN, max_parents: int = 2, roots: int = 1
) -> TaxonomyGraph:
    """Random DAG: node ``i`` draws 1..max_parents parents among nodes ``< i``."""
    rng = np.random.default_rng(seed)
    synsets = [Synset(synset_id(i, pos), pos, f"s{i}", (f"s{i}",)) for i in range(n)]
    edges = []
    for i in range(roots, n):
        count = int(rng.integers(1, max_parents + 1))
        parents = rng.choice(i, size=min(count, i), replace=False)
        edges.extend((synset_id(i, pos), synset_id(int(p), pos)) for p in sorted(parents))
    return TaxonomyGraph(synsets, edges)


def planted_taxonomy(
    n_mid: int = 4,
    n_parents: int = 20,
    n_leaves: int = 175,
    dim: int = 32,
    sigma: float = 0.05,
    seed: int = 0,
    pos: str = NOUN,
) -> tuple[TaxonomyGraph, EmbeddingStore]:
    """Three-level tree whose leaf vectors sit near their parent's centre.

    Every internal synset gets a random unit vector. A leaf's vector is its
    parent's vector plus isotropic Gaussian noise of scale ``sigma``. With
    the defaults the tree has exactly 200 synsets.
    """
    rng = np.random.default_rng(seed)
    synsets, edges, vectors = [], [], {}
    counter = iter(range(10**6))

    def add(parent=None, centre=None):
        i = next(counter)
        sid = synset_id(i, pos)
        lemma = f"w{i:05d}"
        synsets.append(Synset(sid, pos, lemma, (lemma,)))
        if parent is not None:
            edges.append((sid, parent))
        if centre is None:
            centre = rng.normal(size=dim)
            centre /= np.linalg.norm(centre)
        vectors[lemma] = centre
        return sid, centre

    root, _ = add()
    mids = [add(root)[0] for _ in range(n_mid)]
    parents = [add(mids[j % n_mid]) for j in range(n_parents)]
    for j in range(n_leaves):
        psid, pvec = parents[j % n_parents]
        add(psid, pvec + rng.normal(scale=sigma, size=dim))
    return TaxonomyGraph(synsets, edges), EmbeddingStore.from_dict(vectors)
