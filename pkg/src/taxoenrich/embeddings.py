"""Word vectors, synset vectors and exact cosine kNN."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Collection, Iterable, Mapping, NamedTuple, Sequence, TextIO

import numpy as np

from .taxonomy import NOUN, Synset, TaxonomyGraph

UNIFORM_MEAN = "uniform_mean"
POS_WEIGHTED_MEAN = "pos_weighted_mean"
SCHEMES = (UNIFORM_MEAN, POS_WEIGHTED_MEAN)

MIN_PREFIX = 3

NOUN_WEIGHT = 1.0
FUNCTION_WORD_WEIGHT = 0.1
OTHER_WEIGHT = 0.5


class VectorFormatError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class Embedded(NamedTuple):
    vector: np.ndarray
    degenerate: bool


class EmbeddingStore:
    """Token -> dense vector table with cached norms.

    Lookups never mutate the store.
    """

    def __init__(self, tokens: Sequence[str], matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(tokens):
            raise ValueError("matrix must have one row per token")
        if matrix.shape[1] < 1:
            raise ValueError("dimension must be positive")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("vectors must be finite")
        self.tokens = tuple(tokens)
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate tokens")
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.norms = np.linalg.norm(matrix, axis=1)
        self.norms.setflags(write=False)
        self._sorted = sorted(self.tokens)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: object) -> bool:
        return token in self.index

    def __getitem__(self, token: str) -> np.ndarray:
        return self.matrix[self.index[token]]

    @classmethod
    def from_dict(cls, vectors: Mapping[str, Sequence[float]]) -> "EmbeddingStore":
        tokens = list(vectors)
        return cls(tokens, np.array([vectors[t] for t in tokens], dtype=np.float64))

    def prefix_cohort(self, token: str) -> list[str]:
        """Vocabulary words sharing the longest (>= 3 chars) common prefix with ``token``."""
        for length in range(len(token), MIN_PREFIX - 1, -1):
            prefix = token[:length]
            lo = bisect.bisect_left(self._sorted, prefix)
            hi = lo
            while hi < len(self._sorted) and self._sorted[hi].startswith(prefix):
                hi += 1
            if hi > lo:
                return self._sorted[lo:hi]
        return []

    def word_vector(self, token: str) -> Embedded:
        """Stored vector, else the mean of the longest-prefix cohort, else zeros."""
        row = self.index.get(token)
        if row is not None:
            return Embedded(self.matrix[row].copy(), False)
        cohort = self.prefix_cohort(token)
        if not cohort:
            return Embedded(np.zeros(self.dim), True)
        rows = [self.index[t] for t in cohort]
        return Embedded(self.matrix[rows].mean(axis=0), False)

    def phrase_vector(self, lemmas: Sequence[str]) -> Embedded:
        if not lemmas:
            raise ValueError("phrase needs at least one token")
        parts = [self.word_vector(t) for t in lemmas]
        vec = np.mean([p.vector for p in parts], axis=0)
        return Embedded(vec, all(p.degenerate for p in parts))

    def dump(self, stream: TextIO) -> None:
        stream.write(f"{len(self.tokens)} {self.dim}\n")
        for tok, row in zip(self.tokens, self.matrix):
            stream.write(tok + " " + " ".join(repr(float(x)) for x in row) + "\n")


def load_vectors(source: TextIO | Iterable[str]) -> EmbeddingStore:
    """Read the ``N dim`` header + ``token v1 ... v_dim`` text format."""
    lines = iter(source)
    try:
        header = next(lines)
    except StopIteration:
        raise VectorFormatError("empty vector file", 1) from None
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise VectorFormatError(f"bad header {header.strip()!r}", 1)
    count, dim = int(parts[0]), int(parts[1])
    if dim < 1:
        raise VectorFormatError("dimension must be positive", 1)

    tokens: list[str] = []
    seen: set[str] = set()
    matrix = np.empty((count, dim), dtype=np.float64)
    for lineno, raw in enumerate(lines, 2):
        fields = raw.rstrip("\n").rstrip("\r").split(" ")
        if fields == [""]:
            continue
        if len(tokens) == count:
            raise VectorFormatError(f"more rows than the header's {count}", lineno)
        if len(fields) != dim + 1:
            raise VectorFormatError(f"expected {dim} values, got {len(fields) - 1}", lineno)
        tok = fields[0]
        if tok in seen:
            raise VectorFormatError(f"duplicate token {tok!r}", lineno)
        try:
            values = [float(x) for x in fields[1:]]
        except ValueError:
            raise VectorFormatError("unparseable value", lineno) from None
        if not all(math.isfinite(v) for v in values):
            raise VectorFormatError(f"non-finite value for {tok!r}", lineno)
        matrix[len(tokens)] = values
        tokens.append(tok)
        seen.add(tok)
    if len(tokens) != count:
        raise VectorFormatError(f"header promises {count} rows, found {len(tokens)}")
    return EmbeddingStore(tokens, matrix)


def load_function_words(source: TextIO | Iterable[str]) -> frozenset[str]:
    return frozenset(line.strip().lower() for line in source if line.strip())


@dataclass(frozen=True)
class SynsetVector:
    synset: str
    vector: np.ndarray
    scheme: str
    degenerate: bool = False


def word_weight(
    token: str,
    pos: str,
    function_words: Collection[str],
    modifier_words: Collection[str] = (),
) -> float:
    """Weight of one word inside a synset's weighted mean.

    Function words get 0.1. Words in a noun synset count as nouns (1.0)
    unless listed in ``modifier_words``; everything else gets 0.5.
    """
    if token in function_words:
        return FUNCTION_WORD_WEIGHT
    if pos == NOUN and token not in modifier_words:
        return NOUN_WEIGHT
    return OTHER_WEIGHT


def synset_vector(
    store: EmbeddingStore,
    synset: Synset,
    scheme: str = UNIFORM_MEAN,
    function_words: Collection[str] = frozenset(),
    modifier_words: Collection[str] = frozenset(),
) -> SynsetVector:
    if not synset.senses:
        raise ValueError(f"{synset.id}: no senses")
    if scheme == UNIFORM_MEAN:
        parts = [store.phrase_vector(lemma.split()) for lemma in synset.senses]
        vec = np.mean([p.vector for p in parts], axis=0)
        degenerate = all(p.degenerate for p in parts) or not np.any(vec)
        return SynsetVector(synset.id, vec, scheme, degenerate)
    if scheme == POS_WEIGHTED_MEAN:
        words = [w for lemma in synset.senses for w in lemma.split()]
        embedded = [store.word_vector(w) for w in words]
        weights = np.array([word_weight(w, synset.pos, function_words, modifier_words) for w in words])
        vec = weights @ np.array([e.vector for e in embedded]) / weights.sum()
        norm = np.linalg.norm(vec)
        if all(e.degenerate for e in embedded) or norm == 0.0:
            return SynsetVector(synset.id, np.zeros(store.dim), scheme, True)
        return SynsetVector(synset.id, vec / norm, scheme, False)
    raise ValueError(f"unknown scheme {scheme!r}")


class SynsetIndex:
    """Dense matrix of unit synset vectors for exact cosine search.

    Rows are sorted by synset id so a stable sort on score breaks ties
    lexicographically. Zero-norm vectors are excluded.
    """

    def __init__(self, vectors: Mapping[str, SynsetVector]):
        self.vectors = dict(vectors)
        usable = sorted(
            sid for sid, sv in vectors.items()
            if not sv.degenerate and np.linalg.norm(sv.vector) > 0.0
        )
        self.ids = tuple(usable)
        self.row = {sid: i for i, sid in enumerate(usable)}
        if usable:
            mat = np.array([vectors[sid].vector for sid in usable], dtype=np.float64)
            self.unit = mat / np.linalg.norm(mat, axis=1, keepdims=True)
        else:
            self.unit = np.zeros((0, 0))

    def __len__(self) -> int:
        return len(self.ids)

    def unit_vector(self, synset_id: str) -> np.ndarray:
        return self.unit[self.row[synset_id]]

    def search(self, query: np.ndarray, k: int) -> list[tuple[str, float]]:
        if k < 1:
            raise ValueError("k must be positive")
        norm = np.linalg.norm(query)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("degenerate query vector")
        if not self.ids:
            return []
        scores = self.unit @ (np.asarray(query, dtype=np.float64) / norm)
        order = np.argsort(-scores, kind="stable")[:k]
        return [(self.ids[i], float(scores[i])) for i in order]


class TaxonomyEmbedding:
    """Synset vectors of one part of speech, bundled with their graph and store."""

    def __init__(
        self,
        graph: TaxonomyGraph,
        store: EmbeddingStore,
        pos: str,
        scheme: str = UNIFORM_MEAN,
        function_words: Collection[str] = frozenset(),
        modifier_words: Collection[str] = frozenset(),
    ):
        self.graph = graph
        self.store = store
        self.pos = pos
        self.scheme = scheme
        self.index = SynsetIndex({
            sid: synset_vector(store, graph[sid], scheme, function_words, modifier_words)
            for sid in graph.ids(pos)
        })

    def embed(self, orphan: str) -> Embedded:
        return self.store.phrase_vector(orphan.lower().split())

    def nearest(self, query: np.ndarray, k: int) -> list[tuple[str, float]]:
        return self.index.search(query, k)


def knn(query: np.ndarray, candidates: Mapping[str, SynsetVector], k: int) -> list[tuple[str, float]]:
    """Top-``k`` candidates by cosine similarity, ties by id."""
    return SynsetIndex(candidates).search(query, k)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for a zero vector")
    return float(np.dot(u, v) / (nu * nv))
