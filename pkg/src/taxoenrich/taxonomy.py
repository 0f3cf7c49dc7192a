"""Synset graph: loading, validation and hypernym queries.

The on-disk format is a UTF-8 TSV with two record kinds::

    S<TAB>synset_id<TAB>pos<TAB>title<TAB>lemma1|lemma2|...
    H<TAB>child_id<TAB>parent_id

Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import hashlib
import io
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, TextIO

NOUN = "noun"
VERB = "verb"
PARTS_OF_SPEECH = (NOUN, VERB)

_POS_SUFFIX = {"N": NOUN, "V": VERB}


class TaxonomyError(ValueError):
    """Raised for malformed or inconsistent taxonomy data."""

    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


def pos_from_id(synset_id: str) -> str | None:
    """Part of speech encoded in the id suffix (``147272-N`` -> noun), if any."""
    head, sep, tail = synset_id.rpartition("-")
    if not sep or not head:
        return None
    return _POS_SUFFIX.get(tail.upper())


@dataclass(frozen=True)
class Synset:
    id: str
    pos: str
    title: str
    senses: tuple[str, ...]

    def __post_init__(self):
        if not self.id:
            raise TaxonomyError("empty synset id")
        if self.pos not in PARTS_OF_SPEECH:
            raise TaxonomyError(f"{self.id}: unknown part of speech {self.pos!r}")
        implied = pos_from_id(self.id)
        if implied is not None and implied != self.pos:
            raise TaxonomyError(f"{self.id}: pos {self.pos!r} contradicts id suffix")
        senses = tuple(dict.fromkeys(s.strip().lower() for s in self.senses if s.strip()))
        if not senses:
            raise TaxonomyError(f"{self.id}: synset has no senses")
        object.__setattr__(self, "senses", senses)


class TaxonomyGraph:
    """Immutable DAG of synsets linked by hypernym edges.

    Adjacency keeps load order. Depths are computed once at construction
    with a multi-source BFS from the roots.
    """

    def __init__(self, synsets: Iterable[Synset], edges: Iterable[tuple[str, str]]):
        self._synsets: dict[str, Synset] = {}
        for synset in synsets:
            if synset.id in self._synsets:
                raise TaxonomyError(f"duplicate synset id {synset.id}")
            self._synsets[synset.id] = synset

        hypernyms: dict[str, list[str]] = {sid: [] for sid in self._synsets}
        hyponyms: dict[str, list[str]] = {sid: [] for sid in self._synsets}
        seen = set()
        for child, parent in edges:
            for end in (child, parent):
                if end not in self._synsets:
                    raise TaxonomyError(f"edge {child} -> {parent}: unknown synset {end}")
            if (child, parent) in seen:
                raise TaxonomyError(f"duplicate edge {child} -> {parent}")
            if self._synsets[child].pos != self._synsets[parent].pos:
                raise TaxonomyError(f"edge {child} -> {parent} crosses part of speech")
            seen.add((child, parent))
            hypernyms[child].append(parent)
            hyponyms[parent].append(child)

        self._hypernyms = {k: tuple(v) for k, v in hypernyms.items()}
        self._hyponyms = {k: tuple(v) for k, v in hyponyms.items()}
        cycle = self._find_cycle()
        if cycle:
            raise TaxonomyError("hypernym cycle: " + " -> ".join(cycle))
        self._depth = self._compute_depths()

    # construction helpers

    def _find_cycle(self) -> list[str] | None:
        white, grey, black = 0, 1, 2
        colour = dict.fromkeys(self._synsets, white)
        for start in self._synsets:
            if colour[start] != white:
                continue
            path = [start]
            iters = [iter(self._hypernyms[start])]
            colour[start] = grey
            while iters:
                nxt = next(iters[-1], None)
                if nxt is None:
                    colour[path.pop()] = black
                    iters.pop()
                elif colour[nxt] == grey:
                    return path[path.index(nxt):] + [nxt]
                elif colour[nxt] == white:
                    colour[nxt] = grey
                    path.append(nxt)
                    iters.append(iter(self._hypernyms[nxt]))
        return None

    def _compute_depths(self) -> dict[str, int]:
        depth = {sid: 0 for sid, parents in self._hypernyms.items() if not parents}
        queue = deque(depth)
        while queue:
            node = queue.popleft()
            for child in self._hyponyms[node]:
                if child not in depth:
                    depth[child] = depth[node] + 1
                    queue.append(child)
        return depth

    def _check(self, synset_id: str) -> None:
        if synset_id not in self._synsets:
            raise KeyError(f"unknown synset id {synset_id!r}")

    # queries

    def __contains__(self, synset_id: object) -> bool:
        return synset_id in self._synsets

    def __len__(self) -> int:
        return len(self._synsets)

    def __iter__(self) -> Iterator[str]:
        return iter(self._synsets)

    def __getitem__(self, synset_id: str) -> Synset:
        self._check(synset_id)
        return self._synsets[synset_id]

    @property
    def synsets(self) -> Mapping[str, Synset]:
        return dict(self._synsets)

    def edges(self) -> Iterator[tuple[str, str]]:
        for child, parents in self._hypernyms.items():
            for parent in parents:
                yield child, parent

    def hypernyms(self, synset_id: str) -> tuple[str, ...]:
        """Direct parents of ``synset_id`` in load order."""
        self._check(synset_id)
        return self._hypernyms[synset_id]

    def hyponyms(self, synset_id: str) -> tuple[str, ...]:
        self._check(synset_id)
        return self._hyponyms[synset_id]

    def second_order_hypernyms(self, synset_id: str) -> tuple[str, ...]:
        """Union of the parents of each direct parent, in first-seen order.

        A synset that is both a parent and a grandparent is kept here too.
        """
        out: dict[str, None] = {}
        for parent in self.hypernyms(synset_id):
            for grand in self._hypernyms[parent]:
                out[grand] = None
        return tuple(out)

    def depth(self, synset_id: str) -> int:
        """Shortest hypernym-path length from ``synset_id`` to any root."""
        self._check(synset_id)
        return self._depth[synset_id]

    def leaves(self, pos: str) -> set[str]:
        return {sid for sid, s in self._synsets.items() if s.pos == pos and not self._hyponyms[sid]}

    def ids(self, pos: str | None = None) -> list[str]:
        return [sid for sid, s in self._synsets.items() if pos is None or s.pos == pos]

    def lemma_inventory(self, pos: str | None = None) -> set[str]:
        return {
            lemma
            for s in self._synsets.values()
            if pos is None or s.pos == pos
            for lemma in s.senses
        }

    def connectivity_components(self, seeds: Iterable[str]) -> list[frozenset[str]]:
        """Split ``seeds`` plus their parents into undirected connected groups.

        The induced subgraph holds every hypernym edge of the graph whose
        endpoints both lie in the node set. Components are ordered by their
        smallest member id.
        """
        nodes: set[str] = set()
        for seed in seeds:
            self._check(seed)
            nodes.add(seed)
            nodes.update(self._hypernyms[seed])

        unvisited = set(nodes)
        components = []
        for start in sorted(nodes):
            if start not in unvisited:
                continue
            unvisited.discard(start)
            stack, members = [start], {start}
            while stack:
                node = stack.pop()
                for nb in self._hypernyms[node] + self._hyponyms[node]:
                    if nb in unvisited:
                        unvisited.discard(nb)
                        members.add(nb)
                        stack.append(nb)
            components.append(frozenset(members))
        return components

    def without(self, removed: Iterable[str]) -> "TaxonomyGraph":
        """Copy of the graph with ``removed`` synsets and incident edges dropped."""
        removed = set(removed)
        for sid in removed:
            self._check(sid)
        return TaxonomyGraph(
            (s for sid, s in self._synsets.items() if sid not in removed),
            ((c, p) for c, p in self.edges() if c not in removed and p not in removed),
        )

    # serialization

    def dump(self, stream: TextIO) -> None:
        for s in self._synsets.values():
            stream.write(f"S\t{s.id}\t{s.pos}\t{s.title}\t{'|'.join(s.senses)}\n")
        for child, parent in self.edges():
            stream.write(f"H\t{child}\t{parent}\n")

    def dumps(self) -> str:
        buf = io.StringIO()
        self.dump(buf)
        return buf.getvalue()

    def fingerprint(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()[:16]


def load_taxonomy(source: TextIO | Iterable[str]) -> TaxonomyGraph:
    """Parse the taxonomy TSV and return a validated graph."""
    synsets: list[Synset] = []
    edges: list[tuple[str, str]] = []
    seen_ids: set[str] = set()
    seen_edges: dict[tuple[str, str], int] = {}
    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        kind = fields[0]
        if kind == "S":
            if len(fields) != 5:
                raise TaxonomyError(f"S record needs 5 fields, got {len(fields)}", lineno)
            _, sid, pos, title, lemmas = fields
            if sid in seen_ids:
                raise TaxonomyError(f"duplicate synset id {sid}", lineno)
            try:
                synsets.append(Synset(sid, pos, title, tuple(lemmas.split("|"))))
            except TaxonomyError as exc:
                raise TaxonomyError(str(exc), lineno) from None
            seen_ids.add(sid)
        elif kind == "H":
            if len(fields) != 3:
                raise TaxonomyError(f"H record needs 3 fields, got {len(fields)}", lineno)
            edge = (fields[1], fields[2])
            if edge in seen_edges:
                raise TaxonomyError(f"duplicate edge {edge[0]} -> {edge[1]}", lineno)
            seen_edges[edge] = lineno
            edges.append(edge)
        else:
            raise TaxonomyError(f"unknown record kind {kind!r}", lineno)
    for edge, lineno in seen_edges.items():
        for end in edge:
            if end not in seen_ids:
                raise TaxonomyError(f"edge {edge[0]} -> {edge[1]}: unknown synset {end}", lineno)
    return TaxonomyGraph(synsets, edges)


def loads_taxonomy(text: str) -> TaxonomyGraph:
    return load_taxonomy(io.StringIO(text))


def build_taxonomy(
    synsets: Sequence[tuple[str, str, Sequence[str]]] | Sequence[Synset],
    edges: Iterable[tuple[str, str]],
    pos: str = NOUN,
) -> TaxonomyGraph:
    """Convenience constructor from ``(id, title, senses)`` triples."""
    nodes = [
        s if isinstance(s, Synset) else Synset(s[0], pos, s[1], tuple(s[2]))
        for s in synsets
    ]
    return TaxonomyGraph(nodes, edges)
