"""Gold-standard synthesis by leaf hold-out, orphan filtering, splits and file formats.

File layouts (UTF-8, tab separated, LF):

* submission: ``orphan  rank  synset_id``, ranks 1..n contiguous per orphan
* gold: ``orphan  component_index  synset_id``, indices from 0; optional
  leading ``# key=value`` metadata comments (``pos``, ``taxonomy``)
* train: ``lemma  hypernym_id``, one line per pair
* frequencies: ``lemma  count``
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Collection, Iterable, Mapping, Sequence, TextIO

from .taxonomy import TaxonomyGraph, pos_from_id

log = logging.getLogger(__name__)

MAX_CANDIDATES = 10


class FormatError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True)
class GoldEntry:
    orphan: str
    pos: str | None
    components: tuple[frozenset[str], ...]

    def __post_init__(self):
        comps = tuple(frozenset(c) for c in self.components)
        if not comps or not all(comps):
            raise ValueError(f"{self.orphan}: components must be non-empty")
        seen: set[str] = set()
        for comp in comps:
            if seen & comp:
                raise ValueError(f"{self.orphan}: components overlap")
            seen |= comp
        object.__setattr__(self, "components", comps)

    def synsets(self) -> frozenset[str]:
        return frozenset().union(*self.components)


@dataclass
class GoldStandard:
    entries: dict[str, GoldEntry]
    taxonomy: str | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def subset(self, orphans: Iterable[str]) -> "GoldStandard":
        return GoldStandard({o: self.entries[o] for o in orphans}, self.taxonomy)


# training data and hold-out synthesis

def build_train_set(g: TaxonomyGraph, pos: str, min_depth: int = 5) -> list[tuple[str, tuple[str, ...]]]:
    """Every sense lemma of each deep leaf, paired with the leaf's direct hypernyms."""
    if min_depth < 0:
        raise ValueError("min_depth must be non-negative")
    leaves = g.leaves(pos)
    rows = []
    for sid in g.ids(pos):
        if sid in leaves and g.depth(sid) >= min_depth and g.hypernyms(sid):
            rows.extend((lemma, g.hypernyms(sid)) for lemma in g[sid].senses)
    return rows


def train_pairs(rows: Iterable[tuple[str, Sequence[str]]]) -> list[tuple[str, str]]:
    return [(lemma, hyp) for lemma, hyps in rows for hyp in hyps]


def sample_holdout(g: TaxonomyGraph, pos: str, fraction: float, seed: int) -> set[str]:
    """Seeded sample of ``round(fraction * |leaves|)`` leaves of ``pos``."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("holdout fraction must be in (0, 1)")
    leaves = sorted(g.leaves(pos))
    n = int(Fraction(fraction).limit_denominator(10**6) * len(leaves) + Fraction(1, 2))
    return set(random.Random(seed).sample(leaves, n))


def nearest_surviving_ancestors(g: TaxonomyGraph, synset_id: str, removed: Collection[str]) -> list[str]:
    """Closest ancestors of ``synset_id`` not in ``removed``; all ties are kept.

    The search walks upward through removed synsets only.
    """
    frontier = [synset_id]
    visited = {synset_id}
    while frontier:
        survivors, nxt = set(), []
        for node in frontier:
            for parent in g.hypernyms(node):
                if parent in visited:
                    continue
                visited.add(parent)
                if parent in removed:
                    nxt.append(parent)
                else:
                    survivors.add(parent)
        if survivors:
            return sorted(survivors)
        frontier = nxt
    return []


def synthesize_gold(
    g: TaxonomyGraph, pos: str, holdout: Collection[str]
) -> tuple[TaxonomyGraph, GoldStandard]:
    """Remove ``holdout`` leaves and turn their lemmas into orphans.

    A lemma that still names some surviving synset is not an orphan. A
    lemma shared by several held-out synsets gets the union of their seeds,
    which is how a multi-sense orphan ends up with several components.
    """
    holdout = set(holdout)
    not_leaves = holdout - g.leaves(pos)
    if not_leaves:
        raise ValueError(f"holdout contains non-leaf or wrong-pos synsets: {sorted(not_leaves)[:5]}")
    pruned = g.without(holdout)
    if not pruned.ids(pos):
        raise ValueError(f"holdout removes every {pos} synset")

    surviving = pruned.lemma_inventory()
    seeds: dict[str, dict[str, None]] = {}
    for sid in sorted(holdout):
        anchors = nearest_surviving_ancestors(g, sid, holdout)
        if not anchors:
            continue
        for lemma in g[sid].senses:
            if lemma not in surviving:
                seeds.setdefault(lemma, {}).update(dict.fromkeys(anchors))

    entries = {
        lemma: GoldEntry(lemma, pos, tuple(pruned.connectivity_components(anchors)))
        for lemma, anchors in seeds.items()
    }
    return pruned, GoldStandard(entries, pruned.fingerprint())


# orphan filtering

REASON_FREQUENCY = "frequency"
REASON_LENGTH = "length"
REASON_SUBSTRING = "substring"


@dataclass
class FilterConfig:
    min_frequency: int = 50
    min_length: int = 4
    keep_four_char: bool = True
    exclusion_files: list[str] = field(default_factory=list)

    @classmethod
    def parse(cls, source: TextIO | Iterable[str]) -> "FilterConfig":
        cfg = cls()
        for lineno, raw in enumerate(source, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep:
                raise FormatError(f"expected key=value, got {line!r}", lineno)
            if key == "min_frequency":
                cfg.min_frequency = int(value)
            elif key == "min_length":
                cfg.min_length = int(value)
            elif key == "keep_four_char":
                if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise FormatError(f"bad boolean {value!r}", lineno)
                cfg.keep_four_char = value.lower() in ("true", "1", "yes")
            elif key in ("exclusion_files", "exclusion"):
                cfg.exclusion_files.extend(p.strip() for p in value.split(",") if p.strip())
            else:
                raise FormatError(f"unknown filter option {key!r}", lineno)
        return cfg

    def load_exclusions(self, base: Path | None = None) -> dict[str, frozenset[str]]:
        lists = {}
        for name in self.exclusion_files:
            path = Path(name)
            if base is not None and not path.is_absolute():
                path = base / path
            with open(path, encoding="utf-8") as fh:
                lists[path.stem] = frozenset(w.strip().lower() for w in fh if w.strip())
        return lists


@dataclass
class FilterResult:
    accepted: list[str]
    rejected: dict[str, str]


def filter_orphans(
    candidates: Iterable[str],
    freq: Mapping[str, int],
    g: TaxonomyGraph,
    rules: FilterConfig | None = None,
    hypernyms: Mapping[str, Iterable[str]] | None = None,
    exclusions: Mapping[str, Collection[str]] | None = None,
) -> FilterResult:
    """Apply frequency, length, exclusion-list and substring rules, in that order.

    ``hypernyms`` maps a candidate to its gold hypernym synsets; their
    sense lemmas drive the substring rule. Each rejection records the
    first rule that fired.
    """
    rules = rules or FilterConfig()
    if exclusions is None:
        exclusions = rules.load_exclusions()
    hypernyms = hypernyms or {}
    min_length = rules.min_length if rules.keep_four_char else max(rules.min_length, 5)
    accepted, rejected = [], {}
    for lemma in candidates:
        reason = None
        if freq.get(lemma, 0) < rules.min_frequency:
            reason = REASON_FREQUENCY
        elif len(lemma) < min_length:
            reason = REASON_LENGTH
        else:
            for name, words in exclusions.items():
                if lemma in words:
                    reason = f"exclusion:{name}"
                    break
        if reason is None:
            for sid in hypernyms.get(lemma, ()):
                if sid in g and any(h != lemma and h in lemma for h in g[sid].senses):
                    reason = REASON_SUBSTRING
                    break
        if reason is None:
            accepted.append(lemma)
        else:
            rejected[lemma] = reason
    return FilterResult(accepted, rejected)


def split_public_private(
    gold: GoldStandard, ratio: Fraction | float = Fraction(1, 3), seed: int = 0
) -> tuple[GoldStandard, GoldStandard]:
    """Seeded shuffle, then the first ``round(ratio * N)`` orphans go public.

    Both halves keep the input's entry order.
    """
    ratio = Fraction(ratio).limit_denominator(10**6)
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    n = len(gold.entries)
    if n < 2:
        raise ValueError("need at least two gold entries to split")
    orphans = sorted(gold.entries)
    random.Random(seed).shuffle(orphans)
    public = set(orphans[: int(ratio * n + Fraction(1, 2))])
    return (
        gold.subset(o for o in gold.entries if o in public),
        gold.subset(o for o in gold.entries if o not in public),
    )


# file formats

def _fields(raw: str, n: int, lineno: int) -> list[str]:
    fields = raw.rstrip("\n").rstrip("\r").split("\t")
    if len(fields) != n:
        raise FormatError(f"expected {n} tab-separated fields, got {len(fields)}", lineno)
    return fields


def _unknown(sid: str, orphan: str, lineno: int, strict: bool) -> None:
    msg = f"line {lineno}: unknown synset id {sid!r} for {orphan!r}"
    if strict:
        raise FormatError(msg)
    log.warning(msg + ", skipped")


def read_submission(
    stream: TextIO | Iterable[str],
    known_ids: Collection[str] | None = None,
    strict: bool = False,
) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    current, expected_rank = None, 1
    for lineno, raw in enumerate(stream, 1):
        if not raw.strip():
            continue
        orphan, rank, sid = _fields(raw, 3, lineno)
        if orphan != current:
            if orphan in out:
                raise FormatError(f"duplicate orphan block {orphan!r}", lineno)
            out[orphan] = []
            current, expected_rank = orphan, 1
        try:
            rank_value = int(rank)
        except ValueError:
            raise FormatError(f"rank {rank!r} is not an integer", lineno) from None
        if rank_value != expected_rank:
            raise FormatError(f"{orphan!r}: expected rank {expected_rank}, got {rank}", lineno)
        expected_rank += 1
        if rank_value > MAX_CANDIDATES:
            raise FormatError(f"{orphan!r}: more than {MAX_CANDIDATES} candidates", lineno)
        if sid in out[orphan]:
            raise FormatError(f"{orphan!r}: duplicate candidate {sid}", lineno)
        if known_ids is not None and sid not in known_ids:
            _unknown(sid, orphan, lineno, strict)
            continue
        out[orphan].append(sid)
    return out


def write_submission(submission: Mapping[str, Sequence[str]], stream: TextIO) -> None:
    for orphan, ranked in submission.items():
        if len(ranked) > MAX_CANDIDATES:
            raise ValueError(f"{orphan!r}: more than {MAX_CANDIDATES} candidates")
        if len(set(ranked)) != len(ranked):
            raise ValueError(f"{orphan!r}: duplicate candidates")
        for rank, sid in enumerate(ranked, 1):
            stream.write(f"{orphan}\t{rank}\t{sid}\n")


def read_gold(
    stream: TextIO | Iterable[str],
    taxonomy: TaxonomyGraph | None = None,
    pos: str | None = None,
) -> GoldStandard:
    meta: dict[str, str] = {}
    comps: dict[str, list[list[str]]] = {}
    current = None
    for lineno, raw in enumerate(stream, 1):
        if not raw.strip():
            continue
        if raw.startswith("#"):
            key, sep, value = raw[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        orphan, index, sid = _fields(raw, 3, lineno)
        if orphan != current:
            if orphan in comps:
                raise FormatError(f"duplicate orphan block {orphan!r}", lineno)
            comps[orphan] = []
            current = orphan
        try:
            idx = int(index)
        except ValueError:
            raise FormatError(f"component index {index!r} is not an integer", lineno) from None
        groups = comps[orphan]
        if idx == len(groups):
            groups.append([])
        elif idx != len(groups) - 1:
            raise FormatError(f"{orphan!r}: component index {idx} out of sequence", lineno)
        if any(sid in g for g in groups):
            raise FormatError(f"{orphan!r}: synset {sid} listed twice", lineno)
        if taxonomy is not None and sid not in taxonomy:
            raise FormatError(f"{orphan!r}: unknown synset {sid}", lineno)
        groups[idx].append(sid)

    pos = pos or meta.get("pos")
    entries = {}
    for orphan, groups in comps.items():
        first = groups[0][0]
        entry_pos = pos or (taxonomy[first].pos if taxonomy is not None else pos_from_id(first))
        if taxonomy is not None and entry_pos is not None:
            bad = [s for g in groups for s in g if taxonomy[s].pos != entry_pos]
            if bad:
                raise FormatError(f"{orphan!r}: synsets {bad} do not match pos {entry_pos}")
        entries[orphan] = GoldEntry(orphan, entry_pos, tuple(frozenset(g) for g in groups))
    return GoldStandard(entries, meta.get("taxonomy"))


def write_gold(gold: GoldStandard, stream: TextIO) -> None:
    kinds = {e.pos for e in gold.entries.values()}
    if len(kinds) == 1 and None not in kinds:
        stream.write(f"# pos={kinds.pop()}\n")
    if gold.taxonomy:
        stream.write(f"# taxonomy={gold.taxonomy}\n")
    for orphan, entry in gold.entries.items():
        for idx, comp in enumerate(entry.components):
            for sid in sorted(comp):
                stream.write(f"{orphan}\t{idx}\t{sid}\n")


def read_train(stream: TextIO | Iterable[str]) -> list[tuple[str, str]]:
    pairs = []
    for lineno, raw in enumerate(stream, 1):
        if raw.strip():
            lemma, sid = _fields(raw, 2, lineno)
            pairs.append((lemma, sid))
    return pairs


def write_train(rows: Iterable[tuple[str, Sequence[str]]], stream: TextIO) -> None:
    for lemma, sid in train_pairs(rows):
        stream.write(f"{lemma}\t{sid}\n")


def read_frequencies(stream: TextIO | Iterable[str]) -> dict[str, int]:
    freq = {}
    for lineno, raw in enumerate(stream, 1):
        if not raw.strip():
            continue
        lemma, count = _fields(raw, 2, lineno)
        try:
            value = int(count)
        except ValueError:
            raise FormatError(f"count {count!r} is not an integer", lineno) from None
        if value < 0:
            raise FormatError("counts must be non-negative", lineno)
        freq[lemma] = value
    return freq
