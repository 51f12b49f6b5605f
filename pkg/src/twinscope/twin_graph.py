"""Mutual-citation pairs and the coauthorship graph."""

from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .ingest import Corpus, PaperRecord

UNREACHABLE = math.inf


@dataclass(frozen=True, order=True, slots=True)
class TwinPair:
    first: str
    second: str

    def __post_init__(self):
        if not self.first < self.second:
            raise ValueError(f"twin pair not in canonical order: {self.first!r}, {self.second!r}")

    @classmethod
    def of(cls, a: str, b: str) -> "TwinPair":
        return cls(a, b) if a < b else cls(b, a)

    def __iter__(self):
        yield self.first
        yield self.second


@dataclass(frozen=True)
class TwinSet:
    pairs: tuple[TwinPair, ...]
    fingerprint: str = ""
    # pairs removed by the last filter because a year was missing
    dropped_missing_year: int = 0

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __contains__(self, pair):
        return pair in self._lookup

    @property
    def _lookup(self) -> frozenset:
        cached = self.__dict__.get("_lookup_cache")
        if cached is None:
            cached = frozenset(self.pairs)
            object.__setattr__(self, "_lookup_cache", cached)
        return cached

    def ids(self) -> set[str]:
        return {pid for pair in self.pairs for pid in pair}


def detect_twins(corpus: Corpus) -> TwinSet:
    """All unordered pairs {s, t} where s cites t and t cites s.

    One pass over the reference lists with a hashed set of the
    "backward" edges (citing id greater than cited id); every forward
    edge is then a twin exactly when its reverse is in that set.
    """
    backward = set()
    for p in corpus:
        s = p.id
        for t in p.references:
            if t < s and t in corpus:
                backward.add((t, s))
    found = []
    for p in corpus:
        s = p.id
        for t in p.references:
            if s < t and (s, t) in backward:
                found.append(TwinPair(s, t))
    pairs = sorted(found)
    return TwinSet(tuple(pairs), corpus.fingerprint())


def filter_twins(twins: TwinSet, corpus: Corpus, max_year_gap: Optional[int] = None) -> TwinSet:
    """Keep pairs published at most ``max_year_gap`` years apart.

    With no bound the input is returned unchanged. Pairs where either paper
    lacks a year cannot be judged and are dropped (counted in
    ``dropped_missing_year``).
    """
    if max_year_gap is None:
        return twins
    if max_year_gap < 0:
        raise ValueError("max_year_gap must be non-negative")
    kept, missing = [], 0
    for pair in twins:
        ya, yb = corpus[pair.first].year, corpus[pair.second].year
        if ya is None or yb is None:
            missing += 1
        elif abs(ya - yb) <= max_year_gap:
            kept.append(pair)
    return TwinSet(tuple(kept), twins.fingerprint, missing)


def restrict_to_corpus(twins: TwinSet, corpus: Corpus) -> tuple[TwinSet, int]:
    """Drop pairs naming papers absent from ``corpus``; returns (twins, n_dropped)."""
    kept = tuple(p for p in twins if p.first in corpus and p.second in corpus)
    return TwinSet(kept, twins.fingerprint), len(twins) - len(kept)


def write_twins(twins: Iterable[TwinPair], path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pair in twins:
            fh.write(f"{pair.first}\t{pair.second}\n")


def read_twins(path) -> TwinSet:
    """Read a ``first<TAB>second`` twin list; pairs are canonicalized and deduplicated."""
    h = hashlib.sha256()
    pairs = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            h.update(line.encode("utf-8"))
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2 or not cols[0] or not cols[1] or cols[0] == cols[1]:
                raise ValueError(f"{path}:{lineno}: expected two distinct ids separated by a tab")
            pairs.add(TwinPair.of(cols[0], cols[1]))
    return TwinSet(tuple(sorted(pairs)), "file:" + h.hexdigest())


class CollabGraph:
    """Undirected coauthorship graph over author keys."""

    def __init__(self, adjacency: dict[str, set[str]]):
        self.adjacency = adjacency

    @property
    def nodes(self):
        return self.adjacency.keys()

    def neighbors(self, key: str):
        return self.adjacency.get(key, ())

    def edges(self) -> set[tuple[str, str]]:
        return {(u, v) for u, nbrs in self.adjacency.items() for v in nbrs if u < v}

    def n_edges(self) -> int:
        return sum(len(v) for v in self.adjacency.values()) // 2


def build_collab_network(corpus: Corpus) -> CollabGraph:
    adj: dict[str, set[str]] = {}
    for p in corpus:
        keys = sorted({a.key for a in p.authors})
        for k in keys:
            adj.setdefault(k, set())
        for i, u in enumerate(keys):
            for v in keys[i + 1:]:
                adj[u].add(v)
                adj[v].add(u)
    return CollabGraph(adj)


def paper_collab_distance(graph: CollabGraph, a: PaperRecord, b: PaperRecord) -> float:
    """Fewest coauthorship hops from any author of ``a`` to any author of ``b``.

    Returns 0 for a shared author and ``UNREACHABLE`` (``inf``) when either
    paper has no authors or no path exists.
    """
    sources = a.author_keys
    targets = b.author_keys
    if not sources or not targets:
        return UNREACHABLE
    if sources & targets:
        return 0
    seen = set(sources)
    frontier = deque((k, 0) for k in sorted(sources))
    while frontier:
        node, d = frontier.popleft()
        for nxt in graph.neighbors(node):
            if nxt in seen:
                continue
            if nxt in targets:
                return d + 1
            seen.add(nxt)
            frontier.append((nxt, d + 1))
    return UNREACHABLE
