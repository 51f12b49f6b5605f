"""Checks that twins look like counterfactual units.

Three diagnostics: how far apart twins were published, how similar their
abstracts are compared with random pairs, and how close their authors sit in
the collaboration network compared with random pairs.
"""

from __future__ import annotations

import bisect
import math
import random
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .ingest import Corpus
from .twin_graph import (UNREACHABLE, CollabGraph, TwinPair, TwinSet, build_collab_network,
                         paper_collab_distance)


@dataclass(frozen=True)
class Histogram:
    """Counts over bins ``[edges[i], edges[i+1])``."""

    edges: tuple[float, ...]
    counts: tuple[int, ...]
    underflow: int = 0
    overflow: int = 0

    def __post_init__(self):
        if len(self.edges) < 2 or any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError("histogram edges must be strictly increasing")
        if len(self.counts) != len(self.edges) - 1:
            raise ValueError("need one count per bin")

    @property
    def n(self) -> int:
        return sum(self.counts) + self.underflow + self.overflow

    @classmethod
    def from_values(cls, values, edges: Sequence[float]) -> "Histogram":
        edges = tuple(edges)
        counts = [0] * (len(edges) - 1)
        under = over = 0
        for v in values:
            i = bisect.bisect_right(edges, v) - 1
            if i < 0:
                under += 1
            elif i >= len(counts):
                over += 1
            else:
                counts[i] += 1
        return cls(edges, tuple(counts), under, over)

    def rebin(self, factor: int) -> "Histogram":
        """Merge every ``factor`` adjacent bins; a trailing partial group stays together."""
        if factor < 1:
            raise ValueError("factor must be positive")
        idx = list(range(0, len(self.counts), factor))
        edges = tuple(self.edges[i] for i in idx) + (self.edges[-1],)
        counts = tuple(sum(self.counts[i:i + factor]) for i in idx)
        return Histogram(edges, counts, self.underflow, self.overflow)


@dataclass(frozen=True)
class YearGapReport:
    histogram: Histogram
    same_or_next_year_fraction: float
    n_missing_year: int


def year_gap_histogram(twins: TwinSet, corpus: Corpus) -> YearGapReport:
    gaps = []
    missing = 0
    for pair in twins:
        ya, yb = corpus[pair.first].year, corpus[pair.second].year
        if ya is None or yb is None:
            missing += 1
        else:
            gaps.append(abs(ya - yb))
    top = max(gaps, default=0)
    hist = Histogram.from_values(gaps, range(top + 2))
    close = sum(1 for g in gaps if g <= 1)
    frac = close / len(gaps) if gaps else math.nan
    return YearGapReport(hist, frac, missing)


def bow_tokens(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation from both ends of each token."""
    out = []
    for tok in text.lower().split():
        start, end = 0, len(tok)
        while start < end and unicodedata.category(tok[start]).startswith("P"):
            start += 1
        while end > start and unicodedata.category(tok[end - 1]).startswith("P"):
            end -= 1
        if start < end:
            out.append(tok[start:end])
    return out


def bow_distance(a: str, b: str) -> float:
    """L1 distance between the L1-normalized term-frequency vectors of two texts.

    Computed in integers, sum |c_w * m - d_w * n| / (n * m), so the result is
    exact up to the final division and always inside [0, 2]. Two empty texts
    are at distance 0; one empty text is at distance 2 from anything else.
    """
    ca, cb = Counter(bow_tokens(a or "")), Counter(bow_tokens(b or ""))
    n, m = sum(ca.values()), sum(cb.values())
    if n == 0 and m == 0:
        return 0.0
    if n == 0 or m == 0:
        return 2.0
    num = sum(abs(ca.get(w, 0) * m - cb.get(w, 0) * n) for w in ca.keys() | cb.keys())
    return num / (n * m)


ABSTRACT_EDGES = tuple(i / 10 for i in range(22))


@dataclass(frozen=True)
class PairedReport:
    """Twin distances against a random-pair baseline."""

    twins: Histogram
    random: Histogram
    twin_mean: float
    random_mean: float
    # collaboration only: pairs with no path / pairs where a paper has no authors
    twin_unreachable: int = 0
    random_unreachable: int = 0
    twin_no_authors: int = 0
    random_no_authors: int = 0

    @property
    def mean_gap(self) -> float:
        return self.random_mean - self.twin_mean


def _mean(xs) -> float:
    total = 0.0
    for x in xs:
        total += x
    return total / len(xs) if xs else math.nan


def sample_random_pairs(ids: Sequence[str], n: int, seed: int,
                        exclude: Optional[TwinSet] = None) -> list[tuple[str, str]]:
    """``n`` uniform pairs of distinct ids, skipping twin pairs.

    Sampling is single-threaded and depends only on (ids order, n, seed).
    """
    if n < 1:
        raise ValueError("n_random must be at least 1")
    ids = list(ids)
    if len(ids) < 2:
        return []
    rng = random.Random(seed)
    out = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 100 * n + 1000:
            break
        i, j = rng.randrange(len(ids)), rng.randrange(len(ids))
        if i == j:
            continue
        a, b = ids[i], ids[j]
        if exclude is not None and TwinPair.of(a, b) in exclude:
            continue
        out.append((a, b))
    return out


def abstract_distance_report(twins: TwinSet, corpus: Corpus, n_random: Optional[int] = None,
                             seed: int = 0) -> PairedReport:
    """Abstract distances of twins vs. ``n_random`` random pairs (default: as many as twins)."""
    twin_d = []
    for pair in twins:
        a, b = corpus[pair.first].abstract, corpus[pair.second].abstract
        if a is not None and b is not None:
            twin_d.append(bow_distance(a, b))
    with_abs = sorted(p.id for p in corpus if p.abstract is not None)
    n_random = n_random if n_random is not None else max(len(twins), 1)
    rand_d = [bow_distance(corpus[a].abstract, corpus[b].abstract)
              for a, b in sample_random_pairs(with_abs, n_random, seed, twins)]
    return PairedReport(
        Histogram.from_values(twin_d, ABSTRACT_EDGES),
        Histogram.from_values(rand_d, ABSTRACT_EDGES),
        _mean(twin_d), _mean(rand_d))


def collab_distance_report(twins: TwinSet, corpus: Corpus, n_random: Optional[int] = None,
                           seed: int = 0, graph: Optional[CollabGraph] = None) -> PairedReport:
    """Collaboration distances of twins vs. random pairs.

    Unreachable pairs are kept out of the histograms and means and counted
    separately; pairs where a paper has no authors are counted on their own.
    """
    if graph is None:
        graph = build_collab_network(corpus)
    n_random = n_random if n_random is not None else max(len(twins), 1)
    rand_pairs = sample_random_pairs(sorted(corpus.papers), n_random, seed, twins)

    def measure(pairs):
        finite, unreachable, no_authors = [], 0, 0
        for a, b in pairs:
            pa, pb = corpus[a], corpus[b]
            if not pa.authors or not pb.authors:
                no_authors += 1
                continue
            d = paper_collab_distance(graph, pa, pb)
            if d == UNREACHABLE:
                unreachable += 1
            else:
                finite.append(d)
        return finite, unreachable, no_authors

    tf, tu, tn = measure((p.first, p.second) for p in twins)
    rf, ru, rn = measure(rand_pairs)
    top = max(tf + rf, default=0)
    edges = range(top + 2)
    return PairedReport(
        Histogram.from_values(tf, edges), Histogram.from_values(rf, edges),
        _mean(tf), _mean(rf), tu, ru, tn, rn)
