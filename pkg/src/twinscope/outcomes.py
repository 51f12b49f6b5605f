"""Per-paper outcome: log2 of the (smoothed) citation count."""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from .ingest import Corpus

SOURCES = ("auto", "snapshot", "internal")


class OutcomeConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OutcomeTable:
    values: Mapping[str, float]
    smoothing: float = 1.0
    source: str = "auto"

    def __getitem__(self, pid: str) -> float:
        return self.values[pid]

    def __contains__(self, pid) -> bool:
        return pid in self.values

    def __len__(self):
        return len(self.values)


def citation_count(corpus: Corpus, pid: str, source: str = "auto"):
    """Citation count used for the outcome, or None when the source has none.

    ``auto`` prefers the dump's ``n_citation`` and falls back to in-corpus
    citations; ``snapshot`` only uses ``n_citation``; ``internal`` only counts
    references inside the corpus.
    """
    if source == "internal":
        return corpus.in_citation_index.get(pid, 0)
    count = corpus[pid].citation_count
    if count is None and source == "auto":
        return corpus.in_citation_index.get(pid, 0)
    return count


def outcome_value(citations: float, smoothing: float = 1.0) -> float:
    return math.log2(citations + smoothing)


def compute_outcomes(corpus: Corpus, smoothing: float = 1.0, source: str = "auto") -> OutcomeTable:
    if source not in SOURCES:
        raise ValueError(f"unknown citation source {source!r}; expected one of {SOURCES}")
    if smoothing < 0 or not math.isfinite(smoothing):
        raise OutcomeConfigError(f"smoothing must be a finite non-negative number, got {smoothing}")
    counts = {}
    for p in corpus:
        c = citation_count(corpus, p.id, source)
        if c is not None:
            counts[p.id] = c
    if smoothing == 0:
        zeros = sum(1 for c in counts.values() if c == 0)
        if zeros:
            raise OutcomeConfigError(
                f"smoothing is 0 but {zeros} papers have zero citations; log2(0) is undefined")
    values = {pid: outcome_value(c, smoothing) for pid, c in counts.items()}
    return OutcomeTable(MappingProxyType(values), smoothing, source)
