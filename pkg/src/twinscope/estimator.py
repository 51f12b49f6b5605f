"""Average treatment effects from twin pairs.

Each twin pair in which exactly one paper is treated gives a noisy
individual effect, the treated outcome minus the control outcome. The
average over all such pairs estimates the average treatment effect over the
twin population. Sums are taken left to right in canonical pair order so
that repeated runs are bit-identical.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .ingest import Corpus, normalize_venue
from .outcomes import OutcomeTable
from .treatments import INAPPLICABLE, Assignment, TreatmentSpec, assign_pair, predicate
from .twin_graph import TwinSet


class MissingOutcomeError(KeyError):
    pass


@dataclass(frozen=True)
class PairDataset:
    assignments: tuple[Assignment, ...]
    spec: Optional[TreatmentSpec] = None
    provenance: str = ""

    def __len__(self):
        return len(self.assignments)

    def __iter__(self):
        return iter(self.assignments)

    def swapped(self) -> "PairDataset":
        """Same pairs with treated and control exchanged."""
        return PairDataset(
            tuple(Assignment(a.control, a.treated, a.pair) for a in self.assignments),
            None, self.provenance)


@dataclass(frozen=True)
class AteResult:
    ate: float
    n_pairs: int
    stddev: float
    description: str = ""
    # set when one of the compared groups was empty; ate is then nan
    empty: bool = False
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def stderr(self) -> float:
        if self.n_pairs < 2:
            return math.nan
        return self.stddev / math.sqrt(self.n_pairs)


def empty_result(description: str = "") -> AteResult:
    return AteResult(math.nan, 0, math.nan, description, empty=True)


def build_pair_dataset(twins: TwinSet, spec: TreatmentSpec, corpus: Corpus) -> PairDataset:
    out = []
    for pair in sorted(twins.pairs):
        a = assign_pair(spec, pair, corpus)
        if a is not None:
            out.append(a)
    return PairDataset(tuple(out), spec, twins.fingerprint)


def _outcome(outcomes: OutcomeTable, pid: str) -> float:
    try:
        return outcomes[pid]
    except KeyError:
        raise MissingOutcomeError(f"no outcome for paper {pid!r}") from None


def estimate_ite(assignment: Assignment, outcomes: OutcomeTable) -> float:
    return _outcome(outcomes, assignment.treated) - _outcome(outcomes, assignment.control)


def _summarize(values: Sequence[float], description: str) -> AteResult:
    n = len(values)
    if n == 0:
        return empty_result(description)
    total = 0.0
    for v in values:
        total += v
    mean = total / n
    if n > 1:
        ss = 0.0
        for v in values:
            ss += (v - mean) ** 2
        sd = math.sqrt(ss / (n - 1))
    else:
        sd = math.nan
    return AteResult(mean, n, sd, description)


def estimate_ate(pairs: PairDataset | Iterable[Assignment], outcomes: OutcomeTable,
                 description: Optional[str] = None) -> AteResult:
    """Mean within-pair outcome difference (treated minus control).

    An empty dataset yields a result flagged ``empty`` with ``ate`` nan,
    never a silent 0.
    """
    if description is None:
        spec = getattr(pairs, "spec", None)
        description = spec.name if spec is not None else ""
    diffs = [estimate_ite(a, outcomes) for a in pairs]
    return _summarize(diffs, description)


def naive_observational_ate(corpus: Corpus, spec: TreatmentSpec, outcomes: OutcomeTable,
                            venues: Optional[Iterable[str]] = None) -> AteResult:
    """Difference in mean outcome between treated and untreated papers.

    Ignores twin structure entirely, so it absorbs any confounding between
    the treatment and the outcome. ``venues`` optionally restricts the
    population. ``n_pairs`` reports the number of papers used and
    ``stddev`` the standard error of the difference in means.
    """
    if not spec.is_predicate:
        raise TypeError(f"{spec.name} compares two papers and has no observational form")
    allowed = None if venues is None else {normalize_venue(v) for v in venues}
    treated, control = [], []
    for p in corpus:
        if allowed is not None and p.venue not in allowed:
            continue
        if p.id not in outcomes:
            continue
        v = predicate(spec, p, corpus)
        if v is INAPPLICABLE:
            continue
        (treated if v else control).append(outcomes[p.id])
    desc = "naive:" + spec.name
    if not treated or not control:
        return AteResult(math.nan, len(treated) + len(control), math.nan, desc, empty=True,
                         extra={"n_treated": len(treated), "n_control": len(control)})
    mt, vt = _mean_var(treated)
    mc, vc = _mean_var(control)
    se = math.sqrt(vt / len(treated) + vc / len(control))
    return AteResult(mt - mc, len(treated) + len(control), se, desc,
                     extra={"n_treated": len(treated), "n_control": len(control),
                            "mean_treated": mt, "mean_control": mc})


def _mean_var(values: Sequence[float]) -> tuple[float, float]:
    # shifted by the first value: a constant group has mean exactly that constant
    shift = values[0]
    total = 0.0
    for v in values:
        total += v - shift
    mean = shift + total / len(values)
    if len(values) < 2:
        return mean, 0.0
    ss = 0.0
    for v in values:
        ss += (v - mean) ** 2
    return mean, ss / (len(values) - 1)


def venue_ate_table(twins: TwinSet, corpus: Corpus, outcomes: OutcomeTable,
                    min_pairs: int = 1) -> list[AteResult]:
    """ATE for every venue pair with at least ``min_pairs`` discordant twins.

    Each venue pair is reported once, oriented so the effect is non-negative
    (lexicographic order is kept on an exact zero), largest datasets first.
    """
    if min_pairs < 1:
        raise ValueError("min_pairs must be at least 1")
    groups: dict[tuple[str, str], list] = defaultdict(list)
    for pair in sorted(twins.pairs):
        va, vb = corpus[pair.first].venue, corpus[pair.second].venue
        if va is None or vb is None or va == vb:
            continue
        if va < vb:
            groups[(va, vb)].append(Assignment(pair.first, pair.second, pair))
        else:
            groups[(vb, va)].append(Assignment(pair.second, pair.first, pair))
    rows = []
    for (a, b), assigned in groups.items():
        if len(assigned) < min_pairs:
            continue
        res = estimate_ate(assigned, outcomes, f"venue={a}::{b}")
        if res.ate < 0:
            flipped = [Assignment(x.control, x.treated, x.pair) for x in assigned]
            res = estimate_ate(flipped, outcomes, f"venue={b}::{a}")
        rows.append(res)
    rows.sort(key=lambda r: (-r.n_pairs, r.description))
    return rows


@dataclass(frozen=True)
class AdditivityReport:
    ate_a: AteResult
    ate_b: AteResult
    ate_ab: AteResult

    @property
    def subadditive(self) -> Optional[bool]:
        """None when any of the three datasets is empty."""
        if self.ate_a.empty or self.ate_b.empty or self.ate_ab.empty:
            return None
        return self.ate_ab.ate < self.ate_a.ate + self.ate_b.ate


def additivity_report(twins: TwinSet, corpus: Corpus, outcomes: OutcomeTable,
                      spec_a: TreatmentSpec, spec_b: TreatmentSpec) -> AdditivityReport:
    combo = TreatmentSpec("combo", members=(spec_a, spec_b))
    results = [estimate_ate(build_pair_dataset(twins, s, corpus), outcomes)
               for s in (spec_a, spec_b, combo)]
    return AdditivityReport(*results)
