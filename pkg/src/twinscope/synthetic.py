"""Synthetic citation corpora with known potential outcomes.

Papers are grouped into communities; each community has its own abstract
vocabulary and its own labs of authors. Twin pairs are planted inside one
lab (so they share topic and coauthors), usually in the same venue, and are
published zero or a few years apart. They cite each other; every other
reference points to a paper earlier in a hidden random order, so no other
mutual citations can arise.

Outcomes follow an additive model in log2 units::

    y = base + venue_effect + pair_effect + noise + sum_k effect_k * t_k
        + interaction * prod_k t_k

and the realized citation count is ``max(0, round(2**y - smoothing))``.
Every potential outcome is stored after the same quantization, so the
ground truth is exact for the outcomes the estimator actually sees.

Treatments are drawn per paper as Bernoulli(rho * custom_v + (1 - rho) / 2),
where ``custom_v`` is the habit of the paper's venue: with ``rho`` close to 1
the venue decides the treatment and becomes a confounder.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, fields
from typing import Iterator, Mapping, Optional, Sequence

from .estimator import PairDataset
from .ingest import AuthorRef, Corpus, PaperRecord, normalize_venue
from .treatments import TreatmentSpec

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

PLANTABLE = ("colon", "keyword")


class SynthConfigError(ValueError):
    pass


@dataclass(frozen=True)
class VenueSpec:
    name: str
    effect: float = 0.0
    custom: float = 0.5
    weight: float = 1.0


@dataclass(frozen=True)
class PlantedTreatment:
    kind: str = "colon"
    effect: float = 0.0
    keyword: str = "learning"

    @property
    def spec(self) -> TreatmentSpec:
        if self.kind == "colon":
            return TreatmentSpec("colon_in_title")
        return TreatmentSpec("keyword_in_title", keyword=self.keyword)


def _default_venues():
    return (VenueSpec("venue a", 0.0, 1.0), VenueSpec("venue b", 0.0, 0.0))


@dataclass(frozen=True)
class SynthConfig:
    n_papers: int = 10_000
    twin_fraction: float = 0.5
    venues: tuple[VenueSpec, ...] = field(default_factory=_default_venues)
    treatments: tuple[PlantedTreatment, ...] = (PlantedTreatment(),)
    interaction: float = 0.0
    confounding: float = 0.0
    noise: float = 0.0
    pair_effect_sd: float = 0.0
    base_outcome: float = 5.0
    smoothing: float = 1.0
    cross_venue_twin_prob: float = 0.0
    twin_year_gap_probs: tuple[float, ...] = (0.5, 0.35, 0.1, 0.05)
    year_range: tuple[int, int] = (1990, 2020)
    n_communities: int = 10
    labs_per_community: int = 5
    lab_size: int = 6
    max_authors: int = 4
    bridge_prob: float = 0.05
    vocab_size: int = 200
    abstract_length: int = 20
    title_length: tuple[int, int] = (4, 12)
    refs_per_paper: int = 5
    max_pages: int = 30
    seed: int = 0

    def __post_init__(self):
        problems = []
        if self.n_papers < 2:
            problems.append("n_papers must be at least 2")
        for name in ("twin_fraction", "confounding", "cross_venue_twin_prob", "bridge_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                problems.append(f"{name} must be in [0, 1], got {v}")
        if self.noise < 0 or self.pair_effect_sd < 0:
            problems.append("noise and pair_effect_sd must be non-negative")
        if self.smoothing <= 0:
            problems.append("smoothing must be positive")
        if not self.venues:
            problems.append("need at least one venue")
        for v in self.venues:
            if not 0.0 <= v.custom <= 1.0 or v.weight <= 0:
                problems.append(f"venue {v.name!r}: custom must be in [0, 1] and weight positive")
        if len({normalize_venue(v.name) for v in self.venues}) != len(self.venues):
            problems.append("venue names must be distinct after normalization")
        if not self.treatments:
            problems.append("need at least one planted treatment")
        if len(self.treatments) > 4:
            problems.append("at most four planted treatments")
        kinds = [(t.kind, t.keyword if t.kind == "keyword" else None) for t in self.treatments]
        if len(set(kinds)) != len(kinds):
            problems.append("planted treatments must be distinct")
        for t in self.treatments:
            if t.kind not in PLANTABLE:
                problems.append(f"cannot plant treatment {t.kind!r}; expected one of {PLANTABLE}")
            elif t.kind == "keyword" and (not t.keyword.isalpha() or t.keyword != t.keyword.lower()):
                problems.append("planted keyword must be a single lowercase word")
        probs = self.twin_year_gap_probs
        if not probs or any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
            problems.append("twin_year_gap_probs must be non-negative and sum to 1")
        lo, hi = self.year_range
        if lo <= 0 or hi - lo < len(probs) - 1:
            problems.append("year_range too narrow for the twin year gaps")
        if self.abstract_length > self.vocab_size:
            problems.append("abstract_length cannot exceed vocab_size")
        if self.lab_size < 1 or self.max_authors < 1 or self.n_communities < 1 or self.labs_per_community < 1:
            problems.append("community/lab/author sizes must be positive")
        a, b = self.title_length
        if not 1 <= a <= b:
            problems.append("title_length must be an increasing pair of positive ints")
        if self.refs_per_paper < 0 or self.max_pages < 1:
            problems.append("refs_per_paper must be >= 0 and max_pages >= 1")
        if problems:
            raise SynthConfigError("; ".join(problems))

    @property
    def n_twin_pairs(self) -> int:
        return int(self.twin_fraction * self.n_papers) // 2

    @classmethod
    def from_dict(cls, data: Mapping) -> "SynthConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise SynthConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(data)
        if "venues" in kw:
            kw["venues"] = tuple(VenueSpec(**v) for v in kw["venues"])
        if "treatments" in kw:
            kw["treatments"] = tuple(PlantedTreatment(**t) for t in kw["treatments"])
        for key in ("twin_year_gap_probs", "year_range", "title_length"):
            if key in kw:
                kw[key] = tuple(kw[key])
        try:
            return cls(**kw)
        except TypeError as e:
            raise SynthConfigError(str(e)) from None

    @classmethod
    def from_toml(cls, path) -> "SynthConfig":
        with open(path, "rb") as fh:
            return cls.from_dict(tomllib.load(fh))


@dataclass(frozen=True, slots=True)
class PaperTruth:
    """Potential outcomes of one paper.

    ``potentials[mask]`` is the quantized outcome when planted treatment k is
    on exactly for the bits k set in ``mask``; ``treated`` is the realized
    assignment.
    """

    treated: tuple[bool, ...]
    potentials: tuple[float, ...]
    citations: int

    @property
    def realized_mask(self) -> int:
        return sum(1 << k for k, t in enumerate(self.treated) if t)

    @property
    def realized(self) -> float:
        return self.potentials[self.realized_mask]

    def outcome(self, on: Sequence[int] = (), off: Sequence[int] = ()) -> float:
        """Potential outcome with the given treatments forced on/off, others as realized."""
        mask = self.realized_mask
        for k in on:
            mask |= 1 << k
        for k in off:
            mask &= ~(1 << k)
        return self.potentials[mask]

    def y1(self, k: int = 0) -> float:
        return self.outcome(on=(k,))

    def y0(self, k: int = 0) -> float:
        return self.outcome(off=(k,))


@dataclass
class SyntheticTruth:
    papers: dict[str, PaperTruth]
    treatments: tuple[TreatmentSpec, ...]
    smoothing: float = 1.0

    def planted_index(self, spec: TreatmentSpec) -> list[int]:
        """Planted treatment indices that ``spec`` switches on (empty if none)."""
        specs = spec.members if spec.kind == "combo" else (spec,)
        out = []
        for s in specs:
            if s in self.treatments:
                out.append(self.treatments.index(s))
        return out

    def ite(self, pid: str, spec: TreatmentSpec) -> float:
        idx = self.planted_index(spec)
        t = self.papers[pid]
        return t.outcome(on=idx) - t.outcome(off=idx)


def quantize(y: float, smoothing: float) -> int:
    return max(0, math.floor(2.0 ** y - smoothing + 0.5))


def _choice_weighted(rng: random.Random, cum: Sequence[float]) -> int:
    x = rng.random() * cum[-1]
    lo, hi = 0, len(cum) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] > x:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _cumulative(ws):
    out, total = [], 0.0
    for w in ws:
        total += w
        out.append(total)
    return out


def _iter_synthetic(cfg: SynthConfig) -> Iterator[tuple[PaperRecord, PaperTruth]]:
    rng = random.Random(cfg.seed)
    n = cfg.n_papers
    n_pairs = cfg.n_twin_pairs
    n_twin = 2 * n_pairs
    K = len(cfg.treatments)
    venue_cum = _cumulative(v.weight for v in cfg.venues)
    gap_cum = _cumulative(cfg.twin_year_gap_probs)
    lo_year, hi_year = cfg.year_range
    max_gap = len(cfg.twin_year_gap_probs) - 1
    n_labs = cfg.n_communities * cfg.labs_per_community

    # per-paper latent structure, indexed by generation order
    lab = [0] * n
    venue = [0] * n
    year = [0] * n
    shared = [0.0] * n
    for i in range(n):
        if i < n_twin and i % 2 == 1:
            j = i - 1
            lab[i] = lab[j]
            shared[i] = shared[j]
            if rng.random() < cfg.cross_venue_twin_prob and len(cfg.venues) > 1:
                v = _choice_weighted(rng, venue_cum)
                while v == venue[j]:
                    v = _choice_weighted(rng, venue_cum)
                venue[i] = v
            else:
                venue[i] = venue[j]
            gap = _choice_weighted(rng, gap_cum)
            year[i] = year[j] + gap
        else:
            lab[i] = rng.randrange(n_labs)
            venue[i] = _choice_weighted(rng, venue_cum)
            year[i] = rng.randint(lo_year, hi_year - max_gap)
            shared[i] = rng.gauss(0.0, cfg.pair_effect_sd) if cfg.pair_effect_sd > 0 else 0.0

    treated = []
    potentials = []
    for i in range(n):
        v = cfg.venues[venue[i]]
        p_treat = cfg.confounding * v.custom + (1.0 - cfg.confounding) * 0.5
        t = tuple(rng.random() < p_treat for _ in range(K))
        eps = rng.gauss(0.0, cfg.noise) if cfg.noise > 0 else 0.0
        base = cfg.base_outcome + v.effect + shared[i] + eps
        counts = []
        for mask in range(1 << K):
            on = [(mask >> k) & 1 for k in range(K)]
            y = base + sum(tr.effect * o for tr, o in zip(cfg.treatments, on))
            if all(on):
                y += cfg.interaction
            counts.append(quantize(y, cfg.smoothing))
        treated.append(t)
        potentials.append(counts)

    # ids are a random relabeling; references follow a hidden random order
    width = len(str(n - 1))
    label = list(range(n))
    rng.shuffle(label)
    ids = [f"p{label[i]:0{width}d}" for i in range(n)]
    rank_order = list(range(n))
    rng.shuffle(rank_order)
    rank = [0] * n
    for r, i in enumerate(rank_order):
        rank[i] = r
    by_label = [0] * n
    for i in range(n):
        by_label[label[i]] = i

    for i in by_label:
        comm = lab[i] // cfg.labs_per_community
        vocab = cfg.vocab_size

        n_words = rng.randint(*cfg.title_length)
        words = [f"t{comm}x{rng.randrange(vocab)}" for _ in range(n_words)]
        for tr, on in zip(cfg.treatments, treated[i]):
            if on and tr.kind == "keyword":
                words.insert(rng.randrange(len(words) + 1), tr.keyword)
        for tr, on in zip(cfg.treatments, treated[i]):
            if on and tr.kind == "colon":
                words[0] = words[0] + ":"
        title = " ".join(words)

        abstract = " ".join(f"c{comm}w{j}" for j in rng.sample(range(vocab), cfg.abstract_length)) \
            if cfg.abstract_length > 0 else None

        n_auth = rng.randint(1, min(cfg.max_authors, cfg.lab_size))
        members = rng.sample(range(cfg.lab_size), n_auth)
        keys = [(lab[i], m) for m in members]
        if rng.random() < cfg.bridge_prob:
            keys[-1] = (rng.randrange(n_labs), rng.randrange(cfg.lab_size))
        seen = set()
        authors = []
        for lb, m in keys:
            if (lb, m) in seen:
                continue
            seen.add((lb, m))
            authors.append(AuthorRef(f"a{lb}_{m}", f"author {lb} {m}"))

        partner = i ^ 1 if i < n_twin else -1
        refs = []
        if partner >= 0:
            refs.append(ids[partner])
        r = rank[i]
        if r > 0:
            for _ in range(cfg.refs_per_paper):
                j = rank_order[rng.randrange(r)]
                if j != partner and ids[j] not in refs:
                    refs.append(ids[j])

        page_start = rng.randint(1, 1000)
        page_end = page_start + rng.randrange(cfg.max_pages)
        counts = potentials[i]
        truth = PaperTruth(treated[i],
                           tuple(math.log2(c + cfg.smoothing) for c in counts), 0)
        cites = counts[truth.realized_mask]
        truth = PaperTruth(truth.treated, truth.potentials, cites)
        record = PaperRecord(
            id=ids[i],
            title=title,
            abstract=abstract,
            year=year[i],
            venue=normalize_venue(cfg.venues[venue[i]].name),
            authors=tuple(authors),
            references=tuple(refs),
            citation_count=cites,
            page_start=page_start,
            page_end=page_end,
        )
        yield record, truth


def generate(config: SynthConfig) -> tuple[Corpus, SyntheticTruth]:
    records, truths = [], {}
    for rec, t in _iter_synthetic(config):
        records.append(rec)
        truths[rec.id] = t
    truth = SyntheticTruth(truths, tuple(t.spec for t in config.treatments), config.smoothing)
    return Corpus(records), truth


def write_synthetic(config: SynthConfig, corpus_path, truth_path=None) -> int:
    """Stream a generated corpus to json-lines (and the truth table to TSV)
    without holding it in memory. Returns the number of records written."""
    from .ingest import dump_json_record

    n = 0
    tfh = open(truth_path, "w", encoding="utf-8", newline="\n") if truth_path else None
    try:
        with open(corpus_path, "w", encoding="utf-8", newline="\n") as cfh:
            if tfh:
                tfh.write(TRUTH_HEADER)
            for rec, t in _iter_synthetic(config):
                cfh.write(dump_json_record(rec))
                cfh.write("\n")
                if tfh:
                    tfh.write(_truth_line(rec.id, t))
                n += 1
    finally:
        if tfh:
            tfh.close()
    return n


TRUTH_HEADER = "id\ttreated\ty1\ty0\tcitations\n"


def _truth_line(pid: str, t: PaperTruth) -> str:
    return f"{pid}\t{int(t.treated[0])}\t{t.y1(0)!r}\t{t.y0(0)!r}\t{t.citations}\n"


def write_truth(truth: SyntheticTruth, path):
    """Truth table for the first planted treatment: ``id, treated, y1, y0, citations``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(TRUTH_HEADER)
        for pid, t in truth.papers.items():
            fh.write(_truth_line(pid, t))


def truth_ate(truth: SyntheticTruth, pairs: PairDataset, spec: Optional[TreatmentSpec] = None) -> float:
    """Mean true effect Y(1) - Y(0) over every paper in the dataset's pairs.

    Treatments that were not planted have a true effect of exactly 0.
    """
    spec = spec if spec is not None else pairs.spec
    if spec is None:
        raise ValueError("pair dataset carries no treatment; pass spec explicitly")
    total, n = 0.0, 0
    for a in pairs:
        for pid in (a.treated, a.control):
            if pid not in truth.papers:
                raise KeyError(f"paper {pid!r} missing from the truth table")
            total += truth.ite(pid, spec)
            n += 1
    if n == 0:
        return math.nan
    return total / n


def expected_same_or_next_year_fraction(config: SynthConfig) -> float:
    probs = config.twin_year_gap_probs
    return sum(probs[:2])
