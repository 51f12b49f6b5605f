"""Binary treatments and their assignment within twin pairs.

A treatment is either a property of a single paper (a *predicate*, e.g. a
colon in the title) or a comparison between the two papers of a pair (a
*comparative* treatment, e.g. the paper with more references is treated).
Venue pairs and combinations of several treatments are handled as well.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .ingest import Corpus, PaperRecord, normalize_venue
from .twin_graph import TwinPair


class _Sentinel:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name

    def __bool__(self):
        raise TypeError(f"{self.name} has no truth value")


INAPPLICABLE = _Sentinel("INAPPLICABLE")

PREDICATE_KINDS = frozenset({"colon_in_title", "keyword_in_title", "self_cited", "venue_is", "combo"})

# kind -> (measured quantity, +1 if larger value is treated, -1 if smaller)
COMPARATIVE_KINDS = {
    "title_shorter": ("title_tokens", -1),
    "reference_longer": ("reference_count", +1),
    "abstract_longer": ("abstract_tokens", +1),
    "paper_longer": ("page_count", +1),
    "published_earlier": ("year", -1),
}

MEASURES = frozenset(m for m, _ in COMPARATIVE_KINDS.values())

ALL_KINDS = PREDICATE_KINDS | COMPARATIVE_KINDS.keys() | {"venue_pair"}

_CLI_SIMPLE = {
    "colon": "colon_in_title",
    "short-title": "title_shorter",
    "long-refs": "reference_longer",
    "long-abstract": "abstract_longer",
    "long-paper": "paper_longer",
    "self-cite": "self_cited",
    "priority": "published_earlier",
}
_CLI_NAMES = {v: k for k, v in _CLI_SIMPLE.items()}

_WORD = re.compile(r"\w+")


@dataclass(frozen=True)
class TreatmentSpec:
    kind: str
    keyword: Optional[str] = None
    venues: tuple[str, ...] = ()
    members: tuple["TreatmentSpec", ...] = ()

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown treatment kind {self.kind!r}")
        if self.kind == "keyword_in_title":
            if not self.keyword or not _WORD.findall(self.keyword):
                raise ValueError("keyword_in_title needs a keyword")
            object.__setattr__(self, "keyword", self.keyword.lower())
        if self.kind == "venue_pair":
            if len(self.venues) != 2:
                raise ValueError("venue_pair needs exactly two venues")
            a, b = (normalize_venue(v) for v in self.venues)
            if not a or not b or a == b:
                raise ValueError("venue_pair needs two distinct non-empty venues")
            object.__setattr__(self, "venues", (a, b))
        if self.kind == "venue_is":
            if len(self.venues) != 1 or not normalize_venue(self.venues[0]):
                raise ValueError("venue_is needs one venue")
            object.__setattr__(self, "venues", (normalize_venue(self.venues[0]),))
        if self.kind == "combo":
            if len(self.members) < 2:
                raise ValueError("combo needs at least two members")
            for m in self.members:
                if m.kind in ("combo", "venue_pair"):
                    raise ValueError(f"{m.kind} cannot be part of a combo")

    @property
    def is_predicate(self) -> bool:
        """True when the treatment can be evaluated on a single paper."""
        if self.kind == "combo":
            return all(m.is_predicate for m in self.members)
        return self.kind in PREDICATE_KINDS

    @property
    def name(self) -> str:
        """Canonical command-line spelling."""
        if self.kind in _CLI_NAMES:
            return _CLI_NAMES[self.kind]
        if self.kind == "keyword_in_title":
            return f"keyword={self.keyword}"
        if self.kind == "venue_pair":
            return f"venue={self.venues[0]}::{self.venues[1]}"
        if self.kind == "venue_is":
            return f"venue-is={self.venues[0]}"
        return "combo=" + "+".join(m.name for m in self.members)

    def __str__(self):
        return self.name


def parse_treatment(text: str) -> TreatmentSpec:
    """Parse the command-line treatment syntax (``colon``, ``keyword=learning``,
    ``venue=stoc::focs``, ``combo=long-refs+self-cite`` ...)."""
    text = text.strip()
    if text in _CLI_SIMPLE:
        return TreatmentSpec(_CLI_SIMPLE[text])
    head, sep, arg = text.partition("=")
    if not sep:
        raise ValueError(f"unknown treatment {text!r}")
    if head == "keyword":
        return TreatmentSpec("keyword_in_title", keyword=arg)
    if head == "venue":
        a, sep, b = arg.partition("::")
        if not sep:
            raise ValueError("venue treatment must look like venue=<a>::<b>")
        return TreatmentSpec("venue_pair", venues=(a, b))
    if head == "venue-is":
        return TreatmentSpec("venue_is", venues=(arg,))
    if head == "combo":
        return TreatmentSpec("combo", members=tuple(parse_treatment(t) for t in arg.split("+")))
    raise ValueError(f"unknown treatment {text!r}")


def tokens(text: str) -> list[str]:
    return text.split()


def measure(kind: str, paper: PaperRecord) -> Optional[int]:
    """Magnitude compared by the length/priority treatments; None when absent."""
    if kind == "title_tokens":
        return len(tokens(paper.title))
    if kind == "reference_count":
        return len(paper.references)
    if kind == "abstract_tokens":
        return None if paper.abstract is None else len(tokens(paper.abstract))
    if kind == "page_count":
        if paper.page_start is None or paper.page_end is None:
            return None
        return paper.page_end - paper.page_start + 1
    if kind == "year":
        return paper.year
    raise ValueError(f"unknown measure {kind!r}")


def _has_keyword(title: str, keyword: str) -> bool:
    words = [w.lower() for w in _WORD.findall(title)]
    target = [w.lower() for w in _WORD.findall(keyword)]
    n = len(target)
    return any(words[i:i + n] == target for i in range(len(words) - n + 1))


def is_self_cited(paper: PaperRecord, corpus: Corpus) -> bool:
    keys = paper.author_keys
    return any(not keys.isdisjoint(corpus[c].author_keys) for c in corpus.citers(paper.id))


def predicate(spec: TreatmentSpec, paper: PaperRecord, corpus: Corpus):
    """Truth value of a single-paper treatment, or INAPPLICABLE.

    A combo counts as True when every member holds, False when none holds,
    and INAPPLICABLE when only some do.
    """
    if not spec.is_predicate:
        raise TypeError(f"{spec.name} compares two papers and has no single-paper form")
    kind = spec.kind
    if kind == "colon_in_title":
        return ":" in paper.title
    if kind == "keyword_in_title":
        return _has_keyword(paper.title, spec.keyword)
    if kind == "venue_is":
        if paper.venue is None:
            return INAPPLICABLE
        return paper.venue == spec.venues[0]
    if kind == "self_cited":
        if not paper.authors:
            return INAPPLICABLE
        return is_self_cited(paper, corpus)
    values = [predicate(m, paper, corpus) for m in spec.members]
    if any(v is INAPPLICABLE for v in values):
        return INAPPLICABLE
    if all(values):
        return True
    if not any(values):
        return False
    return INAPPLICABLE


@dataclass(frozen=True)
class Assignment:
    treated: str
    control: str
    pair: TwinPair

    def __post_init__(self):
        if {self.treated, self.control} != {self.pair.first, self.pair.second}:
            raise ValueError("assignment does not match its pair")


def _qualifies(spec: TreatmentSpec, x: PaperRecord, y: PaperRecord, corpus: Corpus) -> bool:
    """Whether x can be the treated paper and y the control."""
    kind = spec.kind
    if kind in COMPARATIVE_KINDS:
        quantity, sign = COMPARATIVE_KINDS[kind]
        mx, my = measure(quantity, x), measure(quantity, y)
        if mx is None or my is None:
            return False
        return (mx - my) * sign > 0
    if kind == "venue_pair":
        return x.venue == spec.venues[0] and y.venue == spec.venues[1]
    if kind == "combo":
        return all(_qualifies(m, x, y, corpus) for m in spec.members)
    return predicate(spec, x, corpus) is True and predicate(spec, y, corpus) is False


def assign_pair(spec: TreatmentSpec, pair: TwinPair, corpus: Corpus) -> Optional[Assignment]:
    """Orient a twin pair into (treated, control), or None to discard it."""
    a, b = corpus[pair.first], corpus[pair.second]
    if _qualifies(spec, a, b, corpus):
        return Assignment(a.id, b.id, pair)
    if _qualifies(spec, b, a, corpus):
        return Assignment(b.id, a.id, pair)
    return None
