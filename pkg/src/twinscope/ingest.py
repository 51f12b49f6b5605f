"""Reading bibliographic dumps into an immutable in-memory corpus.

Two line-delimited formats are understood:

* ``json-lines``: one JSON object per line using the AMiner/dblp citation
  dump keys ``id, title, abstract, year, venue, authors, references,
  n_citation, page_start, page_end``.
* ``tsv``: the same ten fields as tab-separated columns. List-valued
  columns (``authors``, ``references``) hold compact JSON arrays; text
  columns use backslash escapes for tab, newline and backslash. An optional
  header line starting with ``id<TAB>`` is skipped.

Malformed lines are counted, not fatal, unless they make up more than half
of the file.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import pickle
import re
import string
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional, Sequence

log = logging.getLogger(__name__)

FORMATS = ("json-lines", "tsv")
TSV_COLUMNS = (
    "id", "title", "abstract", "year", "venue", "authors", "references",
    "n_citation", "page_start", "page_end",
)

CACHE_MAGIC = b"TWINSCOPE-CORPUS\n"
CACHE_VERSION = 1

_WS = re.compile(r"\s+")
_EDGE_PUNCT = string.punctuation + string.whitespace


class CorpusFormatError(ValueError):
    """Input does not look like the declared format."""


class RecordError(ValueError):
    """A single record failed validation."""


class CacheVersionError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class AuthorRef:
    author_id: Optional[str]
    name: str

    @property
    def key(self) -> str:
        """Node key in the collaboration network: the id when known, else the name."""
        if self.author_id:
            return "id:" + self.author_id
        return "name:" + self.name


@dataclass(frozen=True, slots=True)
class PaperRecord:
    id: str
    title: str
    abstract: Optional[str] = None
    year: Optional[int] = None
    venue: Optional[str] = None
    authors: tuple[AuthorRef, ...] = ()
    references: tuple[str, ...] = ()
    citation_count: Optional[int] = None
    page_start: Optional[int] = None
    page_end: Optional[int] = None

    def __post_init__(self):
        if not self.id:
            raise RecordError("empty id")
        if self.year is not None and self.year <= 0:
            raise RecordError(f"{self.id}: year must be positive, got {self.year}")
        if self.citation_count is not None and self.citation_count < 0:
            raise RecordError(f"{self.id}: negative citation count")
        if self.id in self.references:
            raise RecordError(f"{self.id}: references itself")
        if len(set(self.references)) != len(self.references):
            raise RecordError(f"{self.id}: duplicate references")
        if (self.page_start is not None and self.page_end is not None
                and self.page_end < self.page_start):
            raise RecordError(f"{self.id}: page_end < page_start")

    @property
    def author_keys(self) -> frozenset[str]:
        return frozenset(a.key for a in self.authors)


def normalize_venue(raw: Optional[str]) -> str:
    if not raw:
        return ""
    return _WS.sub(" ", raw).strip(_EDGE_PUNCT).lower()


def normalize_author(author_id: Optional[str] = None, name: Optional[str] = None) -> AuthorRef:
    """Build an :class:`AuthorRef`; the id passes through untouched.

    Raises RecordError when neither an id nor a name is given.
    """
    norm = _WS.sub(" ", name or "").strip().lower()
    if not author_id and not norm:
        raise RecordError("author with neither id nor name")
    return AuthorRef(author_id or None, norm)


class Corpus:
    """Id-indexed, read-only collection of papers.

    ``in_citation_index`` maps every paper that is referenced at least once
    by another record in the corpus to the number of such records.
    References to ids outside the corpus stay in the records but are not
    counted.
    """

    def __init__(self, papers: Iterable[PaperRecord] = (), malformed: int = 0):
        table: dict[str, PaperRecord] = {}
        for p in papers:
            if p.id in table:
                raise RecordError(f"duplicate id {p.id!r}")
            table[p.id] = p
        self._papers = table
        self.malformed = malformed
        counts: Counter[str] = Counter()
        for p in table.values():
            for r in p.references:
                if r in table:
                    counts[r] += 1
        self._in_citations = dict(counts)
        self._citers: Optional[dict[str, list[str]]] = None
        self._fingerprint: Optional[str] = None

    @property
    def papers(self) -> Mapping[str, PaperRecord]:
        return MappingProxyType(self._papers)

    @property
    def in_citation_index(self) -> Mapping[str, int]:
        return MappingProxyType(self._in_citations)

    def __len__(self):
        return len(self._papers)

    def __contains__(self, pid):
        return pid in self._papers

    def __getitem__(self, pid) -> PaperRecord:
        return self._papers[pid]

    def __iter__(self) -> Iterator[PaperRecord]:
        return iter(self._papers.values())

    def __eq__(self, other):
        if not isinstance(other, Corpus):
            return NotImplemented
        return (self._papers == other._papers
                and self._in_citations == other._in_citations
                and self.malformed == other.malformed)

    def __repr__(self):
        return f"Corpus({len(self)} papers, {self.malformed} malformed)"

    def __getstate__(self):
        return {"papers": self._papers, "in": self._in_citations, "malformed": self.malformed}

    def __setstate__(self, state):
        self._papers = state["papers"]
        self._in_citations = state["in"]
        self.malformed = state["malformed"]
        self._citers = None
        self._fingerprint = None

    def citers(self, pid: str) -> Sequence[str]:
        """Ids of corpus papers whose references contain ``pid``."""
        if self._citers is None:
            rev: dict[str, list[str]] = {}
            for p in self._papers.values():
                for r in p.references:
                    if r in self._papers:
                        rev.setdefault(r, []).append(p.id)
            self._citers = rev
        return self._citers.get(pid, ())

    def fingerprint(self) -> str:
        """SHA-256 over the canonical serialization, records in id order."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            for pid in sorted(self._papers):
                h.update(dump_json_record(self._papers[pid]).encode("utf-8"))
                h.update(b"\n")
            self._fingerprint = h.hexdigest()
        return self._fingerprint


# -- record decoding ---------------------------------------------------------

def _opt_str(value, key) -> Optional[str]:
    if value is None:
        return None
    if not isinstance(value, str):
        raise RecordError(f"{key} must be a string")
    return value


def _opt_int(value, key) -> Optional[int]:
    if value is None or value == "":
        return None
    if isinstance(value, bool):
        raise RecordError(f"{key} must be an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str) and value.strip().lstrip("-").isdigit():
        return int(value)
    raise RecordError(f"{key} must be an integer, got {value!r}")


def _page(value) -> Optional[int]:
    # Real dumps carry page strings like "12a" or "" -- those become absent.
    try:
        return _opt_int(value, "page")
    except RecordError:
        return None


def record_from_dict(obj: Mapping) -> PaperRecord:
    """Validate and normalize one decoded record."""
    if not isinstance(obj, Mapping):
        raise RecordError("record is not an object")
    pid = obj.get("id")
    if not isinstance(pid, str) or not pid:
        raise RecordError("missing or empty id")
    title = obj.get("title")
    if not isinstance(title, str):
        raise RecordError(f"{pid}: missing title")
    pid = sys.intern(pid)

    raw_authors = obj.get("authors") or []
    if not isinstance(raw_authors, list):
        raise RecordError(f"{pid}: authors must be a list")
    authors = []
    for a in raw_authors:
        if isinstance(a, str):
            authors.append(normalize_author(None, a))
        elif isinstance(a, Mapping):
            aid = a.get("id")
            if aid is not None and not isinstance(aid, str):
                aid = str(aid)
            authors.append(normalize_author(aid, _opt_str(a.get("name"), "author name")))
        else:
            raise RecordError(f"{pid}: bad author entry")

    raw_refs = obj.get("references") or []
    if not isinstance(raw_refs, list) or not all(isinstance(r, str) for r in raw_refs):
        raise RecordError(f"{pid}: references must be a list of strings")
    seen = set()
    refs = []
    for r in raw_refs:
        if r and r != pid and r not in seen:
            seen.add(r)
            refs.append(sys.intern(r))

    abstract = _opt_str(obj.get("abstract"), "abstract")
    venue = _opt_str(obj.get("venue"), "venue")
    venue = normalize_venue(venue) or None

    page_start, page_end = _page(obj.get("page_start")), _page(obj.get("page_end"))
    if page_start is not None and page_end is not None and page_end < page_start:
        page_start = page_end = None

    return PaperRecord(
        id=pid,
        title=title,
        abstract=abstract if abstract and abstract.strip() else None,
        year=_opt_int(obj.get("year"), "year"),
        venue=venue,
        authors=tuple(authors),
        references=tuple(refs),
        citation_count=_opt_int(obj.get("n_citation"), "n_citation"),
        page_start=page_start,
        page_end=page_end,
    )


def record_to_dict(p: PaperRecord) -> dict:
    d: dict = {"id": p.id, "title": p.title}
    if p.abstract is not None:
        d["abstract"] = p.abstract
    if p.year is not None:
        d["year"] = p.year
    if p.venue is not None:
        d["venue"] = p.venue
    d["authors"] = [
        {k: v for k, v in (("id", a.author_id), ("name", a.name)) if v}
        for a in p.authors
    ]
    d["references"] = list(p.references)
    if p.citation_count is not None:
        d["n_citation"] = p.citation_count
    if p.page_start is not None:
        d["page_start"] = p.page_start
    if p.page_end is not None:
        d["page_end"] = p.page_end
    return d


def dump_json_record(p: PaperRecord) -> str:
    return json.dumps(record_to_dict(p), ensure_ascii=False, separators=(",", ":"))


_TSV_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_TSV_UNESCAPE = re.compile(r"\\(.)")


def _tsv_escape(s: str) -> str:
    return "".join(_TSV_ESCAPES.get(c, c) for c in s)


def _tsv_unescape(s: str) -> str:
    return _TSV_UNESCAPE.sub(lambda m: {"t": "\t", "n": "\n", "r": "\r"}.get(m.group(1), m.group(1)), s)


def dump_tsv_record(p: PaperRecord) -> str:
    d = record_to_dict(p)
    cols = []
    for key in TSV_COLUMNS:
        v = d.get(key)
        if v is None:
            cols.append("")
        elif key in ("authors", "references"):
            cols.append(json.dumps(v, ensure_ascii=False, separators=(",", ":")))
        elif isinstance(v, int):
            cols.append(str(v))
        else:
            cols.append(_tsv_escape(v))
    return "\t".join(cols)


def _decode_tsv(line: str) -> dict:
    cols = line.split("\t")
    if len(cols) != len(TSV_COLUMNS):
        raise RecordError(f"expected {len(TSV_COLUMNS)} columns, got {len(cols)}")
    obj: dict = {}
    for key, raw in zip(TSV_COLUMNS, cols):
        if raw == "":
            continue
        if key in ("authors", "references"):
            try:
                obj[key] = json.loads(raw)
            except json.JSONDecodeError as e:
                raise RecordError(f"bad {key} column: {e}") from None
        else:
            obj[key] = _tsv_unescape(raw)
    if "title" not in obj and cols[1] == "":
        obj["title"] = ""
    return obj


def _parse_lines(args: tuple[str, list[str]]) -> tuple[list[PaperRecord], int]:
    fmt, lines = args
    records, bad = [], 0
    for line in lines:
        try:
            if fmt == "json-lines":
                obj = json.loads(line)
            else:
                obj = _decode_tsv(line)
            records.append(record_from_dict(obj))
        except (ValueError, RecordError):
            bad += 1
    return records, bad


def _read_lines(path, fmt) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip()]
    if fmt == "tsv" and lines and lines[0].startswith("id\t"):
        lines = lines[1:]
    return lines


def resolve_threads(threads: int) -> int:
    if threads == 0:
        return os.cpu_count() or 1
    return max(1, threads)


def _reintern(p: PaperRecord) -> PaperRecord:
    # ids lose their interning when they cross a process boundary; restoring it
    # keeps memory down and makes the pickled cache independent of the shard layout
    return replace(p, id=sys.intern(p.id),
                               references=tuple(sys.intern(r) for r in p.references))


def parse_corpus(path, format: str = "json-lines", threads: int = 1) -> Corpus:
    """Parse a line-delimited dump into a :class:`Corpus`.

    With ``threads > 1`` the lines are split into contiguous shards parsed in
    worker processes; shards are merged in file order so the result does not
    depend on the worker count. A duplicated id keeps its first record and
    counts the others as malformed.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    lines = _read_lines(path, format)
    workers = resolve_threads(threads)
    if workers > 1 and len(lines) >= 2 * workers:
        size = -(-len(lines) // workers)
        shards = [(format, lines[i:i + size]) for i in range(0, len(lines), size)]
        del lines
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = [([_reintern(p) for p in records], bad)
                     for records, bad in pool.map(_parse_lines, shards)]
        n_lines = sum(len(s[1]) for s in shards)
    else:
        n_lines = len(lines)
        parts = [_parse_lines((format, lines))]

    malformed = sum(bad for _, bad in parts)
    if n_lines and malformed * 2 > n_lines:
        raise CorpusFormatError(
            f"{malformed} of {n_lines} lines in {path} are malformed; is --format {format} right?")

    kept: dict[str, PaperRecord] = {}
    for records, _ in parts:
        for p in records:
            if p.id in kept:
                malformed += 1
            else:
                kept[p.id] = p
    if malformed:
        log.warning("%s: skipped %d malformed or duplicate records", path, malformed)
    return Corpus(kept.values(), malformed=malformed)


def write_corpus(corpus: Corpus | Iterable[PaperRecord], path, format: str = "json-lines"):
    """Serialize records (in iteration order) to a line-delimited file."""
    dump = dump_json_record if format == "json-lines" else dump_tsv_record
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if format == "tsv":
            fh.write("\t".join(TSV_COLUMNS) + "\n")
        for p in corpus:
            fh.write(dump(p))
            fh.write("\n")


def save_cache(corpus: Corpus, path):
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(f"{CACHE_VERSION}\n".encode())
        pickle.dump(corpus, fh, protocol=pickle.HIGHEST_PROTOCOL)


def load_cache(path) -> Corpus:
    with open(path, "rb") as fh:
        magic = fh.readline()
        if magic != CACHE_MAGIC:
            raise CacheVersionError(f"{path} is not a corpus cache")
        version = fh.readline().strip()
        if version != str(CACHE_VERSION).encode():
            raise CacheVersionError(
                f"{path} has cache schema version {version.decode(errors='replace')}, "
                f"expected {CACHE_VERSION}; re-run ingest")
        corpus = pickle.load(fh)
    if not isinstance(corpus, Corpus):
        raise CacheVersionError(f"{path} does not contain a corpus")
    return corpus
