import json

import pytest
from hypothesis import given, settings, strategies as st

from twinscope.ingest import (AuthorRef, CacheVersionError, Corpus, CorpusFormatError,
                              PaperRecord, RecordError, load_cache, normalize_author,
                              normalize_venue, parse_corpus, save_cache, write_corpus)
from twinscope.synthetic import SynthConfig, generate


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def test_three_line_file(tmp_path):
    f = write_lines(tmp_path / "c.jsonl", [
        json.dumps({"id": "A", "title": "a", "references": ["B"]}),
        json.dumps({"id": "B", "title": "b", "references": ["A"]}),
        json.dumps({"id": "C", "title": "c", "references": ["A"]}),
    ])
    corpus = parse_corpus(f, "json-lines")
    assert len(corpus) == 3
    assert dict(corpus.in_citation_index) == {"A": 2, "B": 1}
    assert corpus.malformed == 0


def test_empty_file(tmp_path):
    f = write_lines(tmp_path / "e.jsonl", [])
    corpus = parse_corpus(f)
    assert len(corpus) == 0 and corpus.malformed == 0


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(OSError):
        parse_corpus(tmp_path / "nope.jsonl")


def test_full_record_fields(tmp_path):
    rec = {"id": "x1", "title": "T", "abstract": "some words", "year": 2001,
           "venue": "  Symposium on the   Theory of Computing ",
           "authors": [{"id": "a9", "name": " Jane  DOE "}, {"name": "Bob"}],
           "references": ["x2", "x2", "x1", "zz"], "n_citation": 12,
           "page_start": "10", "page_end": "19"}
    corpus = parse_corpus(write_lines(tmp_path / "f.jsonl", [json.dumps(rec)]))
    p = corpus["x1"]
    assert p.venue == "symposium on the theory of computing"
    assert p.authors == (AuthorRef("a9", "jane doe"), AuthorRef(None, "bob"))
    # duplicates and self-references are dropped, dangling ones kept
    assert p.references == ("x2", "zz")
    assert corpus.in_citation_index == {}
    assert (p.citation_count, p.page_start, p.page_end, p.year) == (12, 10, 19, 2001)


def test_malformed_lines_are_counted(tmp_path):
    good = [json.dumps({"id": f"p{i}", "title": "t"}) for i in range(4)]
    bad = ["{not json", json.dumps({"title": "no id"}), json.dumps({"id": "p0", "title": "dup"})]
    corpus = parse_corpus(write_lines(tmp_path / "m.jsonl", good + bad))
    assert len(corpus) == 4
    assert corpus.malformed == 3
    assert corpus["p0"].title == "t"


def test_author_without_id_or_name_skips_record(tmp_path):
    lines = [json.dumps({"id": "a", "title": "t", "authors": [{"name": "  "}]}),
             json.dumps({"id": "b", "title": "t"}), json.dumps({"id": "c", "title": "t"})]
    corpus = parse_corpus(write_lines(tmp_path / "a.jsonl", lines))
    assert "a" not in corpus and corpus.malformed == 1


def test_mostly_malformed_is_fatal(tmp_path):
    lines = ["garbage"] * 3 + [json.dumps({"id": "a", "title": "t"})]
    with pytest.raises(CorpusFormatError):
        parse_corpus(write_lines(tmp_path / "g.jsonl", lines))


def test_wrong_format_flag_is_fatal(tmp_path):
    lines = [json.dumps({"id": f"p{i}", "title": "t"}) for i in range(5)]
    with pytest.raises(CorpusFormatError):
        parse_corpus(write_lines(tmp_path / "w.jsonl", lines), "tsv")


def test_tsv_round_trip(tmp_path):
    corpus, _ = generate(SynthConfig(n_papers=300, seed=4))
    extra = PaperRecord("oddé", "tab\there\nnewline \\ back", abstract="a\tb",
                        authors=(AuthorRef("i|d", "x;y"),), references=("p001",))
    corpus = Corpus(list(corpus) + [extra])
    path = tmp_path / "c.tsv"
    write_corpus(corpus, path, "tsv")
    assert parse_corpus(path, "tsv") == corpus


def test_round_trip_1000_generated_records(tmp_path):
    corpus, _ = generate(SynthConfig(n_papers=1000, seed=11))
    first = tmp_path / "a.jsonl"
    write_corpus(corpus, first)
    parsed = parse_corpus(first)
    second = tmp_path / "b.jsonl"
    write_corpus(parsed, second)
    reparsed = parse_corpus(second)
    assert parsed == corpus
    assert reparsed == parsed
    assert first.read_bytes() == second.read_bytes()


def test_parse_is_deterministic_and_thread_invariant(tmp_path):
    corpus, _ = generate(SynthConfig(n_papers=400, seed=2))
    path = tmp_path / "c.jsonl"
    write_corpus(corpus, path)
    with path.open("a") as fh:
        fh.write("broken\n")
        fh.write(json.dumps({"id": next(iter(corpus)).id, "title": "late duplicate"}) + "\n")
    one = parse_corpus(path, threads=1)
    again = parse_corpus(path, threads=1)
    many = parse_corpus(path, threads=3)
    assert one == again == many
    assert one.malformed == 2
    assert one.fingerprint() == many.fingerprint()


def test_reference_counts_balance():
    corpus, _ = generate(SynthConfig(n_papers=500, seed=5))
    internal = sum(1 for p in corpus for r in p.references if r in corpus)
    assert internal == sum(corpus.in_citation_index.values())
    # full rescan
    for pid, n in corpus.in_citation_index.items():
        assert n == sum(1 for p in corpus if pid in p.references)


def test_record_invariants():
    with pytest.raises(RecordError):
        PaperRecord("", "t")
    with pytest.raises(RecordError):
        PaperRecord("a", "t", references=("a",))
    with pytest.raises(RecordError):
        PaperRecord("a", "t", references=("b", "b"))
    with pytest.raises(RecordError):
        PaperRecord("a", "t", year=0)
    with pytest.raises(RecordError):
        PaperRecord("a", "t", page_start=5, page_end=4)
    with pytest.raises(RecordError):
        Corpus([PaperRecord("a", "t"), PaperRecord("a", "u")])


def test_inverted_pages_are_dropped_on_ingest(tmp_path):
    lines = [json.dumps({"id": "a", "title": "t", "page_start": 9, "page_end": 3})]
    p = parse_corpus(write_lines(tmp_path / "p.jsonl", lines))["a"]
    assert p.page_start is None and p.page_end is None


@pytest.mark.parametrize("raw, expected", [
    ("  Symposium on the   Theory of Computing ", "symposium on the theory of computing"),
    ("NeurIPS", "neurips"),
    ("", ""),
    ("(ICML).", "icml"),
])
def test_normalize_venue(raw, expected):
    assert normalize_venue(raw) == expected


@settings(max_examples=1000)
@given(st.text())
def test_normalize_venue_idempotent(s):
    once = normalize_venue(s)
    assert normalize_venue(once) == once


def test_normalize_author():
    assert normalize_author(None, "  John  SMITH ") == AuthorRef(None, "john smith")
    assert normalize_author("a17", "") == AuthorRef("a17", "")
    with pytest.raises(RecordError):
        normalize_author(None, "   ")


@settings(max_examples=1000)
@given(st.one_of(st.none(), st.text(min_size=1)), st.text())
def test_normalize_author_idempotent(aid, name):
    try:
        once = normalize_author(aid, name)
    except RecordError:
        return
    assert normalize_author(once.author_id, once.name) == once
    assert once.author_id == (aid or None)


def test_cache_round_trip_and_version_check(tmp_path):
    corpus, _ = generate(SynthConfig(n_papers=200, seed=1))
    path = tmp_path / "c.bin"
    save_cache(corpus, path)
    loaded = load_cache(path)
    assert loaded == corpus
    assert loaded.fingerprint() == corpus.fingerprint()
    data = path.read_bytes().replace(b"\n1\n", b"\n99\n", 1)
    path.write_bytes(data)
    with pytest.raises(CacheVersionError):
        load_cache(path)
    (tmp_path / "junk.bin").write_bytes(b"hello")
    with pytest.raises(CacheVersionError):
        load_cache(tmp_path / "junk.bin")


def test_citers_index(three_papers):
    assert sorted(three_papers.citers("A")) == ["B", "C"]
    assert list(three_papers.citers("C")) == []
