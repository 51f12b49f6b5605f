import random

import pytest
from hypothesis import given, settings, strategies as st

from twinscope.diagnostics import (Histogram, abstract_distance_report, bow_distance, bow_tokens,
                                   collab_distance_report, sample_random_pairs,
                                   year_gap_histogram)
from twinscope.ingest import Corpus
from twinscope.synthetic import SynthConfig, generate
from twinscope.twin_graph import TwinPair, detect_twins

from conftest import paper


def twin_corpus(specs):
    """specs: list of (kwargs for first, kwargs for second) twin pairs."""
    papers = []
    for i, (ka, kb) in enumerate(specs):
        a, b = f"a{i}", f"b{i}"
        papers += [paper(a, [b], **ka), paper(b, [a], **kb)]
    return Corpus(papers)


def test_year_gap_fraction():
    corpus = twin_corpus([({"year": 2000}, {"year": 2000}), ({"year": 2001}, {"year": 2001}),
                          ({"year": 2005}, {"year": 2004}), ({"year": 1990}, {"year": 1993}),
                          ({"year": 1990}, {})])
    rep = year_gap_histogram(detect_twins(corpus), corpus)
    assert rep.same_or_next_year_fraction == 0.75
    assert rep.n_missing_year == 1
    assert rep.histogram.counts == (2, 1, 0, 1)
    assert rep.histogram.n == 4


def test_histogram_conservation():
    rng = random.Random(0)
    values = [rng.uniform(-1, 12) for _ in range(1000)]
    h = Histogram.from_values(values, range(11))
    assert h.n == 1000
    assert h.underflow == sum(v < 0 for v in values)
    assert h.overflow == sum(v >= 10 for v in values)
    for f in (1, 2, 3, 7, 20):
        assert h.rebin(f).n == 1000
        assert sum(h.rebin(f).counts) == sum(h.counts)
    with pytest.raises(ValueError):
        Histogram((0, 0, 1), (1, 1))


def test_bow_tokens():
    assert bow_tokens("Hello, World! (foo) bar-baz ...") == ["hello", "world", "foo", "bar-baz"]


@pytest.mark.parametrize("a, b, expected", [
    ("graph neural nets", "graph neural nets", 0.0),
    ("alpha beta", "gamma delta", 2.0),
    ("a b", "a c", 1.0),
    ("", "", 0.0),
    ("", "words", 2.0),
    ("x x y", "x y y", 2 / 3),
])
def test_bow_distance_values(a, b, expected):
    assert bow_distance(a, b) == pytest.approx(expected, abs=1e-15)


def test_bow_identity_is_multiset_level():
    assert bow_distance("b a a", "A, a b.") == 0.0
    # same proportions, different counts
    assert bow_distance("a b", "a a b b") == 0.0


words = st.lists(st.sampled_from(["a", "b", "c", "d", "e.", "F"]), max_size=8).map(" ".join)


@settings(max_examples=300)
@given(words, words, words)
def test_bow_metric_properties(x, y, z):
    dxy = bow_distance(x, y)
    assert 0.0 <= dxy <= 2.0
    assert dxy == bow_distance(y, x)
    assert dxy <= bow_distance(x, z) + bow_distance(z, y) + 1e-12


def test_random_pairs_deterministic_and_exclude_twins():
    ids = [f"p{i}" for i in range(5)]
    twins_corpus = twin_corpus([({}, {})])
    twins = detect_twins(twins_corpus)
    pairs = sample_random_pairs(["a0", "b0", "c", "d"], 200, seed=3, exclude=twins)
    assert all(TwinPair.of(a, b) not in twins for a, b in pairs)
    assert all(a != b for a, b in pairs)
    assert pairs == sample_random_pairs(["a0", "b0", "c", "d"], 200, seed=3, exclude=twins)
    assert sample_random_pairs(ids, 50, 1) != sample_random_pairs(ids, 50, 2)
    with pytest.raises(ValueError):
        sample_random_pairs(ids, 0, 1)


def test_identical_abstracts_degenerate_at_zero():
    corpus = twin_corpus([({"abstract": "same text"}, {"abstract": "same text"})] * 1 +
                         [({"abstract": "same text"}, {"abstract": "same text"}) for _ in range(5)])
    rep = abstract_distance_report(detect_twins(corpus), corpus, 30, seed=1)
    assert rep.twins.counts[0] == 6 and rep.twins.n == 6
    assert rep.random.counts[0] == 30 and rep.random.n == 30
    assert rep.mean_gap == 0.0


def test_abstract_report_same_seed_identical():
    corpus, _ = generate(SynthConfig(n_papers=600, seed=3))
    twins = detect_twins(corpus)
    assert abstract_distance_report(twins, corpus, 100, 9) == abstract_distance_report(twins, corpus, 100, 9)


def test_collab_single_author_structure():
    corpus = twin_corpus([({"authors": ["u"]}, {"authors": ["u"]}),
                          ({"authors": ["v"]}, {"authors": ["w"]}),
                          ({"authors": ["x"]}, {"authors": []})])
    rep = collab_distance_report(detect_twins(corpus), corpus, 200, seed=4)
    assert rep.twins.counts[0] == 1 and rep.twins.n == 1
    assert rep.twin_unreachable == 1
    assert rep.twin_no_authors == 1
    # random pairs can only be finite when both papers are the u-twins
    assert rep.random.n == 0 or set(rep.random.counts[1:]) == {0}


def test_collab_report_deterministic():
    corpus, _ = generate(SynthConfig(n_papers=600, seed=5))
    twins = detect_twins(corpus)
    assert collab_distance_report(twins, corpus, 100, 2) == collab_distance_report(twins, corpus, 100, 2)
