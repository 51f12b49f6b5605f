import math

import pytest
from hypothesis import given, strategies as st

from twinscope.ingest import Corpus
from twinscope.outcomes import OutcomeConfigError, compute_outcomes, outcome_value

from conftest import paper


def corpus_with_counts(counts):
    return Corpus(paper(f"p{i}", citation_count=c) for i, c in enumerate(counts))


def test_log2_values():
    t = compute_outcomes(corpus_with_counts([7, 0]), smoothing=1)
    assert t["p0"] == 3.0
    assert t["p1"] == 0.0


def test_zero_smoothing_rejects_zero_counts():
    with pytest.raises(OutcomeConfigError, match="2 papers"):
        compute_outcomes(corpus_with_counts([0, 3, 0]), smoothing=0)
    t = compute_outcomes(corpus_with_counts([1, 4]), smoothing=0)
    assert (t["p0"], t["p1"]) == (0.0, 2.0)


def test_negative_smoothing_rejected():
    with pytest.raises(OutcomeConfigError):
        compute_outcomes(corpus_with_counts([1]), smoothing=-1)


def test_citation_sources(three_papers):
    # no n_citation in the fixture: auto falls back to in-corpus counts
    auto = compute_outcomes(three_papers)
    assert auto["A"] == math.log2(3) and auto["B"] == 1.0 and auto["C"] == 0.0
    assert len(compute_outcomes(three_papers, source="snapshot")) == 0
    mixed = Corpus([paper("a", ["b"], citation_count=15), paper("b", ["a"])])
    assert compute_outcomes(mixed)["a"] == 4.0
    assert compute_outcomes(mixed, source="internal")["a"] == 1.0
    assert compute_outcomes(mixed)["b"] == 1.0
    with pytest.raises(ValueError):
        compute_outcomes(mixed, source="web")


@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=50))
def test_doubling_counts(counts):
    base = compute_outcomes(corpus_with_counts(counts), smoothing=1)
    doubled = compute_outcomes(corpus_with_counts([2 * c for c in counts]), smoothing=1)
    for pid in base.values:
        assert 0 <= doubled[pid] - base[pid] <= 1.0 + 1e-12


@given(st.lists(st.integers(1, 10**6), min_size=1, max_size=50))
def test_doubling_counts_without_smoothing_adds_one(counts):
    base = compute_outcomes(corpus_with_counts(counts), smoothing=0)
    doubled = compute_outcomes(corpus_with_counts([2 * c for c in counts]), smoothing=0)
    for pid in base.values:
        assert doubled[pid] - base[pid] == pytest.approx(1.0, abs=1e-12)


@given(st.integers(0, 10**9), st.integers(0, 10**9), st.floats(0.5, 10))
def test_monotone(a, b, s):
    if a > b:
        assert outcome_value(a, s) > outcome_value(b, s)
