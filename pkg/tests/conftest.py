import random

import pytest

from twinscope.ingest import AuthorRef, Corpus, PaperRecord


def paper(pid, refs=(), title="untitled", authors=(), **kw):
    """Shorthand record builder; authors are given as plain names."""
    return PaperRecord(
        id=pid, title=title, references=tuple(refs),
        authors=tuple(AuthorRef(None, a) for a in authors), **kw)


def random_digraph_corpus(n, p, seed):
    rng = random.Random(seed)
    ids = [f"n{i:03d}" for i in range(n)]
    return Corpus(
        paper(s, [t for t in ids if t != s and rng.random() < p])
        for s in ids)


@pytest.fixture
def three_papers():
    return Corpus([paper("A", ["B"]), paper("B", ["A"]), paper("C", ["A"])])


# one line per acceptance criterion, printed after the test summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
