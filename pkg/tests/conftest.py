"""Shared fixtures: the hand-built corpus and artifacts derived from it.

Session scope keeps skip-gram training and counting to one run; every
fixture below is treated as read-only by the tests.
"""

from __future__ import annotations

from pathlib import Path

import pytest

from elg.causality import default_rules_path, extract_causal_mentions, load_rules, resolve_mentions
from elg.corpus import load_corpus
from elg.embeddings import train_skipgram
from elg.events import extract_corpus_events
from elg.graph import build_graph
from elg.pairstats import count_pairs, gather_contexts
from elg.seqrel import build_dataset, load_annotations

DATA_DIR = Path(__file__).parent / "data"

WINDOW = 5


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(DATA_DIR / "fixture_corpus.conllu")


@pytest.fixture(scope="session")
def occurrences(corpus):
    return extract_corpus_events(corpus)


@pytest.fixture(scope="session")
def counts(corpus, occurrences):
    return count_pairs(occurrences, window_sentences=WINDOW, n_tokens=corpus.n_tokens)


@pytest.fixture(scope="session")
def contexts(corpus, occurrences):
    return gather_contexts(corpus, occurrences, window_sentences=WINDOW)


@pytest.fixture(scope="session")
def table(corpus):
    return train_skipgram(
        corpus, dim=16, window=3, epochs=8, negative_samples=3, seed=11, min_count=1
    )


@pytest.fixture(scope="session")
def dataset(counts, contexts, table):
    rows = load_annotations(DATA_DIR / "annotations.tsv")
    return build_dataset(rows, counts, contexts, table)


@pytest.fixture(scope="session")
def mentions(corpus):
    rules = load_rules(default_rules_path())
    sentences = {(s.doc_id, s.sent_index): s for s in corpus.iter_sentences()}
    found = extract_causal_mentions(corpus.iter_sentences(), rules)
    return resolve_mentions(found, sentences)


def classified_pairs(counts):
    """Directed sequential pairs: every co-occurring pair, majority order."""
    out = []
    for a, b in counts.unordered_pairs():
        src, dst = (a, b) if counts.t2(a, b) >= counts.t3(a, b) else (b, a)
        out.append((src, dst))
    return sorted(out)


@pytest.fixture(scope="session")
def fixture_graph(counts, contexts, mentions):
    """Unmerged graph over the fixture corpus: one node per extracted event.

    Merging on a 10-document corpus is hostage to embedding noise, so the
    merge path is exercised separately with hand-built vector tables.
    """
    return build_graph(classified_pairs(counts), mentions, counts, contexts=contexts)
