"""Skip-gram training, event composition, and the vector file format."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elg.corpus import Document, ParsedCorpus, ParsedSentence, Token
from elg.embeddings import (
    EmbeddingTable,
    cosine,
    embed_event,
    load_vectors,
    save_vectors,
    train_skipgram,
)
from elg.errors import EmptyCorpusError


def toy_sentence(words, doc_id, sent_index):
    tokens = tuple(
        Token(i + 1, w, w, "NOUN", 0 if i == 0 else 1, "root" if i == 0 else "dep")
        for i, w in enumerate(words)
    )
    return ParsedSentence(tokens=tokens, doc_id=doc_id, sent_index=sent_index)


def toy_corpus(sentences_words):
    docs = []
    for d, words_list in enumerate(sentences_words):
        sents = tuple(toy_sentence(ws, f"d{d}", i) for i, ws in enumerate(words_list))
        docs.append(Document(doc_id=f"d{d}", sentences=sents))
    return ParsedCorpus(documents=tuple(docs))


class TestCosine:
    def test_identical_vectors(self):
        v = np.array([1.0, 2.0, 3.0])
        assert cosine(v, v) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(0.0)

    def test_opposite(self):
        v = np.array([0.5, -2.0])
        assert cosine(v, -v) == pytest.approx(-1.0)

    def test_zero_vector_gives_zero(self):
        assert cosine(np.zeros(3), np.array([1.0, 2.0, 3.0])) == 0.0

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError):
            cosine(np.zeros(2), np.zeros(3))

    @given(
        st.lists(st.floats(-100, 100), min_size=2, max_size=8),
        st.floats(0.01, 50),
    )
    def test_symmetry_and_scale_invariance(self, values, alpha):
        u = np.array(values)
        v = np.arange(1.0, len(values) + 1.0)
        assert cosine(u, v) == pytest.approx(cosine(v, u))
        assert cosine(alpha * u, v) == pytest.approx(cosine(u, v), abs=1e-9)

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=8))
    def test_bounded(self, values):
        u = np.array(values)
        v = np.ones(len(values))
        assert -1.0 - 1e-9 <= cosine(u, v) <= 1.0 + 1e-9


class TestTraining:
    def test_deterministic_given_seed(self, corpus):
        kwargs = dict(dim=8, window=2, epochs=2, negative_samples=2, seed=5, min_count=1)
        t1 = train_skipgram(corpus, **kwargs)
        t2 = train_skipgram(corpus, **kwargs)
        assert t1.vocab == t2.vocab
        assert np.array_equal(t1.vectors, t2.vectors)

    def test_different_seed_changes_vectors(self, corpus):
        kwargs = dict(dim=8, window=2, epochs=2, negative_samples=2, min_count=1)
        t1 = train_skipgram(corpus, seed=1, **kwargs)
        t2 = train_skipgram(corpus, seed=2, **kwargs)
        assert not np.array_equal(t1.vectors, t2.vectors)

    def test_finite_one_dimensional(self):
        corpus = toy_corpus([[["only", "one", "sentence", "here"]]])
        table = train_skipgram(corpus, dim=1, window=2, epochs=1, min_count=1, seed=0)
        assert table.dim == 1
        assert np.isfinite(table.vectors).all()

    def test_min_count_prunes_vocabulary(self, corpus):
        table = train_skipgram(corpus, dim=4, window=2, epochs=1, min_count=3, seed=0)
        assert "nuclear" not in table.vocab  # single occurrence
        assert "he" in table.vocab

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpusError):
            train_skipgram(ParsedCorpus(documents=()), dim=4, min_count=1)

    def test_distributional_synonyms_align(self):
        # coffee and tea appear in identical contexts; brick never does
        frames = [
            ["i", "drink", "hot", "{}", "every", "morning"],
            ["a", "cup", "of", "{}", "is", "nice"],
            ["she", "made", "some", "{}", "today"],
            ["we", "bought", "fresh", "{}", "downtown"],
        ]
        sents = []
        for word in ("coffee", "tea"):
            for frame in frames * 6:
                sents.append([w.format(word) for w in frame])
        sents.append(["the", "brick", "wall", "fell", "over", "hard"])
        sents.append(["a", "brick", "house", "stood", "there", "alone"])
        corpus = toy_corpus([sents])
        table = train_skipgram(
            corpus, dim=24, window=2, epochs=12, negative_samples=4, seed=3, min_count=1
        )
        coffee, tea, brick = (table.vector(w) for w in ("coffee", "tea", "brick"))
        assert cosine(coffee, tea) > cosine(coffee, brick)

    def test_vocab_indices_dense(self, table):
        indices = sorted(table.vocab.values())
        assert indices == list(range(len(table.vocab)))


class TestEventComposition:
    def make_table(self):
        vocab = {"a": 0, "b": 1, "c": 2}
        vectors = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        return EmbeddingTable(dim=2, vocab=vocab, vectors=vectors)

    def test_mean_of_slot_lemmas(self):
        ev = embed_event("a|b|c", self.make_table())
        assert np.allclose(ev.vec, [2.0 / 3.0, 2.0 / 3.0])
        assert not ev.oov

    def test_oov_lemmas_skipped(self):
        ev = embed_event("a|b|zzz", self.make_table())
        assert np.allclose(ev.vec, [0.5, 0.5])

    def test_all_oov_flagged_zero(self):
        ev = embed_event("x|y|z", self.make_table())
        assert np.allclose(ev.vec, [0.0, 0.0])
        assert ev.oov

    def test_single_invocab_predicate_is_identity(self):
        ev = embed_event("|a|", self.make_table())
        assert np.allclose(ev.vec, [1.0, 0.0])

    def test_slot_order_within_key_irrelevant_to_mean(self):
        table = self.make_table()
        assert np.allclose(embed_event("a_b|c|", table).vec, embed_event("b_a|c|", table).vec)


class TestVectorFile:
    def test_round_trip_exact(self, table, tmp_path):
        path = tmp_path / "vectors.txt"
        save_vectors(table, path)
        again = load_vectors(path)
        assert again.dim == table.dim
        assert again.vocab == table.vocab
        assert np.array_equal(again.vectors, table.vectors)

    def test_header_line_format(self, table, tmp_path):
        path = tmp_path / "vectors.txt"
        save_vectors(table, path)
        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header == f"{len(table.vocab)} {table.dim}"
