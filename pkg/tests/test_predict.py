"""Narrative cloze generation, scorers, and their evaluation harness."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

import oracles
from elg.embeddings import EmbeddingTable
from elg.errors import DataError
from elg.events import EventOccurrence
from elg.graph import ElgGraph, EventNode, TypedEdge
from elg.pairstats import count_pairs
from elg.predict import (
    EventChain,
    McncInstance,
    ScorerResult,
    choose,
    evaluate_mcnc,
    extract_chains,
    format_mcnc_report,
    generate_mcnc,
    load_mcnc,
    make_scorer,
    paired_ttest,
    save_mcnc,
    score_bigram,
    score_embedding,
    score_graph,
    score_pmi,
    score_random,
)


def occ(event: str, doc: str, sent: int, start: int = 0) -> EventOccurrence:
    return EventOccurrence(
        event=event, doc_id=doc, sent_index=sent, token_span=(start, start + 1),
        pred_index=start,
    )


def markov_occurrences(
    rng: np.random.Generator, n_chains: int, length: int, vocab: int, peak: float
) -> list[EventOccurrence]:
    """Chains from a sharply peaked successor matrix: state i usually hands
    off to i+1, otherwise to a uniform random state."""
    occs = []
    for d in range(n_chains):
        state = int(rng.integers(vocab))
        events = [state]
        for _ in range(length - 1):
            state = (state + 1) % vocab if rng.random() < peak else int(rng.integers(vocab))
            events.append(state)
        occs.extend(occ(f"w{e}|go|", f"d{d:05d}", s) for s, e in enumerate(events))
    return occs


def instance_graph(
    ans_prob: float, distractor_probs: list[float], beta_cycle: float = 0.3, salt: str = ""
) -> tuple[ElgGraph, McncInstance]:
    """Context node 0, answer node 1 closing a 2-cycle with the context,
    distractors 2.. reachable with comparable direct probability."""
    n = 2 + len(distractor_probs)
    keys = [f"{salt}ctx|go|", f"{salt}ans|go|"] + [
        f"{salt}d{i}|go|" for i in range(len(distractor_probs))
    ]
    nodes = [EventNode(i, keys[i], (keys[i],), 10) for i in range(n)]
    edges = [
        TypedEdge(0, 1, "sequential", support=1, probability=ans_prob),
        TypedEdge(1, 0, "sequential", support=1, probability=beta_cycle),
    ]
    for i, p in enumerate(distractor_probs):
        edges.append(TypedEdge(0, 2 + i, "sequential", support=1, probability=p))
    g = ElgGraph(nodes=nodes, edges=sorted(edges, key=lambda e: (e.src, e.dst)))
    g.validate()
    instance = McncInstance(
        context=(keys[0],), candidates=tuple(keys[1:]), answer_index=0
    )
    return g, instance


class TestChains:
    def test_one_chain_per_document(self, occurrences, corpus):
        chains = extract_chains(occurrences)
        assert [c.key for c in chains] == [d.doc_id for d in corpus.documents]

    def test_document_order_preserved(self, occurrences):
        chains = {c.key: c for c in extract_chains(occurrences)}
        assert chains["doc09"].events == (
            "inflation|rise|", "bank|raise|rate", "investor|sell|stock", "inflation|rise|"
        )
        assert chains["doc01"].events == (
            "he|enter|restaurant", "he|order|soup", "he|eat|soup", "he|pay|bill"
        )

    def test_min_len_filters(self, occurrences):
        chains = extract_chains(occurrences, min_len=5)
        assert {c.key for c in chains} == {"doc02", "doc07", "doc08", "doc10"}

    def test_short_chain_rejected(self):
        with pytest.raises(DataError, match="shorter"):
            EventChain(key="d", events=("only|one|",))


class TestGenerate:
    def test_shape_and_answer_placement(self, occurrences, counts):
        chains = extract_chains(occurrences)
        instances = generate_mcnc(chains, counts.event_freq, seed=5)
        assert len(instances) == len(chains)
        for chain, inst in zip(chains, instances):
            assert inst.context == chain.events[:-1]
            assert len(inst.candidates) == 5
            assert inst.candidates[inst.answer_index] == chain.events[-1]
            assert inst.candidates.count(chain.events[-1]) == 1
            for cand in inst.candidates:
                if cand != chain.events[-1]:
                    assert cand not in inst.context

    def test_deterministic(self, occurrences, counts):
        chains = extract_chains(occurrences)
        a = generate_mcnc(chains, counts.event_freq, seed=5)
        b = generate_mcnc(chains, counts.event_freq, seed=5)
        assert a == b

    def test_seed_changes_output(self, occurrences, counts):
        chains = extract_chains(occurrences)
        a = generate_mcnc(chains, counts.event_freq, seed=5)
        b = generate_mcnc(chains, counts.event_freq, seed=6)
        assert a != b

    def test_uniform_policy(self, occurrences, counts):
        chains = extract_chains(occurrences)
        instances = generate_mcnc(
            chains, counts.event_freq, seed=5, distractor_policy="uniform"
        )
        assert len(instances) == len(chains)

    def test_unknown_policy_rejected(self, occurrences, counts):
        chains = extract_chains(occurrences)
        with pytest.raises(ValueError):
            generate_mcnc(chains, counts.event_freq, distractor_policy="antifrequency")

    def test_small_pool_rejected(self):
        freq = {f"e{i}|go|": 1 for i in range(5)}
        chain = EventChain(key="d", events=("e0|go|", "e1|go|", "e2|go|"))
        with pytest.raises(DataError, match="distractor candidates"):
            generate_mcnc([chain], freq)

    def test_frequency_policy_prefers_heavy_events(self):
        freq = {f"e{i}|go|": 1 for i in range(20)}
        freq["heavy|go|"] = 10_000
        chains = [
            EventChain(key=f"d{i}", events=("e0|go|", "e1|go|")) for i in range(100)
        ]
        instances = generate_mcnc(chains, freq, seed=3)
        with_heavy = sum("heavy|go|" in inst.candidates for inst in instances)
        assert with_heavy >= 95


class TestChoose:
    def test_strict_argmax(self):
        assert choose([0.0, 3.0, 2.0]) == 1

    def test_tie_breaks_low_index(self):
        assert choose([1.0, 3.0, 3.0, 2.0]) == 1
        assert choose([2.0, 2.0, 2.0]) == 0

    def test_single_candidate(self):
        assert choose([0.5]) == 0


class TestRandomScorer:
    def test_one_hot(self):
        inst = McncInstance(("c|x|",), tuple(f"k{i}|x|" for i in range(5)), 0)
        scores = score_random(inst, seed=1)
        assert sorted(scores) == [0.0, 0.0, 0.0, 0.0, 1.0]

    def test_keyed_by_candidate_content(self):
        a = McncInstance(("c|x|",), tuple(f"k{i}|x|" for i in range(5)), 0)
        b = McncInstance(("other|x|",), tuple(f"k{i}|x|" for i in range(5)), 2)
        assert score_random(a, seed=1) == score_random(b, seed=1)

    def test_seed_matters(self):
        insts = [
            McncInstance(("c|x|",), tuple(f"i{j}c{i}|x|" for i in range(5)), 0)
            for j in range(50)
        ]
        first = [score_random(i, seed=0) for i in insts]
        second = [score_random(i, seed=1) for i in insts]
        assert first != second

    def test_accuracy_near_chance(self):
        insts = [
            McncInstance(
                context=(f"c{j}|x|",),
                candidates=tuple(f"i{j}c{i}|x|" for i in range(5)),
                answer_index=j % 5,
            )
            for j in range(5000)
        ]
        result = evaluate_mcnc(lambda i: score_random(i, seed=0), insts)
        assert 17.5 <= result.accuracy <= 22.5


class TestCountScorers:
    def test_bigram_matches_recount_arithmetic(self, occurrences, counts):
        ref = oracles.recount(occurrences, window=5)
        vocab = len(ref["freq"])
        ctx = "he|enter|restaurant"
        cands = (
            "he|order|soup", "he|pay|bill", "bank|raise|rate",
            "inflation|rise|", "he|eat|noodle",
        )
        inst = McncInstance((ctx,), cands, 0)
        got = score_bigram(inst, counts)
        for value, cand in zip(got, cands):
            t2 = ref["t2"].get((ctx, cand), 0)
            expected = math.log((t2 + 1) / (ref["freq"][ctx] + vocab))
            assert value == pytest.approx(expected, abs=1e-12)

    def test_pmi_matches_oracle_arithmetic(self, occurrences, counts):
        ref = oracles.recount(occurrences, window=5)
        n = sum(ref["freq"].values())
        ctx = "he|enter|restaurant"
        cands = ("he|order|soup", "he|pay|bill", "bank|raise|rate")
        inst = McncInstance((ctx,), cands, 0)
        got = score_pmi(inst, counts)
        for value, cand in zip(got, cands):
            key = tuple(sorted((ctx, cand)))
            t1 = ref["t2"].get((ctx, cand), 0) + ref["t2"].get((cand, ctx), 0)
            assert key  # unordered joint is the sum of both directions
            expected = oracles.pmi_value(
                ref["freq"][ctx], ref["freq"][cand], t1, n, epsilon=1.0
            )
            assert value == pytest.approx(expected, abs=1e-12)

    def test_unknown_candidate_scores_low(self, counts):
        inst = McncInstance(
            ("he|enter|restaurant",),
            ("he|order|soup", "never|seen|event", "he|pay|bill", "a|b|c", "x|y|z"),
            0,
        )
        scores = score_bigram(inst, counts)
        assert scores[0] > scores[1]


@pytest.fixture(scope="module")
def planted():
    rng = np.random.default_rng(42)
    occs = markov_occurrences(rng, n_chains=400, length=6, vocab=40, peak=0.9)
    counts = count_pairs(occs, window_sentences=5, n_tokens=0)
    chains = extract_chains(occs)
    instances = generate_mcnc(chains, counts.event_freq, seed=7)
    return counts, instances


class TestPlantedSignal:
    def test_bigram_beats_chance_decisively(self, planted):
        counts, instances = planted
        bigram = evaluate_mcnc(lambda i: score_bigram(i, counts), instances)
        random = evaluate_mcnc(lambda i: score_random(i, seed=0), instances)
        assert bigram.accuracy >= 60.0
        assert random.accuracy <= 30.0
        assert paired_ttest(bigram, random) < 0.01

    def test_pmi_beats_chance(self, planted):
        counts, instances = planted
        pmi_result = evaluate_mcnc(lambda i: score_pmi(i, counts), instances)
        random = evaluate_mcnc(lambda i: score_random(i, seed=0), instances)
        assert pmi_result.accuracy >= 40.0
        assert paired_ttest(pmi_result, random) < 0.01


class TestGraphScorer:
    def test_scc_bonus_flips_near_tie(self):
        g, inst = instance_graph(ans_prob=0.45, distractor_probs=[0.5, 0.4, 0.3, 0.2])
        scores = score_graph(inst, g, beta=0.1)
        assert choose(scores) == 0  # 0.45 + 0.1 beats the 0.5 distractor
        assert scores[0] == pytest.approx(0.55)
        assert scores[1] == pytest.approx(0.5)

    def test_without_bonus_the_distractor_wins(self):
        g, inst = instance_graph(ans_prob=0.45, distractor_probs=[0.5, 0.4, 0.3, 0.2])
        scores = score_graph(inst, g, beta=0.0)
        assert choose(scores) == 1

    def test_unresolvable_candidate_scores_zero(self):
        g, inst = instance_graph(ans_prob=0.45, distractor_probs=[0.2])
        stranger = McncInstance(inst.context, (*inst.candidates, "ghost|go|"), 0)
        scores = score_graph(stranger, g)
        assert scores[-1] == 0.0

    def test_similarity_link_routes_to_alternative(self):
        keys = ["ctx|go|", "cand|go|", "alt|go|"]
        nodes = [EventNode(i, k, (k,), 5) for i, k in enumerate(keys)]
        edges = [TypedEdge(0, 2, "sequential", support=1, probability=0.7)]
        g = ElgGraph(nodes=nodes, edges=edges, similarity_links=[(1, 2, 0.8)])
        g.validate()
        inst = McncInstance(("ctx|go|",), ("cand|go|", "other|go|"), 0)
        scores = score_graph(inst, g, beta=0.0)
        assert scores[0] == pytest.approx(0.7)  # no direct edge; routed via alt
        assert scores[1] == 0.0

    @pytest.mark.parametrize("trial_block", range(4))
    def test_randomized_scc_fixtures(self, trial_block):
        rng = np.random.default_rng(300 + trial_block)
        wins = 0
        trials = 50
        for t in range(trials):
            ans_prob = float(rng.uniform(0.2, 0.6))
            # direct evidence for distractors is comparable (within 0.04)
            # while the SCC bonus is 0.1, so structure should decide
            d_probs = [
                float(np.clip(ans_prob + rng.uniform(-0.04, 0.04), 0.01, 0.99))
                for _ in range(4)
            ]
            g, inst = instance_graph(ans_prob, d_probs, salt=f"t{trial_block}_{t}_")
            result = choose(score_graph(inst, g, beta=0.1))
            wins += result == inst.answer_index
        assert wins / trials >= 0.95

    def test_multi_context_accumulates(self):
        keys = ["c1|go|", "c2|go|", "ans|go|"]
        nodes = [EventNode(i, k, (k,), 5) for i, k in enumerate(keys)]
        edges = [
            TypedEdge(0, 2, "sequential", support=1, probability=0.4),
            TypedEdge(1, 2, "sequential", support=1, probability=0.3),
        ]
        g = ElgGraph(nodes=nodes, edges=edges)
        g.validate()
        inst = McncInstance(("c1|go|", "c2|go|"), ("ans|go|",), 0)
        assert score_graph(inst, g, beta=0.0)[0] == pytest.approx(0.7)


class TestEvaluateAndTtest:
    def test_accuracy_arithmetic(self):
        insts = [
            McncInstance(("c|x|",), ("a|x|", "b|x|"), i % 2) for i in range(4)
        ]
        result = evaluate_mcnc(lambda i: [1.0, 0.0], insts)
        assert result.accuracy == 50.0
        assert result.chosen == [0, 0, 0, 0]
        assert result.correct == [True, False, True, False]
        assert len(result.scores) == 4

    def test_empty_rejected(self):
        with pytest.raises(DataError, match="no instances"):
            evaluate_mcnc(lambda i: [1.0], [])

    def test_identical_results_give_p_one(self):
        r = ScorerResult(50.0, [0, 1], [True, False], [[1.0], [1.0]])
        assert paired_ttest(r, r) == 1.0

    def test_constant_nonzero_difference_gives_p_zero(self):
        a = ScorerResult(100.0, [0] * 5, [True] * 5, [[1.0]] * 5)
        b = ScorerResult(0.0, [0] * 5, [False] * 5, [[1.0]] * 5)
        assert paired_ttest(a, b) == 0.0

    def test_matches_scipy_on_varied_differences(self):
        a = ScorerResult(0.0, [0] * 8, [True, True, True, False, True, False, True, True], [])
        b = ScorerResult(0.0, [0] * 8, [False, True, False, False, True, False, False, True], [])
        expected = stats.ttest_rel(
            np.array(a.correct, dtype=float), np.array(b.correct, dtype=float)
        ).pvalue
        assert paired_ttest(a, b) == pytest.approx(float(expected), abs=1e-12)

    def test_length_mismatch_rejected(self):
        a = ScorerResult(0.0, [0], [True], [])
        b = ScorerResult(0.0, [0, 1], [True, False], [])
        with pytest.raises(ValueError):
            paired_ttest(a, b)


class TestScorerFactory:
    def test_all_names_bind(self, counts, table, fixture_graph):
        deps = {"counts": counts, "table": table, "graph": fixture_graph, "seed": 1}
        inst = McncInstance(
            ("he|enter|restaurant",),
            ("he|order|soup", "he|pay|bill", "bank|raise|rate", "a|b|c", "x|y|z"),
            0,
        )
        for name in ("random", "pmi", "bigram", "embedding", "graph"):
            scorer = make_scorer(name, **deps)
            scores = scorer(inst)
            assert len(scores) == 5

    def test_unknown_scorer_rejected(self):
        with pytest.raises(ValueError):
            make_scorer("oracle")


class TestInstanceIo:
    def test_round_trip(self, tmp_path, occurrences, counts):
        chains = extract_chains(occurrences)
        instances = generate_mcnc(chains, counts.event_freq, seed=5)
        path = tmp_path / "mcnc.tsv"
        save_mcnc(instances, path)
        assert load_mcnc(path) == instances

    def test_field_count_error(self, tmp_path):
        p = tmp_path / "bad.tsv"
        p.write_text("a b\tc d e\n", encoding="utf-8")
        with pytest.raises(DataError, match="3 tab-separated"):
            load_mcnc(p)

    def test_bad_index_error(self, tmp_path):
        p = tmp_path / "bad.tsv"
        p.write_text("a\tb c\ttwo\n", encoding="utf-8")
        with pytest.raises(DataError, match="bad answer index"):
            load_mcnc(p)

    def test_out_of_range_index_error(self, tmp_path):
        p = tmp_path / "bad.tsv"
        p.write_text("a\tb c\t5\n", encoding="utf-8")
        with pytest.raises(DataError, match="outside candidate list"):
            load_mcnc(p)

    def test_report_format(self):
        text = format_mcnc_report([("random", 20.0), ("bigram", 41.333)])
        lines = text.splitlines()
        assert lines[0].split() == ["Methods", "Accuracy(%)"]
        assert "20.00" in lines[1]
        assert "41.33" in lines[2]
