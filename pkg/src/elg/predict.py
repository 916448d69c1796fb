"""Multiple-choice narrative cloze over per-document event chains.

Each instance hides the last event of a chain among four distractors drawn
from the vocabulary (frequency-proportional by default, never from the
context or the answer). Scorers return one score per candidate; the chosen
candidate is the argmax with ties broken by the lowest index, so every scorer
except the random one is invariant to candidate order.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .embeddings import EmbeddingTable, cosine, embed_event
from .errors import DataError
from .events import EventOccurrence
from .graph import ElgGraph, scc_index
from .pairstats import PairCounts, pmi, _ordered_doc_streams

N_CANDIDATES = 5


@dataclass(frozen=True)
class EventChain:
    key: str  # document id
    events: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.events) < 2:
            raise DataError(f"chain {self.key!r} shorter than 2 events")


@dataclass(frozen=True)
class McncInstance:
    context: tuple[str, ...]
    candidates: tuple[str, ...]
    answer_index: int


@dataclass
class ScorerResult:
    accuracy: float
    chosen: list[int]
    correct: list[bool]
    scores: list[list[float]]


def extract_chains(occurrences: Sequence[EventOccurrence], min_len: int = 2) -> list[EventChain]:
    """Document-order event sequences, one chain per document."""
    chains = []
    for doc_occs in _ordered_doc_streams(occurrences):
        if len(doc_occs) >= min_len:
            chains.append(
                EventChain(key=doc_occs[0].doc_id, events=tuple(o.event for o in doc_occs))
            )
    return sorted(chains, key=lambda c: c.key)


def generate_mcnc(
    chains: Sequence[EventChain],
    freq: dict[str, int],
    n_candidates: int = N_CANDIDATES,
    seed: int = 0,
    distractor_policy: str = "frequency",
) -> list[McncInstance]:
    """One instance per chain with seeded distractor sampling and shuffling."""
    if distractor_policy not in ("frequency", "uniform"):
        raise ValueError(f"unknown distractor policy {distractor_policy!r}")
    vocab = sorted(freq)
    rng = np.random.default_rng(seed)
    instances = []
    for chain in chains:
        context = chain.events[:-1]
        answer = chain.events[-1]
        excluded = set(context) | {answer}
        pool = [k for k in vocab if k not in excluded]
        need = n_candidates - 1
        if len(pool) < need:
            raise DataError(
                f"vocabulary leaves {len(pool)} distractor candidates; need {need}"
            )
        if distractor_policy == "frequency":
            weights = np.array([freq[k] for k in pool], dtype=float)
            weights /= weights.sum()
        else:
            weights = None
        picked = rng.choice(len(pool), size=need, replace=False, p=weights)
        candidates = [pool[i] for i in picked] + [answer]
        order = rng.permutation(n_candidates)
        shuffled = [candidates[i] for i in order]
        instances.append(
            McncInstance(
                context=tuple(context),
                candidates=tuple(shuffled),
                answer_index=shuffled.index(answer),
            )
        )
    return instances


def choose(scores: Sequence[float]) -> int:
    """Argmax with the documented lowest-index tie-break."""
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


def score_random(instance: McncInstance, seed: int = 0) -> list[float]:
    """Uniform pick; deterministic per (instance content, seed)."""
    digest = zlib.crc32("\t".join(instance.candidates).encode("utf-8"))
    rng = np.random.default_rng([seed, digest])
    pick = int(rng.integers(len(instance.candidates)))
    return [1.0 if i == pick else 0.0 for i in range(len(instance.candidates))]


def score_pmi(instance: McncInstance, counts: PairCounts, epsilon: float = 1.0) -> list[float]:
    """Sum of smoothed event-event PMI between each context event and the candidate."""
    n = max(counts.n_events, 1)
    out = []
    for cand in instance.candidates:
        total = 0.0
        for ctx in instance.context:
            total += pmi(counts.t4(ctx), counts.t4(cand), counts.t1(ctx, cand), n, epsilon)
        out.append(total)
    return out


def score_bigram(instance: McncInstance, counts: PairCounts) -> list[float]:
    """Sum of add-one-smoothed log P(candidate | context event) over the context."""
    vocab_size = max(len(counts.event_freq), 1)
    out = []
    for cand in instance.candidates:
        total = 0.0
        for ctx in instance.context:
            total += math.log((counts.t2(ctx, cand) + 1) / (counts.t4(ctx) + vocab_size))
        out.append(total)
    return out


def score_embedding(instance: McncInstance, table: EmbeddingTable) -> list[float]:
    """Cosine of each candidate against the mean context event vector."""
    context_vecs = [embed_event(e, table).vec for e in instance.context]
    mean = np.mean(context_vecs, axis=0) if context_vecs else np.zeros(table.dim)
    return [float(cosine(embed_event(c, table).vec, mean)) for c in instance.candidates]


def score_graph(instance: McncInstance, graph: ElgGraph, beta: float = 0.1) -> list[float]:
    """Accumulated sequential transition probability plus a shared-SCC bonus.

    Keys resolve by exact surface-form match. A context-candidate hop missing
    a direct edge may route through the candidate's similarity links;
    unresolvable candidates score 0.
    """
    index = graph.node_index()
    lookup = {(e.src, e.dst): e.probability or 0.0 for e in graph.edges
              if e.relation == "sequential"}
    linked: dict[int, list[int]] = {}
    for a, b, _score in graph.similarity_links:
        linked.setdefault(a, []).append(b)
        linked.setdefault(b, []).append(a)
    component = scc_index(graph, relation_filter="sequential")
    context_nodes = [index[e] for e in instance.context if e in index]
    out = []
    for cand in instance.candidates:
        node = index.get(cand)
        if node is None:
            out.append(0.0)
            continue
        total = 0.0
        for ctx_node in context_nodes:
            direct = lookup.get((ctx_node, node))
            if direct is None:
                routed = [lookup[(ctx_node, alt)] for alt in linked.get(node, [])
                          if (ctx_node, alt) in lookup]
                direct = max(routed) if routed else 0.0
            total += direct
        if any(component.get(node) == component.get(c) for c in context_nodes):
            total += beta
        out.append(total)
    return out


def make_scorer(name: str, **deps) -> Callable[[McncInstance], list[float]]:
    """Bind a scorer's dependencies; the result maps an instance to scores."""
    if name == "random":
        seed = deps.get("seed", 0)
        return lambda inst: score_random(inst, seed=seed)
    if name == "pmi":
        counts = deps["counts"]
        return lambda inst: score_pmi(inst, counts)
    if name == "bigram":
        counts = deps["counts"]
        return lambda inst: score_bigram(inst, counts)
    if name == "embedding":
        table = deps["table"]
        return lambda inst: score_embedding(inst, table)
    if name == "graph":
        graph = deps["graph"]
        beta = deps.get("beta", 0.1)
        return lambda inst: score_graph(inst, graph, beta=beta)
    raise ValueError(f"unknown scorer {name!r}")


SCORER_NAMES = ("random", "pmi", "bigram", "embedding", "graph")


def evaluate_mcnc(
    scorer: Callable[[McncInstance], list[float]], instances: Sequence[McncInstance]
) -> ScorerResult:
    if not instances:
        raise DataError("no instances to evaluate")
    chosen: list[int] = []
    correct: list[bool] = []
    scores: list[list[float]] = []
    for inst in instances:
        s = [float(v) for v in scorer(inst)]
        pick = choose(s)
        chosen.append(pick)
        correct.append(pick == inst.answer_index)
        scores.append(s)
    accuracy = 100.0 * sum(correct) / len(correct)
    return ScorerResult(accuracy=accuracy, chosen=chosen, correct=correct, scores=scores)


def paired_ttest(a: ScorerResult, b: ScorerResult) -> float:
    """Two-sided paired t-test p-value over per-instance correctness."""
    if len(a.correct) != len(b.correct):
        raise ValueError("results cover different instance counts")
    diff = np.array(a.correct, dtype=float) - np.array(b.correct, dtype=float)
    n = len(diff)
    if n < 2 or float(diff.std(ddof=1)) == 0.0:
        return 1.0 if np.allclose(diff, 0.0) else 0.0
    t_stat = diff.mean() / (diff.std(ddof=1) / math.sqrt(n))
    return float(2.0 * stats.t.sf(abs(t_stat), df=n - 1))


def save_mcnc(instances: Sequence[McncInstance], path: str | Path) -> None:
    """One instance per line: context keys, candidate keys, answer index."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(
                "\t".join(
                    [" ".join(inst.context), " ".join(inst.candidates), str(inst.answer_index)]
                )
                + "\n"
            )


def load_mcnc(path: str | Path) -> list[McncInstance]:
    instances = []
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}:{n}: expected 3 tab-separated fields")
            context = tuple(parts[0].split()) if parts[0] else ()
            candidates = tuple(parts[1].split())
            try:
                answer = int(parts[2])
            except ValueError as exc:
                raise DataError(f"{path}:{n}: bad answer index") from exc
            if not 0 <= answer < len(candidates):
                raise DataError(f"{path}:{n}: answer index outside candidate list")
            instances.append(
                McncInstance(context=context, candidates=candidates, answer_index=answer)
            )
    return instances


def format_mcnc_report(rows: Sequence[tuple[str, float]]) -> str:
    """Two-column table: Methods, Accuracy(%)."""
    header = ("Methods", "Accuracy(%)")
    body = [(name, f"{acc:.2f}") for name, acc in rows]
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(2)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
