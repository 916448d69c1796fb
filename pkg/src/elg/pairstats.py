"""Ordered event co-occurrence counting, pair features, and transition probabilities.

Counting scheme
---------------
Co-occurrences are counted within a document, per unordered event pair, by
greedy occurrence matching: occurrences are visited in text order and each one
is paired with the nearest *following* unused occurrence of the partner event
within ``window_sentences``. An occurrence therefore contributes at most one
count per partner event, which guarantees

    t2(A, B) <= min(f(A), f(B))  and so  t1(A, B) <= min(f(A), f(B)),

keeping the transition probability f(A,B)/f(A) inside [0, 1]. Same-event pairs
are not counted. All counting is per document, so counts over disjoint
document sets merge associatively.

PMI features use add-epsilon smoothing with the event-pair joint count and
slot-specific marginals; zero denominators in ratio features yield 0.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .corpus import ParsedCorpus
from .embeddings import EmbeddingTable, embed_event
from .errors import DataError
from .events import EventOccurrence, object_of, predicate_of

# UD tag inventory; fixed width so C4 is a stable classifier input
DEFAULT_POS_INVENTORY = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)

GROUP_ORDER = ("frequency", "ratio", "context", "pmi")


@dataclass
class PairCounts:
    """Directed co-occurrence counts plus per-event and per-argument frequencies."""

    directed: dict[tuple[str, str], int] = field(default_factory=dict)
    event_freq: dict[str, int] = field(default_factory=dict)
    verb_freq: dict[str, int] = field(default_factory=dict)
    obj_freq: dict[str, int] = field(default_factory=dict)
    n_events: int = 0
    n_pairs: int = 0
    n_tokens: int = 0

    def t2(self, a: str, b: str) -> int:
        """Count of co-occurrences with a before b."""
        return self.directed.get((a, b), 0)

    def t3(self, a: str, b: str) -> int:
        return self.directed.get((b, a), 0)

    def t1(self, a: str, b: str) -> int:
        return self.t2(a, b) + self.t3(a, b)

    def t4(self, a: str) -> int:
        return self.event_freq.get(a, 0)

    def unordered_pairs(self) -> list[tuple[str, str]]:
        """Distinct co-occurring pairs, each once with keyA <= keyB, sorted."""
        seen = {tuple(sorted(p)) for p in self.directed}
        return sorted(seen)

    def merge(self, other: "PairCounts") -> "PairCounts":
        """Associative combination of counts from disjoint document sets."""
        out = PairCounts(
            directed=dict(self.directed),
            event_freq=dict(self.event_freq),
            verb_freq=dict(self.verb_freq),
            obj_freq=dict(self.obj_freq),
            n_events=self.n_events + other.n_events,
            n_pairs=self.n_pairs + other.n_pairs,
            n_tokens=self.n_tokens + other.n_tokens,
        )
        for k, v in other.directed.items():
            out.directed[k] = out.directed.get(k, 0) + v
        for attr in ("event_freq", "verb_freq", "obj_freq"):
            dst = getattr(out, attr)
            for k, v in getattr(other, attr).items():
                dst[k] = dst.get(k, 0) + v
        return out

    def validate(self) -> None:
        for (a, b), v in self.directed.items():
            if v < 0:
                raise DataError(f"negative count for {(a, b)}")
            if a == b:
                raise DataError(f"self-pair counted: {a}")
            t1 = self.t1(a, b)
            if t1 > min(self.t4(a), self.t4(b)):
                raise DataError(f"t1 exceeds min event frequency for {(a, b)}")


@dataclass(frozen=True)
class CoOccurrenceContext:
    pair: tuple[str, str]  # (earlier key, later key) as counted
    doc_id: str
    sent_span: tuple[int, int]
    lemmas: tuple[str, ...]  # intervening token lemmas
    pos: tuple[str, ...]  # intervening token POS tags


def _ordered_doc_streams(
    occurrences: Iterable[EventOccurrence],
) -> list[list[EventOccurrence]]:
    by_doc: dict[str, list[EventOccurrence]] = {}
    for occ in occurrences:
        by_doc.setdefault(occ.doc_id, []).append(occ)
    return [
        sorted(occs, key=lambda o: (o.sent_index, o.token_span[0], o.pred_index))
        for occs in by_doc.values()
    ]


def _doc_matches(
    occs: list[EventOccurrence], window_sentences: int
) -> Iterator[tuple[EventOccurrence, EventOccurrence]]:
    """Greedy nearest-following matching per unordered event pair."""
    by_event: dict[str, list[int]] = defaultdict(list)
    for i, occ in enumerate(occs):
        by_event[occ.event].append(i)
    keys = sorted(by_event)
    for ai, a in enumerate(keys):
        for b in keys[ai + 1:]:
            idxs = sorted(by_event[a] + by_event[b])
            used: set[int] = set()
            for pos, i in enumerate(idxs):
                if i in used:
                    continue
                partner = b if occs[i].event == a else a
                for j in idxs[pos + 1:]:
                    if occs[j].sent_index - occs[i].sent_index > window_sentences:
                        break
                    if j in used or occs[j].event != partner:
                        continue
                    used.add(i)
                    used.add(j)
                    yield occs[i], occs[j]
                    break


def count_pairs(
    occurrences: list[EventOccurrence],
    window_sentences: int = 5,
    n_tokens: int = 0,
) -> PairCounts:
    """Tally directed pair counts and marginal frequencies over occurrences."""
    counts = PairCounts(n_tokens=n_tokens)
    for occ in occurrences:
        counts.event_freq[occ.event] = counts.event_freq.get(occ.event, 0) + 1
        pred = predicate_of(occ.event)
        counts.verb_freq[pred] = counts.verb_freq.get(pred, 0) + 1
        obj = object_of(occ.event)
        if obj:
            counts.obj_freq[obj] = counts.obj_freq.get(obj, 0) + 1
    counts.n_events = len(occurrences)
    for doc_occs in _ordered_doc_streams(occurrences):
        for earlier, later in _doc_matches(doc_occs, window_sentences):
            key = (earlier.event, later.event)
            counts.directed[key] = counts.directed.get(key, 0) + 1
    counts.n_pairs = sum(counts.directed.values())
    return counts


def _intervening_tokens(corpus: ParsedCorpus, earlier: EventOccurrence, later: EventOccurrence):
    sentences = {}
    for doc in corpus.documents:
        if doc.doc_id == earlier.doc_id:
            sentences = {s.sent_index: s for s in doc.sentences}
            break
    out = []
    for sent_index in range(earlier.sent_index, later.sent_index + 1):
        sent = sentences.get(sent_index)
        if sent is None:
            continue
        start = earlier.token_span[1] + 1 if sent_index == earlier.sent_index else 0
        end = later.token_span[0] - 1 if sent_index == later.sent_index else len(sent) - 1
        out.extend(sent.tokens[start:end + 1])
    return out


def gather_contexts(
    corpus: ParsedCorpus,
    occurrences: list[EventOccurrence],
    window_sentences: int = 5,
) -> dict[tuple[str, str], list[CoOccurrenceContext]]:
    """Contexts for every counted co-occurrence, keyed by sorted pair.

    Uses the same matching as :func:`count_pairs`, so one context exists per
    counted pair and C1 equals T1.
    """
    contexts: dict[tuple[str, str], list[CoOccurrenceContext]] = defaultdict(list)
    for doc_occs in _ordered_doc_streams(occurrences):
        for earlier, later in _doc_matches(doc_occs, window_sentences):
            toks = _intervening_tokens(corpus, earlier, later)
            ctx = CoOccurrenceContext(
                pair=(earlier.event, later.event),
                doc_id=earlier.doc_id,
                sent_span=(earlier.sent_index, later.sent_index),
                lemmas=tuple(t.lemma.lower() for t in toks),
                pos=tuple(t.pos for t in toks),
            )
            contexts[tuple(sorted((earlier.event, later.event)))].append(ctx)
    return dict(contexts)


def pmi(x_count: int, y_count: int, xy_count: int, n: int, epsilon: float = 1.0) -> float:
    """Smoothed pointwise mutual information log((xy+e)n / ((x+e)(y+e)))."""
    if n <= 0:
        raise ValueError("n must be positive")
    return math.log(((xy_count + epsilon) * n) / ((x_count + epsilon) * (y_count + epsilon)))


def transition_probability(a: str, b: str, counts: PairCounts) -> float:
    """Directed co-occurrence count of (a then b) over the frequency of a."""
    fa = counts.t4(a)
    if fa == 0:
        raise DataError(f"unknown event {a!r}: zero corpus frequency")
    return counts.t2(a, b) / fa


@dataclass(frozen=True)
class FeatureVector:
    """Pair features in four maskable groups.

    context layout: [C1, C2, C3 (dim), C4 (|tag inventory|), C5 (2*dim)].
    """

    pair: tuple[str, str]
    frequency: np.ndarray  # T1..T9
    ratio: np.ndarray  # R1..R11
    context: np.ndarray
    pmi: np.ndarray  # A1..A5

    def group(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def as_array(self, mask: Iterable[str] = GROUP_ORDER) -> np.ndarray:
        mask = set(mask)
        unknown = mask - set(GROUP_ORDER)
        if unknown:
            raise ValueError(f"unknown feature groups {sorted(unknown)}")
        if not mask:
            raise ValueError("feature mask must be nonempty")
        return np.concatenate([self.group(g) for g in GROUP_ORDER if g in mask])


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def build_feature_vector(
    pair: tuple[str, str],
    counts: PairCounts,
    contexts: list[CoOccurrenceContext],
    table: EmbeddingTable,
    pos_inventory: tuple[str, ...] = DEFAULT_POS_INVENTORY,
    epsilon: float = 1.0,
) -> FeatureVector:
    """Assemble the full frequency/ratio/context/PMI feature vector for a pair."""
    a, b = pair
    t1 = counts.t1(a, b)
    if t1 == 0:
        raise DataError(f"pair {pair} absent from counts")
    t2 = counts.t2(a, b)
    t3 = counts.t3(a, b)
    t4 = counts.t4(a)
    t5 = counts.t4(b)
    va, vb = predicate_of(a), predicate_of(b)
    oa, ob = object_of(a), object_of(b)
    t6 = counts.verb_freq.get(va, 0)
    t7 = counts.obj_freq.get(oa, 0) if oa else 0
    t8 = counts.verb_freq.get(vb, 0)
    t9 = counts.obj_freq.get(ob, 0) if ob else 0

    frequency = np.array([t1, t2, t3, t4, t5, t6, t7, t8, t9], dtype=float)
    ratio = np.array(
        [
            _safe_div(t2, t1),
            _safe_div(t1, t4),
            _safe_div(t1, t5),
            _safe_div(t1, t6),
            _safe_div(t1, t7),
            _safe_div(t1, t8),
            _safe_div(t1, t9),
            _safe_div(t6, t4),
            _safe_div(t7, t4),
            _safe_div(t8, t5),
            _safe_div(t9, t5),
        ],
        dtype=float,
    )

    c1 = float(len(contexts))
    c2 = float(np.mean([len(c.lemmas) for c in contexts])) if contexts else 0.0
    all_lemmas = [lemma for c in contexts for lemma in c.lemmas]
    rows = [table.vector(lemma) for lemma in all_lemmas]
    rows = [r for r in rows if r is not None]
    c3 = np.mean(rows, axis=0) if rows else np.zeros(table.dim)
    tag_index = {tag: i for i, tag in enumerate(pos_inventory)}
    c4 = np.zeros(len(pos_inventory))
    for c in contexts:
        for tag in c.pos:
            if tag in tag_index:
                c4[tag_index[tag]] += 1.0
    total = c4.sum()
    if total:
        c4 /= total
    c5 = np.concatenate([embed_event(a, table).vec, embed_event(b, table).vec])
    context_block = np.concatenate([[c1, c2], c3, c4, c5])

    n = counts.n_events
    pmi_block = np.array(
        [
            pmi(t6, t8, t1, n, epsilon),
            pmi(t4, t5, t1, n, epsilon),
            pmi(t6, t9, t1, n, epsilon),
            pmi(t7, t8, t1, n, epsilon),
            pmi(t7, t9, t1, n, epsilon),
        ]
    )
    return FeatureVector(
        pair=(a, b),
        frequency=frequency,
        ratio=ratio,
        context=context_block,
        pmi=pmi_block,
    )


def save_counts(counts: PairCounts, path: str | Path) -> None:
    """Persist counts as a diffable tab-separated file with sorted sections."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("[TOTALS]\n")
        fh.write(f"n_events\t{counts.n_events}\n")
        fh.write(f"n_pairs\t{counts.n_pairs}\n")
        fh.write(f"n_tokens\t{counts.n_tokens}\n")
        fh.write("[EVENTS]\n")
        for key in sorted(counts.event_freq):
            t_verb = counts.verb_freq.get(predicate_of(key), 0)
            obj = object_of(key)
            t_obj = counts.obj_freq.get(obj, 0) if obj else 0
            fh.write(f"{key}\t{counts.event_freq[key]}\t{t_verb}\t{t_obj}\n")
        fh.write("[PAIRS]\n")
        for a, b in counts.unordered_pairs():
            fh.write(f"{a}\t{b}\t{counts.t1(a, b)}\t{counts.t2(a, b)}\t{counts.t3(a, b)}\n")


def load_counts(path: str | Path) -> PairCounts:
    counts = PairCounts()
    section = None
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("["):
                section = line
                continue
            parts = line.split("\t")
            try:
                if section == "[TOTALS]":
                    setattr(counts, parts[0], int(parts[1]))
                elif section == "[EVENTS]":
                    key, t4, t_verb, t_obj = parts[0], int(parts[1]), int(parts[2]), int(parts[3])
                    counts.event_freq[key] = t4
                    counts.verb_freq[predicate_of(key)] = t_verb
                    obj = object_of(key)
                    if obj:
                        counts.obj_freq[obj] = t_obj
                elif section == "[PAIRS]":
                    a, b, _t1, t2, t3 = parts[0], parts[1], int(parts[2]), int(parts[3]), int(parts[4])
                    if t2:
                        counts.directed[(a, b)] = t2
                    if t3:
                        counts.directed[(b, a)] = t3
                else:
                    raise DataError(f"{path}:{n}: content outside any section")
            except (IndexError, ValueError) as exc:
                raise DataError(f"{path}:{n}: malformed counts line") from exc
    return counts


def save_contexts(
    contexts: dict[tuple[str, str], list[CoOccurrenceContext]], path: str | Path
) -> None:
    import json

    with Path(path).open("w", encoding="utf-8") as fh:
        for pair in sorted(contexts):
            for c in contexts[pair]:
                fields = [
                    c.pair[0],
                    c.pair[1],
                    c.doc_id,
                    str(c.sent_span[0]),
                    str(c.sent_span[1]),
                    json.dumps(list(c.lemmas), ensure_ascii=False),
                    json.dumps(list(c.pos), ensure_ascii=False),
                ]
                fh.write("\t".join(fields) + "\n")


def load_contexts(path: str | Path) -> dict[tuple[str, str], list[CoOccurrenceContext]]:
    import json

    contexts: dict[tuple[str, str], list[CoOccurrenceContext]] = defaultdict(list)
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 7:
                raise DataError(f"{path}:{n}: malformed context line")
            ctx = CoOccurrenceContext(
                pair=(parts[0], parts[1]),
                doc_id=parts[2],
                sent_span=(int(parts[3]), int(parts[4])),
                lemmas=tuple(json.loads(parts[5])),
                pos=tuple(json.loads(parts[6])),
            )
            contexts[tuple(sorted(ctx.pair))].append(ctx)
    return dict(contexts)
