"""Brute-force reference implementations used to pin expected test values.

Everything here is written directly from the documented contracts and kept
free of imports from the package's counting, feature, classifier, and graph
internals. When a test comparing the production path against these
references fails, exactly one of the two sides has drifted from the
contract, which is the point.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict

import numpy as np


def _text_order(occurrences):
    return sorted(occurrences, key=lambda o: (o.sent_index, o.token_span[0], o.pred_index))


def _match_pair(stream, first_event, second_event, window):
    """Greedy matching for one unordered event pair inside one document.

    Each occurrence, walked in text order, pairs with the nearest following
    unused occurrence of the other event at most `window` sentences away.
    """
    relevant = [o for o in stream if o.event in (first_event, second_event)]
    used = [False] * len(relevant)
    matches = []
    for i, occ in enumerate(relevant):
        if used[i]:
            continue
        partner = second_event if occ.event == first_event else first_event
        for j in range(i + 1, len(relevant)):
            if used[j]:
                continue
            if relevant[j].sent_index - occ.sent_index > window:
                break
            if relevant[j].event != partner:
                continue
            used[i] = True
            used[j] = True
            matches.append((occ, relevant[j]))
            break
    return matches


def recount(occurrences, window=5):
    """Recompute every pair and marginal count from scratch.

    Returns a dict with keys freq, verb, obj, t2 (directed dict), and
    matches (per-doc list of matched occurrence pairs).
    """
    freq = Counter(o.event for o in occurrences)
    verb = Counter(o.event.split("|")[1] for o in occurrences)
    obj = Counter(
        o.event.split("|")[2] for o in occurrences if o.event.split("|")[2]
    )
    by_doc = defaultdict(list)
    for o in occurrences:
        by_doc[o.doc_id].append(o)

    t2: Counter = Counter()
    matches = []
    for doc_occs in by_doc.values():
        stream = _text_order(doc_occs)
        events = sorted({o.event for o in stream})
        for i, a in enumerate(events):
            for b in events[i + 1:]:
                for earlier, later in _match_pair(stream, a, b, window):
                    t2[(earlier.event, later.event)] += 1
                    matches.append((earlier, later))
    return {"freq": dict(freq), "verb": dict(verb), "obj": dict(obj),
            "t2": dict(t2), "matches": matches}


def transition_matrix(recounted):
    """Every P(b | a) = t2(a,b) / freq(a) implied by a recount."""
    out = {}
    for (a, b), n in recounted["t2"].items():
        out[(a, b)] = n / recounted["freq"][a]
    return out


def intervening(corpus, earlier, later):
    """Tokens strictly between two matched occurrences, across sentences."""
    doc = next(d for d in corpus.documents if d.doc_id == earlier.doc_id)
    toks = []
    for sent in doc.sentences:
        if not earlier.sent_index <= sent.sent_index <= later.sent_index:
            continue
        for pos, tok in enumerate(sent.tokens):
            if sent.sent_index == earlier.sent_index and pos <= earlier.token_span[1]:
                continue
            if sent.sent_index == later.sent_index and pos >= later.token_span[0]:
                continue
            toks.append(tok)
    return toks


def pmi_value(x, y, xy, n, epsilon=1.0):
    return math.log(((xy + epsilon) * n) / ((x + epsilon) * (y + epsilon)))


def _mean_rows(rows, dim):
    rows = [r for r in rows if r is not None]
    if not rows:
        return np.zeros(dim)
    total = np.zeros(dim)
    for r in rows:
        total = total + np.asarray(r, dtype=float)
    return total / len(rows)


def event_embedding(key, table):
    """Mean vector over in-vocabulary slot lemmas of a canonical key."""
    lemmas = [lemma for part in key.split("|") if part for lemma in part.split("_")]
    return _mean_rows([table.vector(lemma) for lemma in lemmas], table.dim)


def feature_vector(pair, corpus, occurrences, table, pos_inventory,
                   window=5, epsilon=1.0):
    """Full feature block for one pair, recomputed from the raw corpus."""
    a, b = pair
    rc = recount(occurrences, window)
    t2d = rc["t2"]
    t2 = t2d.get((a, b), 0)
    t3 = t2d.get((b, a), 0)
    t1 = t2 + t3
    t4 = rc["freq"].get(a, 0)
    t5 = rc["freq"].get(b, 0)
    verb_a, obj_a = a.split("|")[1], a.split("|")[2]
    verb_b, obj_b = b.split("|")[1], b.split("|")[2]
    t6 = rc["verb"].get(verb_a, 0)
    t7 = rc["obj"].get(obj_a, 0) if obj_a else 0
    t8 = rc["verb"].get(verb_b, 0)
    t9 = rc["obj"].get(obj_b, 0) if obj_b else 0

    freq_block = [t1, t2, t3, t4, t5, t6, t7, t8, t9]

    def div(num, den):
        return num / den if den != 0 else 0.0

    ratio_block = [
        div(t2, t1), div(t1, t4), div(t1, t5), div(t1, t6), div(t1, t7),
        div(t1, t8), div(t1, t9), div(t6, t4), div(t7, t4), div(t8, t5),
        div(t9, t5),
    ]

    ctx_matches = [
        (e, l) for e, l in rc["matches"] if {e.event, l.event} == {a, b}
    ]
    ctx_tokens = [intervening(corpus, e, l) for e, l in ctx_matches]
    c1 = float(len(ctx_matches))
    c2 = (
        sum(len(toks) for toks in ctx_tokens) / len(ctx_tokens)
        if ctx_tokens else 0.0
    )
    all_lemmas = [t.lemma.lower() for toks in ctx_tokens for t in toks]
    c3 = _mean_rows([table.vector(lemma) for lemma in all_lemmas], table.dim)
    c4 = np.zeros(len(pos_inventory))
    for toks in ctx_tokens:
        for t in toks:
            if t.pos in pos_inventory:
                c4[pos_inventory.index(t.pos)] += 1.0
    if c4.sum() > 0:
        c4 = c4 / c4.sum()
    c5 = np.concatenate([event_embedding(a, table), event_embedding(b, table)])
    ctx_block = np.concatenate([[c1, c2], c3, c4, c5])

    n = len(occurrences)
    pmi_block = [
        pmi_value(t6, t8, t1, n, epsilon),
        pmi_value(t4, t5, t1, n, epsilon),
        pmi_value(t6, t9, t1, n, epsilon),
        pmi_value(t7, t8, t1, n, epsilon),
        pmi_value(t7, t9, t1, n, epsilon),
    ]
    return np.concatenate([freq_block, ratio_block, ctx_block, pmi_block])


def nb_posterior(train_x, train_y, query, var_floor=1e-9):
    """Closed-form Gaussian naive Bayes class posteriors for one query row."""
    train_x = np.asarray(train_x, dtype=float)
    train_y = np.asarray(train_y)
    classes = sorted(set(train_y.tolist()))
    log_joint = []
    for c in classes:
        rows = train_x[train_y == c]
        prior = len(rows) / len(train_x)
        mean = rows.mean(axis=0)
        var = rows.var(axis=0)
        var = np.maximum(var, var_floor)
        ll = math.log(prior)
        for j, x in enumerate(np.asarray(query, dtype=float)):
            ll += -0.5 * math.log(2.0 * math.pi * var[j])
            ll += -((x - mean[j]) ** 2) / (2.0 * var[j])
        log_joint.append(ll)
    log_joint = np.array(log_joint)
    shifted = np.exp(log_joint - log_joint.max())
    return {c: float(p) for c, p in zip(classes, shifted / shifted.sum())}


def scc_by_reachability(n_nodes, edges):
    """Strongly connected components via pairwise reachability (O(n^2) walks)."""
    adj = defaultdict(set)
    for src, dst in edges:
        adj[src].add(dst)

    def reach(start):
        seen = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in adj[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen

    reachable = {v: reach(v) for v in range(n_nodes)}
    components = []
    assigned = set()
    for v in range(n_nodes):
        if v in assigned:
            continue
        comp = {u for u in range(n_nodes) if u in reachable[v] and v in reachable[u]}
        components.append(frozenset(comp))
        assigned |= comp
    return frozenset(components)
