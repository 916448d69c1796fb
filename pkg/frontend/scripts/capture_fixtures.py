"""Capture live service responses into tests/fixtures/*.json.

The explorer tests replay these payloads through a stub fetch, so they
exercise the UI against byte-for-byte real API output. Rerun after any
service schema change:

    python3 frontend/scripts/capture_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from elg.corpus import load_corpus
from elg.embeddings import EmbeddingTable
from elg.events import extract_corpus_events
from elg.causality import default_rules_path, extract_causal_mentions, load_rules, resolve_mentions
from elg.graph import ElgGraph, EventNode, TypedEdge, build_graph, merge_similar_events
from elg.pairstats import count_pairs, gather_contexts
from elg.service import SentenceStore, ServiceConfig, create_app

import numpy as np

ROOT = Path(__file__).resolve().parents[2]
DATA = ROOT / "tests" / "data"
OUT = ROOT / "frontend" / "tests" / "fixtures"

WINDOW = 5


def build_fixture_app():
    """FastAPI app over the fixture corpus graph, plus a node_id index."""
    corpus = load_corpus(DATA / "fixture_corpus.conllu")
    occurrences = extract_corpus_events(corpus)
    counts = count_pairs(occurrences, window_sentences=WINDOW, n_tokens=corpus.n_tokens)
    contexts = gather_contexts(corpus, occurrences, window_sentences=WINDOW)

    pairs = []
    for a, b in counts.unordered_pairs():
        src, dst = (a, b) if counts.t2(a, b) >= counts.t3(a, b) else (b, a)
        pairs.append((src, dst))

    rules = load_rules(default_rules_path())
    sentences = {(s.doc_id, s.sent_index): s for s in corpus.iter_sentences()}
    mentions = resolve_mentions(extract_causal_mentions(corpus.iter_sentences(), rules), sentences)

    graph = build_graph(sorted(pairs), mentions, counts, contexts=contexts)
    store = SentenceStore(
        {
            (doc.doc_id, sent.sent_index): " ".join(t.surface for t in sent.tokens)
            for doc in corpus.documents
            for sent in doc.sentences
        }
    )
    ids = graph.node_index()
    app = create_app(graph, sentences=store)
    capped = create_app(graph, sentences=store, config=ServiceConfig(node_cap=2))
    return app, capped, ids


def fixture_service() -> tuple[TestClient, TestClient, dict[str, int]]:
    app, capped, ids = build_fixture_app()
    return TestClient(app), TestClient(capped), ids


def merged_service() -> TestClient:
    table = EmbeddingTable(
        dim=2,
        vocab={w: i for i, w in enumerate(["storm", "hit", "strike", "coast", "sun", "shine", "city"])},
        vectors=np.array(
            [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [-1.0, 1.2]]
        ),
    )
    g = ElgGraph(
        nodes=[
            EventNode(0, "storm|hit|city", ("storm|hit|city",), 1),
            EventNode(1, "storm|hit|coast", ("storm|hit|coast",), 3),
            EventNode(2, "storm|strike|coast", ("storm|strike|coast",), 2),
            EventNode(3, "sun|shine|", ("sun|shine|",), 4),
        ],
        edges=[
            TypedEdge(src=0, dst=1, relation="causal", support=1),
            TypedEdge(src=1, dst=3, relation="sequential", support=2, probability=2 / 3),
            TypedEdge(src=2, dst=1, relation="sequential", support=1, probability=0.5),
            TypedEdge(src=2, dst=3, relation="sequential", support=1, probability=0.5),
        ],
    )
    g.validate()
    return TestClient(create_app(merge_similar_events(g, table)))


def dump(name: str, payload: object) -> None:
    path = OUT / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path.relative_to(ROOT)}")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    client, capped, ids = fixture_service()

    tea = ids["he|drink|tea"]
    soup = ids["he|eat|soup"]
    demand = ids["demand|grow|"]
    price = ids["price|rise|"]

    dump("search_tea.json", client.get("/events", params={"q": "tea"}).json())
    dump("neighbors_tea.json", client.get(f"/events/{tea}/neighbors").json())
    # expanding the soup node pulls in he|leave|restaurant, absent from the tea view
    dump("neighbors_soup.json", client.get(f"/events/{soup}/neighbors").json())

    dump("search_demand.json", client.get("/events", params={"q": "demand"}).json())
    dump("neighbors_demand.json", client.get(f"/events/{demand}/neighbors").json())
    dump(
        "contexts_causal.json",
        client.get(
            "/edges/contexts",
            params={"src": demand, "dst": price, "relation": "causal"},
        ).json(),
    )

    demand_hood = client.get(f"/events/{demand}/neighbors").json()
    seq = next(e for e in demand_hood["edges"] if e["relation"] == "sequential")
    dump(
        "contexts_sequential.json",
        client.get(
            "/edges/contexts",
            params={"src": seq["src"], "dst": seq["dst"], "relation": "sequential"},
        ).json(),
    )

    dump("search_none.json", client.get("/events", params={"q": "zzzzz"}).json())
    dump("neighbors_truncated.json", capped.get(f"/events/{tea}/neighbors").json())

    merged = merged_service()
    dump("search_strike.json", merged.get("/events", params={"q": "strike"}).json())
    strike = merged.get("/events", params={"q": "strike"}).json()["nodes"][0]["node_id"]
    dump("neighbors_storm.json", merged.get(f"/events/{strike}/neighbors").json())

    dump(
        "meta.json",
        {
            "tea_id": tea,
            "soup_id": soup,
            "demand_id": demand,
            "price_id": price,
            "storm_id": strike,
            "sequential_edge": {"src": seq["src"], "dst": seq["dst"]},
        },
    )


if __name__ == "__main__":
    main()
