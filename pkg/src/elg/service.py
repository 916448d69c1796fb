"""Read-only HTTP query API over a loaded event graph.

Payloads carry display roles directly (seed = the queried or matched node,
evolution = reached over directed edges, similar = reached over similarity
links) so clients need no graph semantics of their own. Every response is
payload-closed: each returned edge or link has both endpoints in the same
response's node list.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .errors import DataError
from .graph import ElgGraph, RELATIONS, neighbors


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    graph_path: str | None = None
    sentences_path: str | None = None
    node_cap: int = 200
    max_depth: int = 4
    cors_origins: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.node_cap < 1 or self.max_depth < 1:
            raise DataError("node_cap and max_depth must be at least 1")


class SentenceStore:
    """Evidence references resolved to sentence text."""

    def __init__(self, entries: dict[tuple[str, int], str] | None = None) -> None:
        self.entries = entries or {}

    @classmethod
    def load(cls, path: str | Path) -> "SentenceStore":
        entries: dict[tuple[str, int], str] = {}
        path = Path(path)
        with path.open(encoding="utf-8") as fh:
            for n, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise DataError(f"{path}:{n}: expected 3 tab-separated fields")
                entries[(parts[0], int(parts[1]))] = parts[2]
        return cls(entries)

    def text(self, doc_id: str, sent_index: int) -> str | None:
        return self.entries.get((doc_id, sent_index))


class NodeOut(BaseModel):
    node_id: int
    canonical: str
    frequency: int
    role: str  # seed | evolution | similar


class EdgeOut(BaseModel):
    src: int
    dst: int
    relation: str
    subtype: str | None = None
    support: int
    probability: float | None = None


class LinkOut(BaseModel):
    a: int
    b: int
    score: float


class ContextOut(BaseModel):
    doc_id: str
    sent_index: int
    text: str | None = None


class QueryResponse(BaseModel):
    nodes: list[NodeOut]
    edges: list[EdgeOut]
    links: list[LinkOut] = []
    contexts: list[ContextOut] = []
    truncated: bool = False


class HealthOut(BaseModel):
    status: str
    nodes: int
    edges: int
    links: int
    meta: dict


def _edge_out(e) -> EdgeOut:
    return EdgeOut(
        src=e.src,
        dst=e.dst,
        relation=e.relation,
        subtype=e.subtype,
        support=e.support,
        probability=e.probability,
    )


def create_app(
    graph: ElgGraph | None,
    sentences: SentenceStore | None = None,
    config: ServiceConfig | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    sentences = sentences or SentenceStore()
    app = FastAPI(title="event graph query service")
    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["GET"],
            allow_headers=["*"],
        )

    @app.get("/health", response_model=HealthOut)
    def health():
        if graph is None:
            raise HTTPException(status_code=503, detail="no graph loaded")
        return HealthOut(
            status="ok",
            nodes=len(graph.nodes),
            edges=len(graph.edges),
            links=len(graph.similarity_links),
            meta=dict(graph.build_meta),
        )

    def require_graph() -> ElgGraph:
        if graph is None:
            raise HTTPException(status_code=503, detail="no graph loaded")
        return graph

    @app.get("/events", response_model=QueryResponse)
    def search(q: str = Query(default=""), limit: int = Query(default=10)):
        g = require_graph()
        if not q.strip():
            raise HTTPException(status_code=400, detail="query string q is required")
        if limit < 1:
            raise HTTPException(status_code=400, detail="limit must be at least 1")
        needle = q.strip().lower()
        hits = []
        for node in g.nodes:
            if any(needle in form.lower() for form in node.surface_forms):
                hits.append(node)
        hits.sort(key=lambda n: (-n.frequency, n.node_id))
        hits = hits[: min(limit, config.node_cap)]
        return QueryResponse(
            nodes=[
                NodeOut(
                    node_id=n.node_id,
                    canonical=n.canonical_event,
                    frequency=n.frequency,
                    role="seed",
                )
                for n in hits
            ],
            edges=[],
        )

    @app.get("/events/{node_id}/neighbors", response_model=QueryResponse)
    def node_neighbors(
        node_id: int,
        relation: str | None = Query(default=None),
        depth: int = Query(default=1),
        top_k: int | None = Query(default=None),
    ):
        g = require_graph()
        if relation is not None and relation not in RELATIONS:
            raise HTTPException(status_code=400, detail=f"unknown relation {relation!r}")
        if depth < 1:
            raise HTTPException(status_code=400, detail="depth must be at least 1")
        if depth > config.max_depth:
            raise HTTPException(
                status_code=400, detail=f"depth exceeds configured maximum {config.max_depth}"
            )
        if top_k is not None and top_k < 1:
            raise HTTPException(status_code=400, detail="top_k must be at least 1")
        try:
            sub = neighbors(
                g,
                node_id,
                relation_filter=relation,
                depth=depth,
                top_k=top_k,
                include_links=True,
            )
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown node {node_id}")
        kept = sub.nodes[: config.node_cap]
        truncated = len(kept) < len(sub.nodes)
        kept_ids = {n.node_id for n in kept}
        nodes_out = []
        for n in kept:
            if n.node_id == node_id:
                role = "seed"
            elif n.node_id in sub.via_link:
                role = "similar"
            else:
                role = "evolution"
            nodes_out.append(
                NodeOut(
                    node_id=n.node_id,
                    canonical=n.canonical_event,
                    frequency=n.frequency,
                    role=role,
                )
            )
        edges_out = [
            _edge_out(e) for e in sub.edges if e.src in kept_ids and e.dst in kept_ids
        ]
        links_out = [
            LinkOut(a=a, b=b, score=score)
            for a, b, score in sub.links
            if a in kept_ids and b in kept_ids
        ]
        return QueryResponse(
            nodes=nodes_out, edges=edges_out, links=links_out, truncated=truncated
        )

    @app.get("/edges/contexts", response_model=QueryResponse)
    def edge_contexts(
        src: int = Query(...),
        dst: int = Query(...),
        relation: str = Query(...),
    ):
        g = require_graph()
        if relation not in RELATIONS:
            raise HTTPException(status_code=400, detail=f"unknown relation {relation!r}")
        edge = g.edge_lookup().get((src, dst, relation))
        if edge is None:
            raise HTTPException(
                status_code=404, detail=f"no {relation} edge from {src} to {dst}"
            )
        by_id = {n.node_id: n for n in g.nodes}
        contexts = [
            ContextOut(doc_id=d, sent_index=s, text=sentences.text(d, s))
            for d, s in edge.evidence
        ]
        nodes_out = [
            NodeOut(
                node_id=by_id[nid].node_id,
                canonical=by_id[nid].canonical_event,
                frequency=by_id[nid].frequency,
                role="seed" if nid == src else "evolution",
            )
            for nid in (src, dst)
        ]
        return QueryResponse(nodes=nodes_out, edges=[_edge_out(edge)], contexts=contexts)

    return app
