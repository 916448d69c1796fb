"""Event graph assembly, similarity merging, persistence, and queries.

Nodes are events; directed edges carry a relation type, an evidence support
count, and, for sequential edges, the conditional probability estimated from
directed co-occurrence counts. The graph may contain cycles. Merging unions
nodes whose embeddings agree above tau_merge (restricted to candidates that
share a lemma) and repeats until nothing changes, so it is idempotent; near
misses in [tau_link, tau_merge) are kept as undirected similarity links.

Persistence is the line-oriented "ELG v1" text encoding with [META]/[NODES]/
[EDGES]/[LINKS] sections and an [END] count trailer used to reject truncated
or corrupt files.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import logging

from .causality import CausalMention
from .embeddings import EmbeddingTable, cosine, embed_event
from .errors import DataError, GraphFormatError
from .events import EventTuple
from .pairstats import CoOccurrenceContext, PairCounts

log = logging.getLogger(__name__)

RELATIONS = ("sequential", "causal", "conditional", "hypernym-hyponym")
HYPERNYM_SUBTYPES = ("nounal", "verbal")
FORMAT_HEADER = "ELG v1"
EVIDENCE_CAP = 10


@dataclass(frozen=True)
class EventNode:
    node_id: int
    canonical_event: str
    surface_forms: tuple[str, ...]  # sorted; includes canonical_event
    frequency: int


@dataclass(frozen=True)
class TypedEdge:
    src: int
    dst: int
    relation: str
    support: int
    subtype: str | None = None
    probability: float | None = None  # sequential edges only
    evidence: tuple[tuple[str, int], ...] = ()  # (doc_id, sent_index), capped


@dataclass
class ElgGraph:
    nodes: list[EventNode] = field(default_factory=list)
    edges: list[TypedEdge] = field(default_factory=list)
    similarity_links: list[tuple[int, int, float]] = field(default_factory=list)
    build_meta: dict = field(default_factory=dict)

    def node_index(self) -> dict[str, int]:
        """Surface form (merged key included) to node id."""
        index: dict[str, int] = {}
        for node in self.nodes:
            for form in node.surface_forms:
                index[form] = node.node_id
        return index

    def edge_lookup(self) -> dict[tuple[int, int, str], TypedEdge]:
        return {(e.src, e.dst, e.relation): e for e in self.edges}

    def out_edges(self) -> dict[int, list[TypedEdge]]:
        out: dict[int, list[TypedEdge]] = defaultdict(list)
        for e in self.edges:
            out[e.src].append(e)
        return dict(out)

    def validate(self) -> None:
        ids = [n.node_id for n in self.nodes]
        if ids != list(range(len(ids))):
            raise DataError("node ids must be dense and ordered")
        for node in self.nodes:
            if node.canonical_event not in node.surface_forms:
                raise DataError(f"node {node.node_id}: canonical not among surface forms")
        seen = set()
        for e in self.edges:
            if e.src == e.dst:
                raise DataError(f"self-loop on node {e.src}")
            if not (0 <= e.src < len(ids)) or not (0 <= e.dst < len(ids)):
                raise DataError(f"edge {e.src}->{e.dst} references missing node")
            if e.relation not in RELATIONS:
                raise DataError(f"unknown relation {e.relation!r}")
            if e.support < 1:
                raise DataError("edge support must be at least 1")
            if (e.probability is not None) != (e.relation == "sequential"):
                raise DataError("probability present iff relation is sequential")
            if e.probability is not None and not 0.0 <= e.probability <= 1.0:
                raise DataError(f"probability {e.probability} outside [0,1]")
            key = (e.src, e.dst, e.relation)
            if key in seen:
                raise DataError(f"duplicate edge {key}")
            seen.add(key)


def build_graph(
    classified_pairs: Sequence[tuple[str, str]],
    causal_mentions: Sequence[CausalMention],
    counts: PairCounts,
    contexts: dict[tuple[str, str], list[CoOccurrenceContext]] | None = None,
    evidence_cap: int = EVIDENCE_CAP,
) -> ElgGraph:
    """Assemble nodes and typed edges from classified pairs and causal mentions.

    classified_pairs are directed (src, dst) sequential relations. Each pair
    must be known to the counts; a pair the counter never saw is an error. A
    direction that contradicts the counts keeps support 1 so the edge stays
    representable.
    """
    keys: set[str] = set()
    for a, b in classified_pairs:
        if counts.t1(a, b) == 0:
            raise DataError(f"direction references unknown pair ({a!r}, {b!r})")
        keys.update((a, b))
    resolved = [
        m for m in causal_mentions if m.cause_event is not None and m.effect_event is not None
    ]
    for m in resolved:
        keys.update((m.cause_event, m.effect_event))

    nodes = [
        EventNode(
            node_id=i,
            canonical_event=key,
            surface_forms=(key,),
            frequency=counts.t4(key),
        )
        for i, key in enumerate(sorted(keys))
    ]
    by_key = {n.canonical_event: n.node_id for n in nodes}

    acc: dict[tuple[int, int, str], dict] = {}

    def bump(src: int, dst: int, relation: str, support: int, probability, evidence):
        if src == dst:
            return
        slot = acc.setdefault(
            (src, dst, relation),
            {"support": 0, "probability": probability, "evidence": []},
        )
        slot["support"] += support
        slot["evidence"].extend(evidence)

    contexts = contexts or {}
    for a, b in classified_pairs:
        t2 = counts.t2(a, b)
        prob = t2 / counts.t4(a) if counts.t4(a) else 0.0
        evid = [
            (c.doc_id, c.sent_span[0])
            for c in contexts.get(tuple(sorted((a, b))), [])
            if c.pair == (a, b)
        ]
        bump(by_key[a], by_key[b], "sequential", max(t2, 1), prob, evid)
    for m in resolved:
        bump(
            by_key[m.cause_event],
            by_key[m.effect_event],
            "causal",
            1,
            None,
            [(m.doc_id, m.sent_index)],
        )

    edges = [
        TypedEdge(
            src=src,
            dst=dst,
            relation=relation,
            support=slot["support"],
            probability=slot["probability"],
            evidence=tuple(slot["evidence"][:evidence_cap]),
        )
        for (src, dst, relation), slot in sorted(acc.items())
    ]
    graph = ElgGraph(nodes=nodes, edges=edges, build_meta={"dropped_self_loops": 0})
    graph.validate()
    return graph


def load_curated_relations(path: str | Path) -> list[tuple[str, str, str, str | None]]:
    """Curated conditional / hypernym-hyponym edges: src, dst, relation, subtype."""
    rows = []
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise DataError(f"{path}:{n}: expected 4 tab-separated fields")
            src, dst, relation, subtype = parts
            if relation not in ("conditional", "hypernym-hyponym"):
                raise DataError(f"{path}:{n}: relation {relation!r} not curate-able")
            if relation == "hypernym-hyponym":
                if subtype not in HYPERNYM_SUBTYPES:
                    raise DataError(f"{path}:{n}: bad subtype {subtype!r}")
            elif subtype != "-":
                raise DataError(f"{path}:{n}: subtype only applies to hypernym-hyponym")
            rows.append((src, dst, relation, None if subtype == "-" else subtype))
    return rows


def attach_curated_edges(
    graph: ElgGraph, rows: Sequence[tuple[str, str, str, str | None]]
) -> ElgGraph:
    """Add curated edges between existing nodes; unknown keys are errors."""
    index = graph.node_index()
    existing = graph.edge_lookup()
    new_edges = list(graph.edges)
    for src_key, dst_key, relation, subtype in rows:
        if src_key not in index or dst_key not in index:
            missing = src_key if src_key not in index else dst_key
            raise DataError(f"curated edge references unknown event {missing!r}")
        src, dst = index[src_key], index[dst_key]
        if src == dst:
            continue
        key = (src, dst, relation)
        if key in existing:
            old = existing[key]
            new_edges[new_edges.index(old)] = replace(old, support=old.support + 1)
        else:
            new_edges.append(
                TypedEdge(src=src, dst=dst, relation=relation, support=1, subtype=subtype)
            )
    out = ElgGraph(
        nodes=list(graph.nodes),
        edges=sorted(new_edges, key=lambda e: (e.src, e.dst, e.relation)),
        similarity_links=list(graph.similarity_links),
        build_meta=dict(graph.build_meta),
    )
    out.validate()
    return out


def _event_lemmas(key: str) -> set[str]:
    ev = EventTuple.from_key(key)
    return set(ev.subject) | set(ev.predicate) | set(ev.object)


def _candidate_pairs(
    node_ids: Sequence[int], keys: dict[int, str]
) -> set[tuple[int, int]]:
    blocks: dict[str, list[int]] = defaultdict(list)
    for nid in node_ids:
        for lemma in sorted(_event_lemmas(keys[nid])):
            blocks[lemma].append(nid)
    pairs: set[tuple[int, int]] = set()
    for members in blocks.values():
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                pairs.add((a, b) if a < b else (b, a))
    return pairs


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def merge_similar_events(
    graph: ElgGraph,
    table: EmbeddingTable,
    tau_merge: float = 0.85,
    tau_link: float = 0.6,
    missing_warn_fraction: float = 0.5,
) -> ElgGraph:
    """Fuse nodes whose canonical events embed within tau_merge of each other.

    Runs merge rounds until a fixpoint, so applying it to its own output is a
    no-op. Nodes without usable vectors never merge. Sequential probabilities
    are recomputed as accumulated support over merged source frequency,
    clamped to 1 (an occurrence may pair with several distinct partner
    events, so summed supports can exceed the source frequency).
    """
    if not 0.0 < tau_link <= tau_merge <= 1.0:
        raise ValueError("need 0 < tau_link <= tau_merge <= 1")
    current = graph
    while True:
        vectors = {}
        missing = 0
        for node in current.nodes:
            ev = embed_event(node.canonical_event, table)
            if ev.oov:
                missing += 1
            else:
                vectors[node.node_id] = ev.vec
        if current.nodes and missing / len(current.nodes) > missing_warn_fraction:
            log.warning(
                "%d of %d nodes lack vectors and cannot merge", missing, len(current.nodes)
            )
        keys = {n.node_id: n.canonical_event for n in current.nodes}
        uf = _UnionFind(len(current.nodes))
        changed = False
        for a, b in sorted(_candidate_pairs(list(vectors), keys)):
            if cosine(vectors[a], vectors[b]) >= tau_merge:
                changed |= uf.union(a, b)
        if not changed:
            final = current
            break
        current = _rebuild(current, uf)
    links = _similarity_links(final, table, tau_merge, tau_link)
    return ElgGraph(
        nodes=list(final.nodes),
        edges=list(final.edges),
        similarity_links=links,
        build_meta={
            **final.build_meta,
            "tau_merge": tau_merge,
            "tau_link": tau_link,
        },
    )


def _rebuild(graph: ElgGraph, uf: _UnionFind) -> ElgGraph:
    clusters: dict[int, list[EventNode]] = defaultdict(list)
    for node in graph.nodes:
        clusters[uf.find(node.node_id)].append(node)

    def canonical(members: list[EventNode]) -> str:
        return min(members, key=lambda n: (-n.frequency, n.canonical_event)).canonical_event

    ordered = sorted(clusters.values(), key=lambda ms: canonical(ms))
    new_nodes: list[EventNode] = []
    remap: dict[int, int] = {}
    for new_id, members in enumerate(ordered):
        forms = sorted({f for m in members for f in m.surface_forms})
        new_nodes.append(
            EventNode(
                node_id=new_id,
                canonical_event=canonical(members),
                surface_forms=tuple(forms),
                frequency=sum(m.frequency for m in members),
            )
        )
        for m in members:
            remap[m.node_id] = new_id

    freq = {n.node_id: n.frequency for n in new_nodes}
    acc: dict[tuple[int, int, str], dict] = {}
    dropped = 0
    dropped_support = 0
    for e in graph.edges:
        src, dst = remap[e.src], remap[e.dst]
        if src == dst:
            dropped += 1
            dropped_support += e.support
            continue
        slot = acc.setdefault(
            (src, dst, e.relation), {"support": 0, "evidence": [], "subtype": e.subtype}
        )
        slot["support"] += e.support
        slot["evidence"].extend(e.evidence)
    new_edges = []
    for (src, dst, relation), slot in sorted(acc.items()):
        probability = None
        if relation == "sequential":
            probability = min(1.0, slot["support"] / freq[src]) if freq[src] else 0.0
        new_edges.append(
            TypedEdge(
                src=src,
                dst=dst,
                relation=relation,
                support=slot["support"],
                subtype=slot["subtype"],
                probability=probability,
                evidence=tuple(slot["evidence"][:EVIDENCE_CAP]),
            )
        )
    meta = dict(graph.build_meta)
    meta["dropped_self_loops"] = meta.get("dropped_self_loops", 0) + dropped
    meta["dropped_self_loop_support"] = (
        meta.get("dropped_self_loop_support", 0) + dropped_support
    )
    return ElgGraph(nodes=new_nodes, edges=new_edges, build_meta=meta)


def _similarity_links(
    graph: ElgGraph, table: EmbeddingTable, tau_merge: float, tau_link: float
) -> list[tuple[int, int, float]]:
    vectors = {}
    for node in graph.nodes:
        ev = embed_event(node.canonical_event, table)
        if not ev.oov:
            vectors[node.node_id] = ev.vec
    keys = {n.node_id: n.canonical_event for n in graph.nodes}
    links = []
    for a, b in sorted(_candidate_pairs(list(vectors), keys)):
        score = cosine(vectors[a], vectors[b])
        if tau_link <= score < tau_merge:
            links.append((a, b, float(score)))
    return links


@dataclass
class Subgraph:
    nodes: list[EventNode]
    edges: list[TypedEdge]
    links: list[tuple[int, int, float]]
    depth_of: dict[int, int]
    via_link: set[int]


def neighbors(
    graph: ElgGraph,
    node_id: int,
    relation_filter: str | None = None,
    depth: int = 1,
    top_k: int | None = None,
    include_links: bool = False,
) -> Subgraph:
    """BFS over outgoing edges (plus similarity links when asked).

    Successors of each expanded node are visited in (probability desc,
    support desc, node id) order; top_k truncates per expansion. Unknown
    node ids raise KeyError.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if relation_filter is not None and relation_filter not in RELATIONS:
        raise ValueError(f"unknown relation {relation_filter!r}")
    by_id = {n.node_id: n for n in graph.nodes}
    if node_id not in by_id:
        raise KeyError(node_id)
    out = graph.out_edges()
    link_map: dict[int, list[tuple[int, float]]] = defaultdict(list)
    if include_links:
        for a, b, score in graph.similarity_links:
            link_map[a].append((b, score))
            link_map[b].append((a, score))

    depth_of = {node_id: 0}
    via_link: set[int] = set()
    kept_edges: list[TypedEdge] = []
    kept_links: list[tuple[int, int, float]] = []
    frontier = [node_id]
    for level in range(depth):
        next_frontier: list[int] = []
        for nid in frontier:
            candidates = [
                e
                for e in out.get(nid, [])
                if relation_filter is None or e.relation == relation_filter
            ]
            candidates.sort(
                key=lambda e: (
                    -(e.probability if e.probability is not None else 0.0),
                    -e.support,
                    e.dst,
                )
            )
            if top_k is not None:
                candidates = candidates[:top_k]
            for e in candidates:
                kept_edges.append(e)
                if e.dst not in depth_of:
                    depth_of[e.dst] = level + 1
                    next_frontier.append(e.dst)
            for other, score in sorted(link_map.get(nid, []), key=lambda t: (-t[1], t[0])):
                pair = (min(nid, other), max(nid, other), score)
                if pair not in kept_links:
                    kept_links.append(pair)
                if other not in depth_of:
                    depth_of[other] = level + 1
                    via_link.add(other)
                    next_frontier.append(other)
        frontier = next_frontier
    ordered_ids = sorted(depth_of, key=lambda nid: (depth_of[nid], nid))
    seen_edges = []
    for e in kept_edges:
        if e not in seen_edges:
            seen_edges.append(e)
    return Subgraph(
        nodes=[by_id[nid] for nid in ordered_ids],
        edges=seen_edges,
        links=kept_links,
        depth_of=depth_of,
        via_link=via_link,
    )


def strongly_connected_components(
    graph: ElgGraph, relation_filter: str | None = None
) -> list[set[int]]:
    """Iterative Tarjan over the filtered edge set; singletons included."""
    succ: dict[int, list[int]] = defaultdict(list)
    for e in graph.edges:
        if relation_filter is None or e.relation == relation_filter:
            succ[e.src].append(e.dst)
    for lst in succ.values():
        lst.sort()
    index_of: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    components: list[set[int]] = []
    counter = 0
    for start in sorted(n.node_id for n in graph.nodes):
        if start in index_of:
            continue
        work: list[tuple[int, int]] = [(start, 0)]
        while work:
            node, child_i = work[-1]
            if child_i == 0:
                index_of[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            children = succ.get(node, [])
            advanced = False
            for i in range(child_i, len(children)):
                child = children[i]
                if child not in index_of:
                    work[-1] = (node, i + 1)
                    work.append((child, 0))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index_of[child])
            if advanced:
                continue
            if low[node] == index_of[node]:
                component = set()
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.add(member)
                    if member == node:
                        break
                components.append(component)
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return components


def scc_index(graph: ElgGraph, relation_filter: str | None = None) -> dict[int, int]:
    """Node id to component id; components numbered by their smallest member."""
    components = strongly_connected_components(graph, relation_filter)
    components.sort(key=min)
    return {nid: ci for ci, comp in enumerate(components) for nid in comp}


def _format_float(x: float) -> str:
    return repr(float(x))


def save_graph(graph: ElgGraph, path: str | Path) -> None:
    """Write the versioned text encoding; identical graphs produce identical bytes."""
    graph.validate()
    lines = [FORMAT_HEADER, "[META]"]
    for key in sorted(graph.build_meta):
        value = graph.build_meta[key]
        text = _format_float(value) if isinstance(value, float) else str(value)
        lines.append(f"{key}\t{text}")
    lines.append("[NODES]")
    for n in graph.nodes:
        forms = json.dumps(list(n.surface_forms), ensure_ascii=False, separators=(",", ":"))
        lines.append(f"{n.node_id}\t{n.canonical_event}\t{n.frequency}\t{forms}")
    lines.append("[EDGES]")
    for e in sorted(graph.edges, key=lambda e: (e.src, e.dst, e.relation)):
        prob = _format_float(e.probability) if e.probability is not None else "-"
        evid = json.dumps(
            [[d, s] for d, s in e.evidence], ensure_ascii=False, separators=(",", ":")
        )
        lines.append(
            f"{e.src}\t{e.dst}\t{e.relation}\t{e.subtype or '-'}\t{e.support}\t{prob}\t{evid}"
        )
    lines.append("[LINKS]")
    for a, b, score in sorted(graph.similarity_links):
        lines.append(f"{a}\t{b}\t{_format_float(score)}")
    lines.append("[END]")
    lines.append(f"{len(graph.nodes)}\t{len(graph.edges)}\t{len(graph.similarity_links)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_graph(path: str | Path) -> ElgGraph:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != FORMAT_HEADER:
        raise GraphFormatError(f"{path}: not an {FORMAT_HEADER!r} file")
    graph = ElgGraph()
    section = None
    trailer: list[str] = []
    try:
        for line in lines[1:]:
            if line in ("[META]", "[NODES]", "[EDGES]", "[LINKS]", "[END]"):
                section = line
                continue
            if not line.strip():
                continue
            parts = line.split("\t")
            if section == "[META]":
                key, value = parts
                graph.build_meta[key] = _parse_meta_value(value)
            elif section == "[NODES]":
                node_id, canonical, freq, forms = parts
                graph.nodes.append(
                    EventNode(
                        node_id=int(node_id),
                        canonical_event=canonical,
                        frequency=int(freq),
                        surface_forms=tuple(json.loads(forms)),
                    )
                )
            elif section == "[EDGES]":
                src, dst, relation, subtype, support, prob, evid = parts
                graph.edges.append(
                    TypedEdge(
                        src=int(src),
                        dst=int(dst),
                        relation=relation,
                        subtype=None if subtype == "-" else subtype,
                        support=int(support),
                        probability=None if prob == "-" else float(prob),
                        evidence=tuple((d, int(s)) for d, s in json.loads(evid)),
                    )
                )
            elif section == "[LINKS]":
                a, b, score = parts
                graph.similarity_links.append((int(a), int(b), float(score)))
            elif section == "[END]":
                trailer.append(line)
            else:
                raise GraphFormatError(f"{path}: content before any section")
    except (ValueError, IndexError, json.JSONDecodeError) as exc:
        raise GraphFormatError(f"{path}: malformed line: {exc}") from exc
    if len(trailer) != 1:
        raise GraphFormatError(f"{path}: missing count trailer; file truncated?")
    expected = trailer[0].split("\t")
    actual = [str(len(graph.nodes)), str(len(graph.edges)), str(len(graph.similarity_links))]
    if expected != actual:
        raise GraphFormatError(
            f"{path}: trailer counts {expected} disagree with content {actual}"
        )
    try:
        graph.validate()
    except DataError as exc:
        raise GraphFormatError(f"{path}: {exc}") from exc
    return graph


def _parse_meta_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text
