"""Stage orchestration over persisted artifacts.

Each stage reads its predecessors' files from the output directory and
writes its own. A manifest records, per stage, a signature over the stage's
configuration and input hashes plus the hashes of its outputs; rerunning
with unchanged inputs skips the stage. Nothing here writes wall-clock
values, so a pipeline run is byte-reproducible given the same seeds.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import causality as causality_mod
from . import events as events_mod
from . import predict as predict_mod
from .corpus import clean_corpus, load_corpus, save_corpus
from .embeddings import load_vectors, save_vectors, train_skipgram
from .errors import ConfigError, DataError, MissingArtifactError
from .events import ExtractionConfig, extract_corpus_events, filter_low_frequency
from .graph import (
    attach_curated_edges,
    build_graph,
    load_curated_relations,
    merge_similar_events,
    save_graph,
)
from .pairstats import (
    build_feature_vector,
    count_pairs,
    gather_contexts,
    load_contexts,
    load_counts,
    pmi,
    save_contexts,
    save_counts,
)

ARTIFACTS = {
    "clean.jsonl": "ingest",
    "sentences.tsv": "ingest",
    "occurrences.tsv": "extract",
    "counts.tsv": "count",
    "contexts.tsv": "count",
    "vectors.txt": "embed",
    "features.tsv": "features",
    "classified.tsv": "classify",
    "mentions.tsv": "causality",
    "graph.elg": "build",
    "mcnc_instances.tsv": "mcnc",
    "mcnc_report.tsv": "mcnc",
    "mcnc_report.txt": "mcnc",
}

STAGE_ORDER = (
    "ingest",
    "extract",
    "count",
    "embed",
    "features",
    "classify",
    "causality",
    "build",
    "mcnc",
)

STAGE_OUTPUTS = {
    stage: tuple(name for name, producer in ARTIFACTS.items() if producer == stage)
    for stage in STAGE_ORDER
}

STAGE_INPUTS = {
    "ingest": (),
    "extract": ("clean.jsonl",),
    "count": ("clean.jsonl", "occurrences.tsv"),
    "embed": ("clean.jsonl",),
    "features": ("counts.tsv", "contexts.tsv", "vectors.txt"),
    "classify": ("counts.tsv",),
    "causality": ("clean.jsonl",),
    "build": ("classified.tsv", "mentions.tsv", "counts.tsv", "contexts.tsv", "vectors.txt"),
    "mcnc": ("occurrences.tsv", "counts.tsv", "vectors.txt", "graph.elg"),
}

# config sections whose values feed each stage's resume signature
STAGE_CONFIG = {
    "ingest": ("corpus",),
    "extract": ("extract",),
    "count": ("count",),
    "embed": ("embed",),
    "features": ("features",),
    "classify": ("classify",),
    "causality": ("causality",),
    "build": ("merge", "graph"),
    "mcnc": ("mcnc",),
}


def artifact_path(output_dir: str | Path, name: str) -> Path:
    return Path(output_dir) / name


def require_artifact(output_dir: str | Path, name: str) -> Path:
    """Resolve an artifact, or say which stage would produce it."""
    path = artifact_path(output_dir, name)
    if not path.exists():
        raise MissingArtifactError(str(path), ARTIFACTS[name])
    return path


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    def __init__(self, path: Path) -> None:
        self.path = path
        self.data: dict = {"stages": {}}
        if path.exists():
            try:
                self.data = json.loads(path.read_text(encoding="utf-8"))
            except (json.JSONDecodeError, OSError):
                self.data = {"stages": {}}
        self.data.setdefault("stages", {})

    def save(self) -> None:
        self.path.write_text(
            json.dumps(self.data, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def record(self, stage: str, signature: str, outputs: dict[str, str]) -> None:
        self.data["stages"][stage] = {"signature": signature, "outputs": outputs}
        self.save()

    def can_skip(self, stage: str, signature: str, output_dir: Path) -> bool:
        entry = self.data["stages"].get(stage)
        if not entry or entry.get("signature") != signature:
            return False
        for name, digest in entry.get("outputs", {}).items():
            path = output_dir / name
            if not path.exists() or _sha256(path) != digest:
                return False
        return bool(entry.get("outputs"))


def _stage_signature(stage: str, config: dict, output_dir: Path) -> str:
    payload = {
        "config": {section: config[section] for section in STAGE_CONFIG[stage]},
        "inputs": {},
    }
    for name in STAGE_INPUTS[stage]:
        path = output_dir / name
        payload["inputs"][name] = _sha256(path) if path.exists() else None
    if stage == "ingest":
        source = Path(config["corpus"]["path"])
        payload["inputs"]["source"] = _sha256(source) if source.exists() else None
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True).encode("utf-8")
    ).hexdigest()


def _load_clean_corpus(output_dir: Path):
    return load_corpus(require_artifact(output_dir, "clean.jsonl"), format="jsonl")


def stage_ingest(config: dict, output_dir: Path) -> None:
    section = config["corpus"]
    corpus = load_corpus(section["path"], format=section["format"])
    corpus = clean_corpus(
        corpus, min_tokens=section["min_tokens"], max_tokens=section["max_tokens"]
    )
    save_corpus(corpus, output_dir / "clean.jsonl")
    with (output_dir / "sentences.tsv").open("w", encoding="utf-8") as fh:
        for sent in corpus.iter_sentences():
            fh.write(f"{sent.doc_id}\t{sent.sent_index}\t{sent.text()}\n")


def stage_extract(config: dict, output_dir: Path) -> None:
    section = config["extract"]
    corpus = _load_clean_corpus(output_dir)
    occurrences = extract_corpus_events(corpus, ExtractionConfig())
    if section["min_frequency"] > 1:
        occurrences = filter_low_frequency(occurrences, section["min_frequency"])
    if section["use_blacklist"]:
        path = section["blacklist"] or events_mod.default_blacklist_path()
        occurrences = events_mod.filter_general(occurrences, events_mod.load_blacklist(path))
    events_mod.save_occurrences(occurrences, output_dir / "occurrences.tsv")


def stage_count(config: dict, output_dir: Path) -> None:
    window = config["count"]["window_sentences"]
    corpus = _load_clean_corpus(output_dir)
    occurrences = events_mod.load_occurrences(require_artifact(output_dir, "occurrences.tsv"))
    counts = count_pairs(occurrences, window_sentences=window, n_tokens=corpus.n_tokens)
    counts.validate()
    save_counts(counts, output_dir / "counts.tsv")
    save_contexts(gather_contexts(corpus, occurrences, window), output_dir / "contexts.tsv")


def stage_embed(config: dict, output_dir: Path) -> None:
    section = config["embed"]
    corpus = _load_clean_corpus(output_dir)
    table = train_skipgram(
        corpus,
        dim=section["dim"],
        window=section["window"],
        epochs=section["epochs"],
        negative_samples=section["negative_samples"],
        min_count=section["min_count"],
        learning_rate=section["learning_rate"],
        seed=section["seed"],
    )
    save_vectors(table, output_dir / "vectors.txt")


def stage_features(config: dict, output_dir: Path) -> None:
    epsilon = config["features"]["epsilon"]
    counts = load_counts(require_artifact(output_dir, "counts.tsv"))
    contexts = load_contexts(require_artifact(output_dir, "contexts.tsv"))
    table = load_vectors(require_artifact(output_dir, "vectors.txt"))
    with (output_dir / "features.tsv").open("w", encoding="utf-8") as fh:
        fh.write("# groups: frequency=9 ratio=11 context=2+dim+17+2*dim pmi=5\n")
        for a, b in counts.unordered_pairs():
            fv = build_feature_vector(
                (a, b), counts, contexts.get((a, b), []), table, epsilon=epsilon
            )
            values = "\t".join(repr(float(v)) for v in fv.as_array())
            fh.write(f"{a}\t{b}\t{values}\n")


def stage_classify(config: dict, output_dir: Path) -> None:
    section = config["classify"]
    counts = load_counts(require_artifact(output_dir, "counts.tsv"))
    rows = []
    for a, b in counts.unordered_pairs():
        if section["mode"] == "support":
            keep = counts.t1(a, b) >= section["min_support"]
        elif section["mode"] == "pmi":
            score = pmi(counts.t4(a), counts.t4(b), counts.t1(a, b), max(counts.n_events, 1))
            keep = score >= section["pmi_threshold"]
        else:
            raise ConfigError(f"unknown classify mode {section['mode']!r}")
        if not keep:
            continue
        src, dst = (a, b) if counts.t2(a, b) >= counts.t3(a, b) else (b, a)
        rows.append((src, dst))
    with (output_dir / "classified.tsv").open("w", encoding="utf-8") as fh:
        for src, dst in sorted(rows):
            fh.write(f"{src}\t{dst}\n")


def load_classified(path: str | Path) -> list[tuple[str, str]]:
    rows = []
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{n}: expected 2 tab-separated fields")
            rows.append((parts[0], parts[1]))
    return rows


def stage_causality(config: dict, output_dir: Path) -> None:
    rules_path = config["causality"]["rules"] or causality_mod.default_rules_path()
    rules = causality_mod.load_rules(rules_path)
    corpus = _load_clean_corpus(output_dir)
    sentences = {(s.doc_id, s.sent_index): s for s in corpus.iter_sentences()}
    mentions = causality_mod.extract_causal_mentions(corpus.iter_sentences(), rules)
    mentions = causality_mod.resolve_mentions(mentions, sentences)
    causality_mod.save_mentions(mentions, output_dir / "mentions.tsv")


def stage_build(config: dict, output_dir: Path) -> None:
    counts_path = require_artifact(output_dir, "counts.tsv")
    counts = load_counts(counts_path)
    contexts = load_contexts(require_artifact(output_dir, "contexts.tsv"))
    classified = load_classified(require_artifact(output_dir, "classified.tsv"))
    mentions = causality_mod.load_mentions(require_artifact(output_dir, "mentions.tsv"))
    table = load_vectors(require_artifact(output_dir, "vectors.txt"))
    graph = build_graph(
        classified,
        mentions,
        counts,
        contexts=contexts,
        evidence_cap=config["graph"]["evidence_cap"],
    )
    if config["graph"]["curated_edges"]:
        graph = attach_curated_edges(
            graph, load_curated_relations(config["graph"]["curated_edges"])
        )
    graph = merge_similar_events(
        graph,
        table,
        tau_merge=config["merge"]["tau_merge"],
        tau_link=config["merge"]["tau_link"],
    )
    graph.build_meta["counts_sha256"] = _sha256(counts_path)
    save_graph(graph, output_dir / "graph.elg")


def stage_mcnc(config: dict, output_dir: Path) -> None:
    from .graph import load_graph

    section = config["mcnc"]
    occurrences = events_mod.load_occurrences(require_artifact(output_dir, "occurrences.tsv"))
    counts = load_counts(require_artifact(output_dir, "counts.tsv"))
    table = load_vectors(require_artifact(output_dir, "vectors.txt"))
    graph = load_graph(require_artifact(output_dir, "graph.elg"))
    chains = predict_mod.extract_chains(occurrences)
    instances = predict_mod.generate_mcnc(
        chains,
        counts.event_freq,
        n_candidates=section["n_candidates"],
        seed=section["seed"],
        distractor_policy=section["distractor_policy"],
    )
    predict_mod.save_mcnc(instances, output_dir / "mcnc_instances.tsv")
    deps = {"counts": counts, "table": table, "graph": graph, "seed": section["seed"],
            "beta": section["beta"]}
    results = {}
    for name in section["scorers"]:
        scorer = predict_mod.make_scorer(name, **deps)
        results[name] = predict_mod.evaluate_mcnc(scorer, instances)
    baseline = section["scorers"][0]
    with (output_dir / "mcnc_report.tsv").open("w", encoding="utf-8") as fh:
        fh.write("method\taccuracy\tp_vs_" + baseline + "\n")
        for name in section["scorers"]:
            p = predict_mod.paired_ttest(results[name], results[baseline])
            fh.write(f"{name}\t{repr(results[name].accuracy)}\t{repr(p)}\n")
    report = predict_mod.format_mcnc_report(
        [(name, results[name].accuracy) for name in section["scorers"]]
    )
    (output_dir / "mcnc_report.txt").write_text(report, encoding="utf-8")


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "extract": stage_extract,
    "count": stage_count,
    "embed": stage_embed,
    "features": stage_features,
    "classify": stage_classify,
    "causality": stage_causality,
    "build": stage_build,
    "mcnc": stage_mcnc,
}


def run_stage(stage: str, config: dict, output_dir: str | Path) -> None:
    """Run one stage directly, without manifest bookkeeping."""
    if stage not in STAGE_FUNCS:
        raise ConfigError(f"unknown stage {stage!r}")
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    STAGE_FUNCS[stage](config, output_dir)


def run_pipeline(
    config: dict, stages: tuple[str, ...] = STAGE_ORDER, force: bool = False
) -> list[dict]:
    """Execute stages in dependency order with manifest-based skipping."""
    unknown = set(stages) - set(STAGE_ORDER)
    if unknown:
        raise ConfigError(f"unknown stages {sorted(unknown)}")
    output_dir = Path(config["pipeline"]["output_dir"])
    output_dir.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(output_dir / "manifest.json")
    reports = []
    for stage in STAGE_ORDER:
        if stage not in stages:
            continue
        for name in STAGE_INPUTS[stage]:
            require_artifact(output_dir, name)
        signature = _stage_signature(stage, config, output_dir)
        if not force and manifest.can_skip(stage, signature, output_dir):
            reports.append({"stage": stage, "status": "skipped"})
            continue
        STAGE_FUNCS[stage](config, output_dir)
        outputs = {
            name: _sha256(output_dir / name)
            for name in STAGE_OUTPUTS[stage]
            if (output_dir / name).exists()
        }
        manifest.record(stage, signature, outputs)
        reports.append({"stage": stage, "status": "ran", "outputs": sorted(outputs)})
    return reports
