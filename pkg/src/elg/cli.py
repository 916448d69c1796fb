"""Command-line pipeline driver.

Every subcommand is a thin wrapper over one pipeline stage or module entry
point, reading and writing the shared artifact directory. Exit codes: 0
success, 1 usage error, 2 data/config error, 3 internal error.
"""

from __future__ import annotations

import socket
import sys
from pathlib import Path
from typing import Sequence

import click

from . import causality as causality_mod
from . import pipeline as pipeline_mod
from . import predict as predict_mod
from . import seqrel as seqrel_mod
from .config import load_config
from .embeddings import load_vectors
from .errors import ConfigError, DataError, ElgError
from .graph import load_graph, merge_similar_events, save_graph
from .pairstats import load_contexts, load_counts
from .pipeline import require_artifact, run_pipeline, run_stage
from .service import SentenceStore, ServiceConfig, create_app


def _resolve_config(config_path: str | None, output_dir: str | None) -> dict:
    config = load_config(config_path)
    if output_dir is not None:
        config["pipeline"]["output_dir"] = output_dir
    return config


config_option = click.option(
    "--config", "-c", "config_path", type=click.Path(), default=None,
    help="YAML config file; ELG_* environment variables override it.",
)
output_option = click.option(
    "--output-dir", "-o", default=None, help="Artifact directory override."
)


@click.group()
def cli() -> None:
    """Event graph pipeline: extract, count, classify, build, query."""


@cli.command()
@config_option
@output_option
@click.option("--stages", default=None, help="Comma-separated subset of stages to run.")
@click.option("--force", is_flag=True, help="Ignore the manifest and rerun everything.")
def run(config_path, output_dir, stages, force) -> None:
    """Run the full pipeline with manifest-based resume."""
    config = _resolve_config(config_path, output_dir)
    wanted = tuple(s.strip() for s in stages.split(",")) if stages else pipeline_mod.STAGE_ORDER
    for report in run_pipeline(config, stages=wanted, force=force):
        click.echo(f"{report['stage']}: {report['status']}")


def _stage_command(name: str, stage: str, help_text: str):
    @cli.command(name=name, help=help_text)
    @config_option
    @output_option
    def command(config_path, output_dir) -> None:
        config = _resolve_config(config_path, output_dir)
        out = config["pipeline"]["output_dir"]
        if stage == "build":
            run_stage("classify", config, out)
        run_stage(stage, config, out)
        click.echo(f"{name}: done")

    return command


_stage_command("extract", "extract", "Extract event occurrences from the cleaned corpus.")
_stage_command("count", "count", "Count ordered co-occurrences and collect contexts.")
_stage_command("features", "features", "Emit feature vectors for all counted pairs.")
_stage_command("embed", "embed", "Train lemma embeddings on the cleaned corpus.")
_stage_command("build-graph", "build", "Classify pairs, assemble, and merge the graph.")
_stage_command("mcnc", "mcnc", "Generate cloze instances and score all configured scorers.")
_stage_command("ingest", "ingest", "Load, clean, and normalize the raw corpus.")


@cli.command()
@config_option
@output_option
@click.option("--gold", type=click.Path(), default=None,
              help="Gold BIO file; evaluate rules against it instead of extracting.")
@click.option("--rules", type=click.Path(), default=None, help="Rule file override.")
def causality(config_path, output_dir, gold, rules) -> None:
    """Extract causal mentions, or evaluate the rules against a gold file."""
    config = _resolve_config(config_path, output_dir)
    if rules:
        config["causality"]["rules"] = rules
    out = Path(config["pipeline"]["output_dir"])
    if gold is None:
        run_stage("causality", config, out)
        click.echo("causality: done")
        return
    rule_path = config["causality"]["rules"] or causality_mod.default_rules_path()
    rule_set = causality_mod.load_rules(rule_path)
    sentences, gold_mentions = causality_mod.load_gold(gold)
    predicted = causality_mod.extract_causal_mentions(sentences, rule_set)
    metrics = causality_mod.evaluate_extraction(predicted, gold_mentions, sentences)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "causality_report.tsv").open("w", encoding="utf-8") as fh:
        fh.write("accuracy\tprecision\trecall\tf1\n")
        fh.write(
            f"{repr(metrics.accuracy)}\t{repr(metrics.precision)}"
            f"\t{repr(metrics.recall)}\t{repr(metrics.f1)}\n"
        )
    click.echo(
        f"token accuracy {metrics.accuracy:.1f}  precision {metrics.precision:.1f}"
        f"  recall {metrics.recall:.1f}  f1 {metrics.f1:.1f}"
    )


@cli.command(name="train-seqrel")
@config_option
@output_option
@click.option("--task", type=click.Choice(["relation", "direction"]), default=None)
@click.option("--classifier", default=None,
              help="nb | lr | mlp | svm | pmi | preceding, or 'all' with --search.")
@click.option("--annotations", type=click.Path(), default=None)
@click.option("--search", is_flag=True, help="Evaluate every feature-group subset.")
@click.option("--folds", type=int, default=None)
@click.option("--repeats", type=int, default=None)
@click.option("--seed", type=int, default=None)
def train_seqrel(config_path, output_dir, task, classifier, annotations, search,
                 folds, repeats, seed) -> None:
    """Cross-validate relation or direction classifiers on annotated pairs."""
    config = _resolve_config(config_path, output_dir)
    section = config["seqrel"]
    task = task or section["task"]
    classifier = classifier or section["classifier"]
    annotations = annotations or section["annotations"]
    folds = folds if folds is not None else section["folds"]
    repeats = repeats if repeats is not None else section["repeats"]
    seed = seed if seed is not None else section["seed"]
    if annotations is None:
        raise ConfigError("no annotations file: pass --annotations or set seqrel.annotations")
    out = Path(config["pipeline"]["output_dir"])
    counts = load_counts(require_artifact(out, "counts.tsv"))
    contexts = load_contexts(require_artifact(out, "contexts.tsv"))
    table = load_vectors(require_artifact(out, "vectors.txt"))
    rows = seqrel_mod.load_annotations(annotations)
    dataset = seqrel_mod.build_dataset(rows, counts, contexts, table)
    if task == "direction":
        dataset = seqrel_mod.direction_subset(dataset)
    if search:
        kinds = ["nb", "lr", "mlp", "svm"] if classifier == "all" else [classifier]
        best, result_rows = seqrel_mod.feature_group_search(
            kinds, dataset, folds=folds, repeats=repeats, seed=seed, task=task
        )
        click.echo(seqrel_mod.format_report(result_rows), nl=False)
        for kind, (mask, metrics) in sorted(best.items()):
            click.echo(f"best[{kind}]: {'+'.join(mask)} accuracy {metrics.accuracy:.1f}")
    else:
        metrics = seqrel_mod.cross_validate(
            classifier, dataset, folds=folds, repeats=repeats, seed=seed, task=task
        )
        result_rows = [
            {
                "classifier": classifier,
                "mask": seqrel_mod.GROUP_ORDER,
                "accuracy": metrics.accuracy,
                "precision": metrics.precision,
                "recall": metrics.recall,
                "f1": metrics.f1,
            }
        ]
        click.echo(seqrel_mod.format_report(result_rows), nl=False)
    with (out / "seqrel_report.tsv").open("w", encoding="utf-8") as fh:
        fh.write("classifier\tfeatures\taccuracy\tprecision\trecall\tf1\n")
        for r in result_rows:
            fh.write(
                f"{r['classifier']}\t{'+'.join(r['mask'])}\t{repr(r['accuracy'])}"
                f"\t{repr(r['precision'])}\t{repr(r['recall'])}\t{repr(r['f1'])}\n"
            )


@cli.command()
@config_option
@output_option
@click.option("--input", "input_path", type=click.Path(), default=None,
              help="Graph file to merge; defaults to the built artifact.")
@click.option("--graph-out", type=click.Path(), default=None,
              help="Where to write the merged graph; defaults to the input path.")
@click.option("--tau-merge", type=float, default=None)
@click.option("--tau-link", type=float, default=None)
def merge(config_path, output_dir, input_path, graph_out, tau_merge, tau_link) -> None:
    """Merge semantically similar nodes in an existing graph file."""
    config = _resolve_config(config_path, output_dir)
    out = Path(config["pipeline"]["output_dir"])
    source = Path(input_path) if input_path else require_artifact(out, "graph.elg")
    table = load_vectors(require_artifact(out, "vectors.txt"))
    graph = load_graph(source)
    merged = merge_similar_events(
        graph,
        table,
        tau_merge=tau_merge if tau_merge is not None else config["merge"]["tau_merge"],
        tau_link=tau_link if tau_link is not None else config["merge"]["tau_link"],
    )
    target = Path(graph_out) if graph_out else source
    save_graph(merged, target)
    click.echo(f"merged {len(graph.nodes)} nodes into {len(merged.nodes)}: {target}")


@cli.command()
@config_option
@output_option
@click.option("--compare", default="random,bigram,graph",
              help="Comma-separated scorers to compare on the generated instances.")
def report(config_path, output_dir, compare) -> None:
    """Accuracy table over stored cloze instances with t-tests vs the first scorer."""
    config = _resolve_config(config_path, output_dir)
    out = Path(config["pipeline"]["output_dir"])
    names = [s.strip() for s in compare.split(",") if s.strip()]
    if not names:
        raise ConfigError("--compare needs at least one scorer")
    unknown = set(names) - set(predict_mod.SCORER_NAMES)
    if unknown:
        raise ConfigError(f"unknown scorers {sorted(unknown)}")
    instances = predict_mod.load_mcnc(require_artifact(out, "mcnc_instances.tsv"))
    deps = {"seed": config["mcnc"]["seed"], "beta": config["mcnc"]["beta"]}
    if {"pmi", "bigram"} & set(names):
        deps["counts"] = load_counts(require_artifact(out, "counts.tsv"))
    if "embedding" in names:
        deps["table"] = load_vectors(require_artifact(out, "vectors.txt"))
    if "graph" in names:
        deps["graph"] = load_graph(require_artifact(out, "graph.elg"))
    results = {
        name: predict_mod.evaluate_mcnc(predict_mod.make_scorer(name, **deps), instances)
        for name in names
    }
    rows = [(name, results[name].accuracy) for name in names]
    click.echo(predict_mod.format_mcnc_report(rows), nl=False)
    with (out / "compare_report.tsv").open("w", encoding="utf-8") as fh:
        fh.write(f"method\taccuracy\tp_vs_{names[0]}\n")
        for name in names:
            p = predict_mod.paired_ttest(results[name], results[names[0]])
            fh.write(f"{name}\t{repr(results[name].accuracy)}\t{repr(p)}\n")
            if name != names[0]:
                click.echo(f"p[{name} vs {names[0]}] = {p:.4g}")


@cli.command()
@config_option
@output_option
@click.option("--graph", "graph_path", type=click.Path(), default=None)
@click.option("--sentences", "sentences_path", type=click.Path(), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None, help="0 binds an ephemeral port.")
def serve(config_path, output_dir, graph_path, sentences_path, host, port) -> None:
    """Serve the read-only query API over a built graph."""
    import uvicorn

    config = _resolve_config(config_path, output_dir)
    out = Path(config["pipeline"]["output_dir"])
    section = config["service"]
    source = Path(graph_path) if graph_path else require_artifact(out, "graph.elg")
    graph = load_graph(source)
    store = None
    if sentences_path:
        store = SentenceStore.load(sentences_path)
    elif (out / "sentences.tsv").exists():
        store = SentenceStore.load(out / "sentences.tsv")
    service_config = ServiceConfig(
        host=host if host is not None else section["host"],
        port=port if port is not None else section["port"],
        node_cap=section["node_cap"],
        max_depth=section["max_depth"],
        cors_origins=list(section["cors_origins"]),
    )
    app = create_app(graph, store, service_config)
    sock = socket.create_server((service_config.host, service_config.port))
    bound_host, bound_port = sock.getsockname()[:2]
    click.echo(f"serving {source} on http://{bound_host}:{bound_port}")
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    server.run(sockets=[sock])


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cli.main(args=list(argv) if argv is not None else None, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (DataError, ConfigError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except ElgError as exc:
        click.echo(f"internal error: {exc}", err=True)
        return 3
    except Exception as exc:  # noqa: BLE001 - last-resort exit-code mapping
        click.echo(f"internal error: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
