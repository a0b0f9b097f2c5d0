"""Command-line entry point: ingest, index, extract, detect, synth, evaluate,
estimate, serve.

Exit codes: 0 success, 1 runtime failure (stage-labeled), 2 usage/validation
error raised before any work. Every run writes its resolved config next to
its outputs; provider credentials come exclusively from the environment.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import estimation, synth
from .config import RunConfig, resolve_config, save_resolved_config
from .corpus import (
    BlockFilter,
    ingest_snapshot,
    load_snapshot,
    sample_blocks,
    save_snapshot,
)
from .detectors import (
    run_agent,
    run_nli_pipeline,
    run_retrieve_and_verify,
    save_results,
)
from .embedding import HashEmbedder, build_index, load_index
from .errors import ConfigError, ContracheckError
from .evaluation import (
    evaluate,
    load_dataset,
    select_threshold,
)
from .detectors.types import load_results
from .facts import extract_facts, load_facts, save_facts, screen_faithfulness
from .llm import HttpChatProvider, OracleNliProvider, RunLog, ScriptedProvider

SYSTEM_ALIASES = {
    "agent": "agent",
    "rv": "retrieve_verify",
    "retrieve_verify": "retrieve_verify",
    "nli": "nli_pipeline",
    "nli_pipeline": "nli_pipeline",
}


def _fail(exc: ContracheckError) -> "click.ClickException":
    stage = exc.stage or "runtime"
    return click.ClickException(f"[{stage}] {exc}")


def _resolve(flags, config_file=None) -> RunConfig:
    try:
        return resolve_config(flags, config_file)
    except ConfigError as exc:
        raise click.UsageError(str(exc))


def build_provider(config: RunConfig):
    """Provider from resolved config; misconfiguration is a usage error."""
    if config.provider == "scripted":
        if not config.transcript_path:
            raise click.UsageError("provider 'scripted' requires --transcript")
        return ScriptedProvider.from_file(config.transcript_path)
    if config.provider == "oracle":
        if not config.cases_path:
            raise click.UsageError("provider 'oracle' requires --cases")
        return OracleNliProvider(synth.refutation_map(synth.load_cases(config.cases_path)))
    if config.provider == "http":
        if not config.base_url or not config.model:
            raise click.UsageError("provider 'http' requires --base-url and --model")
        return HttpChatProvider(config.base_url, config.model)
    raise click.UsageError(f"unknown provider {config.provider!r}")


provider_options = [
    click.option("--provider", type=click.Choice(["scripted", "oracle", "http"]), default=None),
    click.option("--transcript", "transcript_path", type=click.Path(), default=None),
    click.option("--cases", "cases_path", type=click.Path(), default=None),
    click.option("--base-url", default=None),
    click.option("--model", default=None),
]


def with_provider_options(command):
    for option in reversed(provider_options):
        command = option(command)
    return command


@click.group()
@click.version_option()
def main():
    """Corpus-level contradiction detection toolkit."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_dir", required=True, type=click.Path())
@click.option("--min-chars", default=100, show_default=True)
@click.option("--max-chars", default=320, show_default=True)
@click.option("--snapshot-date", default="1970-01-01", show_default=True)
def ingest(input_path, output_dir, min_chars, max_chars, snapshot_date):
    """Build a frozen snapshot from line-delimited block records."""
    try:
        with open(input_path, encoding="utf-8") as fh:
            snapshot = ingest_snapshot(
                fh, BlockFilter(min_chars, max_chars), snapshot_date=snapshot_date
            )
        save_snapshot(snapshot, output_dir)
    except ContracheckError as exc:
        raise _fail(exc)
    click.echo(f"ingested {len(snapshot)} blocks -> {output_dir}")


@main.command()
@click.option("--snapshot", "snapshot_dir", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--dim", default=256, show_default=True)
def index(snapshot_dir, output_path, dim):
    """Embed every block and write the binary vector index."""
    try:
        snapshot = load_snapshot(snapshot_dir)
        built = build_index(list(snapshot.blocks.values()), HashEmbedder(dim))
        built.save(output_path)
    except ContracheckError as exc:
        raise _fail(exc)
    click.echo(f"indexed {len(built)} blocks (dim {dim}) -> {output_path}")


@main.command()
@click.option("--snapshot", "snapshot_dir", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--sample", "sample_n", type=int, default=None, help="Extract from a sample of blocks.")
@click.option("--stratify/--no-stratify", default=False)
@click.option("--seed", type=int, default=None)
@click.option("--faithfulness/--no-faithfulness", "screen", default=False,
              help="Drop facts failing the automated faithfulness proxy.")
@with_provider_options
def extract(snapshot_dir, output_path, sample_n, stratify, seed, screen, **provider_flags):
    """Split blocks into atomic facts via the extraction prompt."""
    config = _resolve({**provider_flags, "seed": seed})
    provider = build_provider(config)
    try:
        snapshot = load_snapshot(snapshot_dir)
        blocks = list(snapshot.blocks.values())
        if sample_n is not None:
            blocks = sample_blocks(snapshot, sample_n, config.seed, stratify_by_category=stratify)
        facts = []
        for block in blocks:
            facts.extend(extract_facts(block, provider))
        if screen:
            facts = screen_faithfulness(facts, provider)
        save_facts(facts, output_path)
    except ContracheckError as exc:
        raise _fail(exc)
    click.echo(f"extracted {len(facts)} facts from {len(blocks)} blocks -> {output_path}")


@main.command()
@click.option("--system", "system_alias", type=click.Choice(sorted(SYSTEM_ALIASES)), required=True)
@click.option("--snapshot", "snapshot_path", type=click.Path(exists=True), default=None)
@click.option("--index", "index_path", type=click.Path(exists=True), default=None)
@click.option("--facts", "facts_path", type=click.Path(exists=True), default=None)
@click.option("--output-dir", type=click.Path(), default=None)
@click.option("--config", "config_file", type=click.Path(exists=True), default=None)
@click.option("--budget", type=int, default=None)
@click.option("--k-search", type=int, default=None)
@click.option("--k-baseline", type=int, default=None)
@click.option("--rerank/--no-rerank", "rerank", default=None)
@click.option("--count-threshold", type=int, default=None)
@click.option("--embedder-dim", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--jobs", type=int, default=None)
@with_provider_options
def detect(system_alias, config_file, **flags):
    """Run one detection system over a facts file."""
    flags["system"] = SYSTEM_ALIASES[system_alias]
    config = _resolve(flags, config_file)
    for required in ("snapshot_path", "index_path", "facts_path", "output_dir"):
        if getattr(config, required) is None:
            raise click.UsageError(f"detect requires --{required.replace('_', '-')}")
    provider = build_provider(config)
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    try:
        snapshot = load_snapshot(config.snapshot_path)
        vector_index = load_index(config.index_path, snapshot, HashEmbedder(config.embedder_dim))
        facts = load_facts(config.facts_path)
        run_log = RunLog()

        def detect_one(fact):
            if config.system == "agent":
                return run_agent(
                    fact, snapshot, vector_index, provider,
                    budget=config.budget, k_per_search=config.k_search,
                    use_rerank=config.rerank, run_log=run_log,
                )
            if config.system == "retrieve_verify":
                return run_retrieve_and_verify(
                    fact, vector_index, provider,
                    k=config.k_baseline, use_rerank=config.rerank, run_log=run_log,
                )
            return run_nli_pipeline(
                fact, vector_index, provider,
                k=config.k_baseline, count_threshold=config.count_threshold, run_log=run_log,
            )

        ordered = sorted(facts, key=lambda f: f.fact_id)
        if config.jobs > 1:
            with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                results = list(pool.map(detect_one, ordered))
        else:
            results = [detect_one(fact) for fact in ordered]
        save_results(results, output_dir / "results.jsonl")
        save_resolved_config(config, output_dir / "resolved_config.json")
        run_log.save(output_dir / "run_log.jsonl")
    except ContracheckError as exc:
        raise _fail(exc)
    click.echo(f"detected over {len(results)} facts -> {output_dir / 'results.jsonl'}")


@main.command("synth")
@click.option("--snapshot", "snapshot_dir", required=True, type=click.Path(exists=True))
@click.option("--facts", "facts_path", required=True, type=click.Path(exists=True))
@click.option("--n", "n_cases", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output-dir", required=True, type=click.Path())
@click.option("--distribution", "distribution_path", type=click.Path(exists=True), default=None,
              help="JSON file of type -> probability; defaults to the observed taxonomy shares.")
@click.option("--split", type=click.Choice(["validation", "test"]), default="test", show_default=True)
def synth_command(snapshot_dir, facts_path, n_cases, seed, output_dir, distribution_path, split):
    """Inject labeled contradictions and emit a benchmark."""
    try:
        snapshot = load_snapshot(snapshot_dir)
        facts = load_facts(facts_path)
        distribution = synth.DEFAULT_DISTRIBUTION
        if distribution_path:
            distribution = json.loads(Path(distribution_path).read_text(encoding="utf-8"))
        mutated, cases = synth.inject(snapshot, facts, distribution, n=n_cases, seed=seed)
        output = Path(output_dir)
        output.mkdir(parents=True, exist_ok=True)
        save_snapshot(mutated, output / "mutated_snapshot")
        synth.save_cases(cases, output / "cases.jsonl")
        injected_ids = {case.fact.fact_id for case in cases}
        clean = [fact for fact in facts if fact.fact_id not in injected_ids]
        labeled = synth.cases_to_labeled(cases, clean, split=split)
        from .evaluation import save_dataset

        save_dataset(labeled, output / "benchmark.jsonl")
    except ContracheckError as exc:
        raise _fail(exc)
    click.echo(
        f"injected {len(cases)} cases (seed {seed}) -> {output}; benchmark of {len(labeled)} facts"
    )


@main.command("evaluate")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--results", "results_path", required=True, type=click.Path(exists=True))
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--select-threshold", "select_from_validation", is_flag=True,
              help="Pick the threshold maximizing F1 on the validation split first.")
@click.option("--format", "output_format", type=click.Choice(["table", "records"]),
              default="table", show_default=True)
@click.option("--output", "output_path", type=click.Path(), default=None)
def evaluate_command(dataset_path, results_path, threshold, select_from_validation,
                     output_format, output_path):
    """Score detection results against gold labels."""
    try:
        dataset = load_dataset(dataset_path)
        results = load_results(results_path)
        if select_from_validation:
            validation = [item for item in dataset if item.split == "validation"]
            by_fact = {r.fact_id: r for r in results}
            scores = [by_fact[item.fact.fact_id].score for item in validation]
            golds = [item.gold_label for item in validation]
            threshold = select_threshold(scores, golds)
            dataset = [item for item in dataset if item.split == "test"]
            results = [by_fact[item.fact.fact_id] for item in dataset]
        report = evaluate(dataset, results, threshold)
    except ContracheckError as exc:
        raise _fail(exc)
    rendered = (
        report.to_table()
        if output_format == "table"
        else json.dumps(report.to_record(), ensure_ascii=False, sort_keys=True, indent=2)
    )
    if output_path:
        Path(output_path).write_text(rendered + "\n", encoding="utf-8")
    click.echo(rendered)


@main.command("estimate")
@click.option("--confirmations", "confirmations_path", required=True, type=click.Path(exists=True),
              help="Line-delimited records {fact_id, category, confirmed}.")
@click.option("--confidence", type=float, default=0.99, show_default=True)
@click.option("--method", type=click.Choice(["wald", "wilson"]), default="wald", show_default=True)
@click.option("--total-facts", type=int, default=None,
              help="Corpus-wide fact count for extrapolating the interval.")
@click.option("--format", "output_format", type=click.Choice(["table", "records"]),
              default="table", show_default=True)
def estimate_command(confirmations_path, confidence, method, total_facts, output_format):
    """Prevalence estimate and per-category rates from reviewed samples."""
    try:
        records = []
        with open(confirmations_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    records.append(json.loads(line))
        confirmed = sum(1 for r in records if r["confirmed"])
        estimate = estimation.proportion_ci(confirmed, len(records), confidence, method=method)
        rates = estimation.per_category_rates(
            [(r["category"], bool(r["confirmed"])) for r in records]
        )
        extrapolated = (
            estimation.extrapolate(estimate.interval, total_facts) if total_facts else None
        )
    except ContracheckError as exc:
        raise _fail(exc)
    except (KeyError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"[estimation] malformed confirmations file: {exc}")
    if output_format == "records":
        payload = {
            "estimate": estimate.to_record(),
            "per_category": {
                c: {"rate": r.rate, "confirmed": r.confirmed, "total": r.total}
                for c, r in rates.items()
            },
            "extrapolated": list(extrapolated) if extrapolated else None,
        }
        click.echo(json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2))
        return
    click.echo(
        f"estimate: {estimate.p_hat:.4f} +/- {estimate.margin:.4f} "
        f"[{estimate.interval[0]:.4f}, {estimate.interval[1]:.4f}] "
        f"at {confidence:.0%} confidence (n={estimate.n}, z={estimate.z:.4f})"
    )
    if extrapolated:
        click.echo(f"extrapolated count range: {extrapolated[0]:,} - {extrapolated[1]:,}")
    click.echo(f"{'category':<24}{'rate':>8}{'confirmed':>11}{'total':>7}")
    for category, rate in rates.items():
        click.echo(f"{category:<24}{rate.rate:>8.3f}{rate.confirmed:>11}{rate.total:>7}")


@main.command()
@click.option("--snapshot", "snapshot_dir", required=True, type=click.Path(exists=True))
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--embedder-dim", type=int, default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8400, show_default=True)
@click.option("--store-log", "store_log", type=click.Path(), default=None,
              help="Durable append-only event log for the review store.")
@click.option("--workers", type=int, default=2, show_default=True)
@with_provider_options
def serve(snapshot_dir, index_path, host, port, store_log, workers, embedder_dim, **provider_flags):
    """Run the HTTP review service."""
    import uvicorn

    from .service import ReviewService, ReviewStore
    from .service.app import create_app

    config = _resolve({**provider_flags, "embedder_dim": embedder_dim})
    provider = build_provider(config)
    try:
        snapshot = load_snapshot(snapshot_dir)
        vector_index = load_index(index_path, snapshot, HashEmbedder(config.embedder_dim))
    except ContracheckError as exc:
        raise _fail(exc)
    store = ReviewStore(store_log) if store_log else ReviewStore()
    service = ReviewService(
        snapshot, vector_index, provider, config=config, store=store, max_workers=workers
    )
    uvicorn.run(create_app(service), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
