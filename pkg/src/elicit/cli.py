"""Command-line interface: synthetic data, dataset utilities, the
evaluation harness, theory audits, and the session service."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .data import (
    Dataset,
    DatasetFormatError,
    SplitSpec,
    SyntheticConfig,
    generate_synthetic,
    load_dataset,
    save_dataset,
    split_entities,
)
from .evaluate import (
    TrialConfig,
    run_experiment,
    write_records_csv,
    write_reliability_csv,
    write_report_json,
)
from .gateway import RemoteModelConfig, RemotePredictor
from .model import fit_tabular
from .policy import MctsConfig, PolicyConfig
from .predictor import TabularPredictor
from .serialize import canonical_json
from .theory import audit_greedy_bound, audit_simulator_bound


@click.group()
def main():
    """Adaptive information-elicitation toolkit."""


@main.group()
def data():
    """Dataset generation, validation, and splitting."""


@data.command("gen")
@click.option("--out", type=click.Path(), required=True)
@click.option("--n-entities", default=200, show_default=True)
@click.option("--n-questions", default=60, show_default=True)
@click.option("--alphabet-size", default=4, show_default=True)
@click.option("--n-latent-clusters", default=6, show_default=True)
@click.option("--noise", default=0.2, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--feature-dim", default=16, show_default=True)
def data_gen(out, n_entities, n_questions, alphabet_size, n_latent_clusters, noise, seed, feature_dim):
    """Generate a cluster-structured synthetic corpus."""
    config = SyntheticConfig(
        n_entities=n_entities, n_questions=n_questions, alphabet_size=alphabet_size,
        n_latent_clusters=n_latent_clusters, noise=noise, seed=seed, feature_dim=feature_dim,
    )
    save_dataset(generate_synthetic(config), out)
    click.echo(f"wrote {out}")


@data.command("validate")
@click.argument("path", type=click.Path(exists=True))
def data_validate(path):
    """Validate a dataset file against the schema."""
    try:
        ds = load_dataset(path)
    except DatasetFormatError as exc:
        click.echo(f"INVALID: {exc}", err=True)
        sys.exit(1)
    click.echo(f"OK: {len(ds.catalog)} questions, {len(ds.entities)} entities")


@data.command("split")
@click.argument("path", type=click.Path(exists=True))
@click.option("--train", default=0.70, show_default=True)
@click.option("--val", default=0.15, show_default=True)
@click.option("--test", default=0.15, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="write the split as JSON")
def data_split(path, train, val, test, seed, out):
    """Deterministic entity-level split."""
    ds = load_dataset(path)
    parts = split_entities(ds, SplitSpec(train, val, test, seed))
    obj = dict(zip(("train", "val", "test"), parts))
    text = canonical_json(obj, indent=2)
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


def _build_model(dataset: Dataset, model_kind: str, endpoint: str | None, smoothing: float):
    table = fit_tabular(dataset.catalog, dataset.records(), smoothing)
    if model_kind == "tabular":
        return TabularPredictor(table, dataset.catalog)
    if model_kind == "remote":
        if not endpoint:
            raise click.UsageError("--endpoint is required with --model remote")
        return RemotePredictor(RemoteModelConfig(endpoint), dataset.catalog)
    raise click.UsageError(f"unknown model {model_kind!r}")


@main.group()
def eval():
    """Evaluation harness."""


@eval.command("run")
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), required=True)
@click.option("--model", "model_kind", type=click.Choice(["tabular", "remote"]), default="tabular", show_default=True)
@click.option("--endpoint", default=None, help="logprob endpoint for --model remote")
@click.option("--policy", type=click.Choice(["random", "similarity", "greedy", "mcts"]), default="greedy", show_default=True)
@click.option("--candidates", default=20, show_default=True)
@click.option("--targets", default=5, show_default=True)
@click.option("--rounds", default=8, show_default=True)
@click.option("--trials", default=100, show_default=True)
@click.option("--subgroup", type=click.Choice(["all", "medium", "hard"]), default="all", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--smoothing", default=1.0, show_default=True)
@click.option("--oracle", type=click.Choice(["replay", "model"]), default="replay", show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
def eval_run(dataset_path, model_kind, endpoint, policy, candidates, targets, rounds,
             trials, subgroup, seed, smoothing, oracle, out_dir):
    """Run seeded trials and write report.json / records.csv / reliability.csv."""
    dataset = load_dataset(dataset_path)
    train_ids, _, test_ids = split_entities(dataset, SplitSpec(seed=seed))
    table = fit_tabular(dataset.catalog, dataset.records(train_ids), smoothing)
    if model_kind == "tabular":
        model = TabularPredictor(table, dataset.catalog)
    else:
        if not endpoint:
            raise click.UsageError("--endpoint is required with --model remote")
        model = RemotePredictor(RemoteModelConfig(endpoint), dataset.catalog)
    config = TrialConfig(
        n_candidates=candidates, n_targets=targets, rounds=rounds,
        policy=PolicyConfig(kind=policy, seed=seed, mcts=MctsConfig()),
        subgroup=subgroup, seed=seed, oracle=oracle,
    )
    result = run_experiment(dataset, model, config, trials,
                            entity_ids=test_ids, train_ids=train_ids)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report_json(result, out / "report.json")
    write_records_csv(result.records, out / "records.csv")
    write_reliability_csv(result.report, out / "reliability.csv")
    click.echo(f"wrote {out}/report.json ({trials} trials, {result.n_failed} flagged)")


@main.command("theory")
@click.option("--pairs", default=100, show_default=True, help="random (p, q) pairs for the transfer bound")
@click.option("--instances", default=100, show_default=True, help="random instances for the greedy bound")
@click.option("--probe-checks", default=40, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def theory_cmd(pairs, instances, probe_checks, seed, out):
    """Run the randomized theory audits and emit a JSON report."""
    report = {
        "simulator_bound": audit_simulator_bound(pairs, seed),
        "greedy_bound": audit_greedy_bound(instances, seed, probe_checks),
    }
    text = canonical_json(report, indent=2)
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), default=None)
@click.option("--log-dir", type=click.Path(), default=None)
@click.option("--ui-dir", type=click.Path(), default=None)
def serve(host, port, dataset_path, log_dir, ui_dir):
    """Serve the live elicitation session API (demo instance by default)."""
    import os

    import uvicorn

    from .service import create_app, engine_from_env

    if dataset_path:
        os.environ["ELICIT_DATASET"] = dataset_path
    if log_dir:
        os.environ["ELICIT_LOG_DIR"] = log_dir
    engine = engine_from_env()
    uvicorn.run(create_app(engine, ui_dir), host=host, port=port)


if __name__ == "__main__":
    main()
