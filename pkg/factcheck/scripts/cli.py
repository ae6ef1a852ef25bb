import functools
import json
import sys
from pathlib import Path

import click
from pydantic import ValidationError as PydanticValidationError

from factcheck.errors import StageError, StartupError, ValidationError
from factcheck.pipeline import (
    ENHANCED,
    PREDICTIONS,
    RETRIEVED,
    SELECTED,
    PipelineConfig,
    Workspace,
    enhance_stage,
    ingest_report,
    retrieve_stage,
    run_pipeline,
    score_files,
    score_stage,
    select_stage,
    threshold_sweep,
    train_stage,
    verify_stage,
)
from factcheck.retrieval import Strategy
from factcheck.selection import SentenceScorer
from factcheck.synthetic import SyntheticSpec, generate_synthetic, write_synthetic
from factcheck.util import configure_logging
from factcheck.verification import FeatureConfig


def exit_code(error: Exception) -> int:
    """1 for bad input data, 2 for any other failure."""
    if isinstance(error, (ValidationError, PydanticValidationError)):
        return 1
    if isinstance(error, StageError) and isinstance(error.cause, ValidationError):
        return 1
    return 2


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except Exception as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(exit_code(e))

    return wrapper


def config_options(fn):
    """Options shared by every stage command; each one overrides its config-file key."""
    options = [
        click.option("--config", "config_path", type=click.Path(path_type=Path), help="Pipeline config file (KEY=value lines)."),
        click.option("--out-dir", type=click.Path(path_type=Path), help="Directory for intermediate artifacts."),
        click.option("--corpus", type=click.Path(path_type=Path), help="Corpus JSONL file."),
        click.option("--claims", type=click.Path(path_type=Path), help="Claims file to process."),
        click.option("--checkpoint-dir", type=click.Path(path_type=Path), help="Directory holding the stage checkpoints."),
        click.option("--strategy", type=click.Choice([s.value for s in Strategy]), help="Document retrieval strategy."),
        click.option("--k", type=int, help="Disambiguative documents kept per claim."),
        click.option("--doc-threshold", type=float, help="Document probability threshold."),
        click.option("--sent-threshold", type=float, help="Sentence probability threshold."),
        click.option("--scorer", type=click.Choice([s.value for s in SentenceScorer]), help="Sentence scorer."),
        click.option("--features", help='Verification features, e.g. "wn,num,srs".'),
        click.option("--enhance/--no-enhance", default=None, help="Apply evidence enhancement."),
        click.option("--max-workers", type=int, help="Claim-parallel worker count."),
        click.option("--log-level", default=None, help="Logging level."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def with_overrides(model, **values):
    """Re-validated copy of a nested config with the non-None values applied."""
    return model.model_validate({**model.model_dump(), **{k: v for k, v in values.items() if v is not None}})


def load_config(
    config_path=None,
    out_dir=None,
    corpus=None,
    claims=None,
    checkpoint_dir=None,
    doc_model=None,
    sent_model=None,
    verif_model=None,
    strategy=None,
    k=None,
    doc_threshold=None,
    sent_threshold=None,
    scorer=None,
    features=None,
    enhance=None,
    max_workers=None,
    log_level=None,
) -> PipelineConfig:
    configure_logging(log_level)
    config = PipelineConfig.load(
        config_path,
        output_dir=out_dir,
        corpus=corpus,
        claims=claims,
        checkpoint_dir=checkpoint_dir,
        doc_model=doc_model,
        sent_model=sent_model,
        verif_model=verif_model,
        enhance=enhance,
        max_workers=max_workers,
    )
    update = {
        "retrieval": with_overrides(config.retrieval, strategy=strategy, k=k, doc_threshold=doc_threshold),
        "selection": with_overrides(config.selection, sent_threshold=sent_threshold, scorer=scorer),
    }
    if features is not None:
        update["features"] = FeatureConfig.parse(features)
    return config.model_copy(update=update)


@click.group()
def cli():
    """Fact extraction and verification with neural semantic matching networks."""


@cli.command()
@click.argument("corpus", type=click.Path(exists=True, path_type=Path))
@click.option("--claims", type=click.Path(exists=True, path_type=Path), help="Validate a claims file against the corpus.")
@click.option("--log-level", default=None, help="Logging level.")
@handle_errors
def ingest(corpus: Path, claims: Path, log_level: str):
    """Parse and index a corpus, optionally validating a claims file."""
    configure_logging(log_level)
    report = ingest_report(corpus, claims)
    click.echo(f"Documents: {report['documents']} ({report['disambiguative']} disambiguative)")
    if "claims" in report:
        for label, count in report["claims"].items():
            click.echo(f"  {label}: {count}")
        click.echo(f"  doc-difficult: {report['doc_difficult']}")


@cli.command("gen-synthetic")
@click.argument("out_dir", type=click.Path(path_type=Path))
@click.option("--docs", "n_docs", type=int, default=100, help="Number of documents.")
@click.option("--claims-per-label", type=int, default=40, help="Claims generated per label.")
@click.option("--disambiguative-fraction", type=float, default=0.10, help="Share of disambiguative documents.")
@click.option("--dev-fraction", type=float, default=0.2, help="Share of each label held out for dev.")
@click.option("--seed", type=int, default=0, help="Generator seed.")
@click.option("--log-level", default=None, help="Logging level.")
@handle_errors
def gen_synthetic(
    out_dir: Path,
    n_docs: int,
    claims_per_label: int,
    disambiguative_fraction: float,
    dev_fraction: float,
    seed: int,
    log_level: str,
):
    """Generate a seeded synthetic corpus, claims, ontology and generation trace."""
    configure_logging(log_level)
    spec = SyntheticSpec(
        n_docs=n_docs,
        claims_per_label=claims_per_label,
        disambiguative_fraction=disambiguative_fraction,
        dev_fraction=dev_fraction,
    )
    data = generate_synthetic(spec, seed)
    for path in write_synthetic(data, out_dir):
        click.echo(f"  Wrote {path}")
    click.echo(
        f"{data.stats['n_docs']} documents ({data.stats['n_disambiguative']} disambiguative), "
        f"{len(data.claims)} claims"
    )


@cli.command()
@click.argument("stage", type=click.Choice(["doc", "sent", "verif"]))
@config_options
@click.option("--epochs", type=int, help="Training epochs for this stage.")
@click.option("--dim", type=int, help="Hidden width d1 = d2 = d3 for this stage.")
@click.option("--annealed/--no-annealed", default=None, help="Annealed negative sampling (sentence stage).")
@click.option("--resume", is_flag=True, help="Continue from the existing checkpoint.")
@handle_errors
def train(stage: str, epochs: int, dim: int, annealed: bool, resume: bool, **options):
    """Train the document (doc), sentence (sent) or verification (verif) matcher."""
    config = load_config(**options)
    field = f"{stage}_training"
    training = with_overrides(getattr(config, field), epochs=epochs, dim=dim, annealed=annealed)
    config = config.model_copy(update={field: training})
    click.echo(f"Training {stage} stage for {training.epochs} epoch(s)...")
    path = train_stage(stage, config, resume=resume)
    click.echo(f"Checkpoint saved to {path}")


def _out_option(help_text):
    return click.option("--out", type=click.Path(path_type=Path), help=help_text)


def _model_option(stage_name):
    return click.option("--model", type=click.Path(path_type=Path), help=f"{stage_name} checkpoint, overriding CHECKPOINT_DIR.")


@cli.command()
@config_options
@_model_option("Document matcher")
@_out_option("Retrieved-documents JSONL to write.")
@handle_errors
def retrieve(model: Path, out: Path, **options):
    """Document retrieval for every claim."""
    ws = Workspace(load_config(doc_model=model, **options))
    retrieved = retrieve_stage(ws, out=out)
    click.echo(f"Retrieved documents for {len(retrieved)} claims into {ws.target(RETRIEVED, out)}")


@cli.command()
@config_options
@click.option("--retrieved", type=click.Path(path_type=Path), help="Retrieved-documents JSONL to read.")
@_model_option("Sentence matcher")
@_out_option("Selected-evidence JSONL to write.")
@handle_errors
def select(retrieved: Path, model: Path, out: Path, **options):
    """Sentence selection over the retrieved documents."""
    ws = Workspace(load_config(sent_model=model, **options))
    selected = select_stage(ws, source=retrieved, out=out)
    click.echo(f"Selected evidence for {len(selected)} claims into {ws.target(SELECTED, out)}")


@cli.command()
@config_options
@click.option("--selected", type=click.Path(path_type=Path), help="Selected-evidence JSONL to read.")
@_out_option("Enhanced-evidence JSONL to write.")
@handle_errors
def enhance(selected: Path, out: Path, **options):
    """Add one hyperlinked sentence to each claim's selected evidence."""
    ws = Workspace(load_config(**options))
    enhanced = enhance_stage(ws, source=selected, out=out)
    click.echo(f"Enhanced evidence for {len(enhanced)} claims into {ws.target(ENHANCED, out)}")


@cli.command()
@config_options
@click.option("--selected", type=click.Path(path_type=Path), help="Evidence JSONL to read (selected or enhanced).")
@_model_option("Verification matcher")
@_out_option("Predictions JSONL to write.")
@handle_errors
def verify(selected: Path, model: Path, out: Path, **options):
    """Label every claim from its evidence."""
    ws = Workspace(load_config(verif_model=model, **options))
    predictions = verify_stage(ws, source=selected, out=out)
    click.echo(f"Wrote {len(predictions)} predictions into {ws.target(PREDICTIONS, out)}")


def _echo_report(report):
    click.echo(json.dumps(report.to_dict(), indent=2, sort_keys=True))


@cli.command()
@config_options
@click.option("--gold", type=click.Path(path_type=Path), help="Gold claims JSONL (defaults to CLAIMS).")
@click.option("--pred", type=click.Path(path_type=Path), help="Predictions JSONL (defaults to the workspace predictions).")
@click.option("--subset", type=click.Choice(["doc", "sentence"]), help="Score only the doc- or sentence-difficult claims.")
@handle_errors
def score(gold: Path, pred: Path, subset: str, **options):
    """FEVER, OFEVER, label accuracy and evidence P/R/F1 of the predictions."""
    config = load_config(**options)
    if gold is None and pred is None:
        _echo_report(score_stage(Workspace(config), subset=subset))
        return
    gold = gold or config.claims
    if gold is None:
        raise StartupError("no gold claims: pass --gold or set CLAIMS")
    pred = pred or config.output_dir / PREDICTIONS
    _echo_report(score_files(gold, pred, subset=subset, corpus_path=config.corpus))


@cli.command()
@config_options
@handle_errors
def pipeline(**options):
    """Run retrieve, select, enhance, verify and score end to end."""
    config = load_config(**options)
    click.echo("Running pipeline...")
    result = run_pipeline(config)
    for name, digest in sorted(result.artifacts.items()):
        click.echo(f"  {name}: {digest}")
    _echo_report(result.report)


@cli.command()
@config_options
@click.option("--thresholds", default="0.5,0.3,0.1,0.05", help="Comma-separated sentence thresholds.")
@handle_errors
def sweep(thresholds: str, **options):
    """Re-run selection and verification under several sentence thresholds."""
    values = [float(t) for t in thresholds.split(",") if t.strip()]
    rows = threshold_sweep(load_config(**options), values)
    for row in rows:
        click.echo(
            f"threshold {row['threshold']:g}: label accuracy {row['label_accuracy']:.4f}, "
            f"FEVER {row['fever']:.4f}"
        )


def main():
    cli()


if __name__ == "__main__":
    main()
