import json

import pytest
from click.testing import CliRunner

from factcheck.errors import ParseError, StageError, StartupError
from factcheck.input import load_claim_file
from factcheck.model import Head, save_checkpoint
from factcheck.output import MANIFEST_NAME
from factcheck.retrieval import Strategy
from factcheck.scoring import Prediction
from factcheck.scripts.cli import cli, exit_code, load_config
from factcheck.verification import FeatureConfig


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def config_file(tmp_path, synthetic_dir):
    path = tmp_path / "pipeline.env"
    path.write_text(
        "\n".join(
            [
                f"CORPUS={synthetic_dir / 'corpus.jsonl'}",
                f"CLAIMS={synthetic_dir / 'dev.jsonl'}",
                f"ONTOLOGY={synthetic_dir / 'ontology.tsv'}",
                f"CHECKPOINT_DIR={tmp_path / 'checkpoints'}",
                f"OUTPUT_DIR={tmp_path / 'out'}",
                "RETRIEVAL__STRATEGY=km+pageview",
                "RETRIEVAL__K=3",
                "SELECTION__SCORER=tfidf",
            ]
        )
        + "\n"
    )
    return path


def test_exit_codes():
    assert exit_code(ParseError("bad row", 3)) == 1
    assert exit_code(StageError("select", ParseError("bad row"))) == 1
    assert exit_code(StartupError("missing")) == 2
    assert exit_code(StageError("verify", RuntimeError("boom"))) == 2


def test_gen_synthetic_and_ingest(runner, tmp_path):
    out = tmp_path / "synthetic"
    result = runner.invoke(cli, ["gen-synthetic", str(out), "--docs", "30", "--claims-per-label", "4", "--seed", "2"])
    assert result.exit_code == 0, result.output
    assert (out / "corpus.jsonl").exists() and (out / "manifest.json").exists()

    result = runner.invoke(cli, ["ingest", str(out / "corpus.jsonl"), "--claims", str(out / "claims.jsonl")])
    assert result.exit_code == 0, result.output
    assert "Documents: 30" in result.output
    assert "SUPPORTS: 4" in result.output


def test_ingest_bad_line_exits_with_one(runner, tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text('{"id": "A", "title": "A", "sentences": ["A"]}\n{"id": "B", "title": \n')
    result = runner.invoke(cli, ["ingest", str(corpus)])
    assert result.exit_code == 1
    assert "line 2" in result.output


def test_missing_config_exits_with_two(runner, tmp_path):
    result = runner.invoke(cli, ["retrieve", "--config", str(tmp_path / "nope.env")])
    assert result.exit_code == 2
    assert "does not exist" in result.output


def test_cli_flags_beat_config_file(config_file, tmp_path):
    config = load_config(config_path=config_file)
    assert config.retrieval.strategy is Strategy.KM_PAGEVIEW and config.retrieval.k == 3
    config = load_config(config_path=config_file, k=2, strategy="km+tfidf", features="wn,srs", enhance=False)
    assert config.retrieval.k == 2 and config.retrieval.strategy is Strategy.KM_TFIDF
    assert not config.features.number and config.enhance is False
    assert config.output_dir == tmp_path / "out"


def test_retrieve_and_select_without_models(runner, config_file, tmp_path):
    result = runner.invoke(cli, ["retrieve", "--config", str(config_file)])
    assert result.exit_code == 0, result.output
    rows = [json.loads(line) for line in (tmp_path / "out" / "retrieved.jsonl").read_text().splitlines()]
    assert rows and all(row["retrieved"] == [d[0] for d in row["docs"]] for row in rows)

    result = runner.invoke(cli, ["select", "--config", str(config_file)])
    assert result.exit_code == 0, result.output
    for line in (tmp_path / "out" / "selected.jsonl").read_text().splitlines():
        assert len(json.loads(line)["evidence"]) <= 5
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert {"retrieved.jsonl", "selected.jsonl"} <= set(manifest)


def test_verify_without_checkpoint_exits_with_two(runner, config_file):
    assert runner.invoke(cli, ["retrieve", "--config", str(config_file)]).exit_code == 0
    assert runner.invoke(cli, ["select", "--config", str(config_file), "--no-enhance"]).exit_code == 0
    result = runner.invoke(cli, ["verify", "--config", str(config_file), "--no-enhance"])
    assert result.exit_code == 2
    assert "vnsmn.json" in result.output


def _stage_flags(synthetic_dir):
    return ["--corpus", str(synthetic_dir / "corpus.jsonl"), "--claims", str(synthetic_dir / "dev.jsonl")]


def test_stage_io_flags(runner, synthetic_dir, tiny_model, tmp_path):
    flags = _stage_flags(synthetic_dir) + ["--log-level", "WARNING"]
    retrieved, selected, predictions = tmp_path / "r.jsonl", tmp_path / "s.jsonl", tmp_path / "p.jsonl"

    result = runner.invoke(cli, ["retrieve", *flags, "--strategy", "km+pageview", "--k", "3", "--out", str(retrieved)])
    assert result.exit_code == 0, result.output
    assert retrieved.exists()

    result = runner.invoke(
        cli, ["select", *flags, "--retrieved", str(retrieved), "--scorer", "tfidf", "--out", str(selected)]
    )
    assert result.exit_code == 0, result.output

    features = FeatureConfig()
    model = tiny_model(["dogs bark ."], head=Head.VERIFICATION, feature_dim=features.fixed_width, number=features.number)
    checkpoint = save_checkpoint(tmp_path / "custom_verifier.json", model)
    result = runner.invoke(
        cli, ["verify", *flags, "--selected", str(selected), "--model", str(checkpoint), "--out", str(predictions)]
    )
    assert result.exit_code == 0, result.output
    rows = [json.loads(line) for line in predictions.read_text().splitlines()]
    assert len(rows) == len(load_claim_file(synthetic_dir / "dev.jsonl"))

    manifest = json.loads((tmp_path / MANIFEST_NAME).read_text())
    assert {"r.jsonl", "s.jsonl", "p.jsonl"} <= set(manifest)


def test_score_standalone_files(runner, synthetic_dir, tmp_path):
    gold = synthetic_dir / "dev.jsonl"
    records = load_claim_file(gold)
    pred = tmp_path / "pred.jsonl"
    rows = [Prediction(r.id, r.label, r.evidence_groups[0] if r.evidence_groups else []) for r in records]
    pred.write_text("".join(json.dumps(p.to_json()) + "\n" for p in rows))
    args = ["score", "--gold", str(gold), "--pred", str(pred), "--log-level", "WARNING"]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["n_claims"] == len(records)
    assert report["label_accuracy"] == 1.0

    result = runner.invoke(cli, args + ["--subset", "doc"])
    assert result.exit_code == 2
    assert "corpus" in result.output

    result = runner.invoke(cli, args + ["--subset", "doc", "--corpus", str(synthetic_dir / "corpus.jsonl")])
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["n_claims"] <= len(records)


def test_missing_model_flag_names_the_file(runner, synthetic_dir, tmp_path):
    result = runner.invoke(
        cli,
        ["retrieve", *_stage_flags(synthetic_dir), "--strategy", "km+dnsmn", "--model", str(tmp_path / "absent.json")],
    )
    assert result.exit_code == 2
    assert "absent.json" in result.output
