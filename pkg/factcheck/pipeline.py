"""Stage orchestration: training the three matchers and running
retrieve -> select -> enhance -> verify -> score over a claim file.

Every stage reads its upstream artifact from the output directory when it is
not handed the in-memory result, so the CLI subcommands and ``run_pipeline``
share one code path.
"""

import logging
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Mapping, Sequence

from pydantic import Field
from pydantic_settings import BaseSettings

from factcheck.corpus import ClaimRecord, Corpus, Label, tokenize
from factcheck.errors import StageError, StartupError
from factcheck.input import load_claim_file, load_corpus, read_jsonl
from factcheck.model import (
    Head,
    PairScorer,
    TrainingConfig,
    TrainingResult,
    init_matcher,
    load_checkpoint,
    load_static_vectors,
    relatedness_scorer,
    save_checkpoint,
)
from factcheck.output import update_manifest, write_json, write_jsonl
from factcheck.retrieval import (
    RankedDoc,
    RetrievalConfig,
    make_doc_training_pairs,
    retrieve_all,
    train_dnsmn,
)
from factcheck.scoring import Prediction, ScoreReport, difficult_subset, score_report
from factcheck.selection import (
    RankedSentence,
    SelectionConfig,
    SentenceScorer,
    make_sent_training_pairs,
    select_all,
    sentence_scorer,
    tfidf_sentence_scorer,
    train_snsmn,
)
from factcheck.settings import settings
from factcheck.verification import (
    FeatureConfig,
    OntologyGraph,
    build_verification_training,
    enhance_all,
    load_ontology,
    train_vnsmn,
    verify_all,
)
from factcheck.verification.verifier import NeiPool

logger = logging.getLogger(__name__)

Stage = Literal["doc", "sent", "verif"]
STAGES: tuple[Stage, ...] = ("doc", "sent", "verif")
CHECKPOINT_NAMES = {"doc": "dnsmn.json", "sent": "snsmn.json", "verif": "vnsmn.json"}

RETRIEVED = "retrieved.jsonl"
SELECTED = "selected.jsonl"
ENHANCED = "enhanced.jsonl"
PREDICTIONS = "predictions.jsonl"
SCORE = "score.json"


class PipelineConfig(BaseSettings):
    """One key-value document drives every stage.

    Nested keys are joined with ``__`` (``RETRIEVAL__K=5``). Keyword arguments
    (CLI flags) beat the config file, which beats the environment.
    """

    corpus: Path | None = None
    train_claims: Path | None = None
    dev_claims: Path | None = None
    claims: Path | None = None
    ontology: Path | None = None
    embeddings: Path | None = None
    checkpoint_dir: Path = Path(settings.CHECKPOINT_DIR)
    doc_model: Path | None = None
    sent_model: Path | None = None
    verif_model: Path | None = None
    output_dir: Path = Path("output")

    retrieval: RetrievalConfig = Field(default_factory=RetrievalConfig)
    selection: SelectionConfig = Field(default_factory=SelectionConfig)
    features: FeatureConfig = Field(default_factory=FeatureConfig)
    doc_training: TrainingConfig = Field(default_factory=TrainingConfig)
    sent_training: TrainingConfig = Field(default_factory=TrainingConfig)
    verif_training: TrainingConfig = Field(default_factory=TrainingConfig)

    enhance: bool = True
    nei_pool: NeiPool = "selected"
    seed: int = 0
    max_workers: int | None = None

    class Config:
        env_nested_delimiter = "__"
        extra = "ignore"

    @classmethod
    def settings_customise_sources(
        cls, settings_cls, init_settings, env_settings, dotenv_settings, file_secret_settings
    ):
        return init_settings, dotenv_settings, env_settings, file_secret_settings

    @classmethod
    def load(cls, path: str | Path | None = None, **overrides) -> "PipelineConfig":
        if path is not None and not Path(path).exists():
            raise StartupError(f"config file {path} does not exist")
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return cls(_env_file=path, **overrides)

    def require(self, *names: str):
        """Every named path is set and exists."""
        for name in names:
            value = getattr(self, name)
            if value is None:
                raise StartupError(f"config key {name.upper()} is not set")
            if not Path(value).exists():
                raise StartupError(f"{name.upper()}={value} does not exist")

    def checkpoint(self, stage: Stage) -> Path:
        """An explicit DOC_MODEL, SENT_MODEL or VERIF_MODEL path, else the file under CHECKPOINT_DIR."""
        explicit = getattr(self, f"{stage}_model")
        if explicit is not None:
            return Path(explicit)
        return Path(self.checkpoint_dir) / CHECKPOINT_NAMES[stage]

    def training(self, stage: Stage) -> TrainingConfig:
        return {"doc": self.doc_training, "sent": self.sent_training, "verif": self.verif_training}[stage]


@contextmanager
def stage_errors(stage: str):
    try:
        yield
    except (StageError, StartupError):
        raise
    except Exception as e:
        logger.error("Stage %s failed: %s", stage, e)
        raise StageError(stage, e) from e


def load_graph(config: PipelineConfig) -> OntologyGraph:
    if config.ontology is None:
        return OntologyGraph.empty()
    config.require("ontology")
    with open(config.ontology, "r", encoding="utf-8") as f:
        return load_ontology(f)


class Workspace:
    """Corpus, claims, ontology and lazily loaded checkpoints of one run."""

    def __init__(self, config: PipelineConfig, claims: Path | None = None, out_dir: Path | None = None):
        config.require("corpus")
        self.config = config
        self.out_dir = Path(out_dir or config.output_dir)
        self.corpus = load_corpus(config.corpus)
        claims = claims or config.claims
        if claims is None:
            raise StartupError("config key CLAIMS is not set")
        self.records = load_claim_file(claims, self.corpus)
        self.graph = load_graph(config)
        self._models: Dict[Stage, object] = {}

    def model(self, stage: Stage):
        if stage not in self._models:
            self._models[stage] = load_checkpoint(self.config.checkpoint(stage))
        return self._models[stage]

    def doc_scorer(self) -> PairScorer | None:
        if not self.config.retrieval.strategy.neural:
            return None
        return relatedness_scorer(self.model("doc"))

    def sent_scorer(self) -> PairScorer:
        selection = self.config.selection
        if selection.scorer == SentenceScorer.TFIDF:
            return tfidf_sentence_scorer(self.corpus)
        return sentence_scorer(selection, self.corpus, self.model("sent"))

    def check_models(self):
        """Fail at startup, before any stage runs, when a needed checkpoint is missing."""
        self.doc_scorer()
        self.sent_scorer()
        self.model("verif")

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def target(self, name: str, out: str | Path | None = None) -> Path:
        """An explicit output path, else ``name`` under the output directory."""
        return Path(out) if out is not None else self.path(name)

    def record(self, *paths: Path):
        for path in paths:
            update_manifest(Path(path).parent, path)


def _evidence_rows(evidence: Mapping[int, Sequence[RankedSentence]]) -> List[dict]:
    return [{"id": cid, "evidence": [s.to_json() for s in evidence[cid]]} for cid in sorted(evidence)]


def _read_evidence(path: Path, corpus: Corpus) -> dict[int, List[RankedSentence]]:
    return {
        row["id"]: [RankedSentence.from_json(s, corpus) for s in row["evidence"]]
        for row in read_jsonl(path)
    }


def retrieve_stage(ws: Workspace, out: str | Path | None = None) -> dict[int, List[RankedDoc]]:
    with stage_errors("retrieve"):
        retrieved = retrieve_all(
            ws.records, ws.corpus, ws.doc_scorer(), ws.config.retrieval, ws.config.max_workers
        )
        path = write_jsonl(
            ws.target(RETRIEVED, out),
            (
                {
                    "id": cid,
                    "retrieved": [d.doc_id for d in retrieved[cid]],
                    "docs": [d.to_json() for d in retrieved[cid]],
                }
                for cid in sorted(retrieved)
            ),
        )
        ws.record(path)
    return retrieved


def read_retrieved(path: Path) -> dict[int, List[RankedDoc]]:
    return {row["id"]: [RankedDoc.from_json(d) for d in row["docs"]] for row in read_jsonl(path)}


def select_stage(
    ws: Workspace,
    retrieved: Mapping[int, Sequence[RankedDoc]] | None = None,
    selection: SelectionConfig | None = None,
    name: str = SELECTED,
    source: str | Path | None = None,
    out: str | Path | None = None,
) -> dict[int, List[RankedSentence]]:
    with stage_errors("select"):
        if retrieved is None:
            retrieved = read_retrieved(Path(source) if source is not None else ws.path(RETRIEVED))
        selected = select_all(
            ws.records,
            retrieved,
            ws.corpus,
            ws.sent_scorer(),
            selection or ws.config.selection,
            ws.config.max_workers,
        )
        ws.record(write_jsonl(ws.target(name, out), _evidence_rows(selected)))
    return selected


def enhance_stage(
    ws: Workspace,
    selected: Mapping[int, Sequence[RankedSentence]] | None = None,
    selection: SelectionConfig | None = None,
    name: str = ENHANCED,
    source: str | Path | None = None,
    out: str | Path | None = None,
) -> dict[int, List[RankedSentence]]:
    with stage_errors("enhance"):
        if selected is None:
            selected = _read_evidence(Path(source) if source is not None else ws.path(SELECTED), ws.corpus)
        enhanced = enhance_all(
            ws.records,
            selected,
            ws.corpus,
            ws.doc_scorer(),
            ws.sent_scorer(),
            ws.config.retrieval,
            selection or ws.config.selection,
            ws.config.max_workers,
        )
        ws.record(write_jsonl(ws.target(name, out), _evidence_rows(enhanced)))
    return enhanced


def verify_stage(
    ws: Workspace,
    evidence: Mapping[int, Sequence[RankedSentence]] | None = None,
    name: str = PREDICTIONS,
    source: str | Path | None = None,
    out: str | Path | None = None,
) -> List[Prediction]:
    with stage_errors("verify"):
        if evidence is None:
            if source is None:
                source = ws.path(ENHANCED if ws.config.enhance else SELECTED)
            evidence = _read_evidence(source, ws.corpus)
        predictions = verify_all(
            ws.records,
            evidence,
            ws.model("verif"),
            ws.config.features,
            ws.graph,
            ws.config.max_workers,
        )
        ws.record(write_jsonl(ws.target(name, out), (p.to_json() for p in predictions)))
    return predictions


def read_predictions(path: Path) -> List[Prediction]:
    return [Prediction.from_json(row) for row in read_jsonl(path)]


def score_stage(
    ws: Workspace,
    predictions: Sequence[Prediction] | None = None,
    subset: Literal["doc", "sentence"] | None = None,
) -> ScoreReport:
    with stage_errors("score"):
        if predictions is None:
            predictions = read_predictions(ws.path(PREDICTIONS))
        gold = ws.records if subset is None else difficult_subset(ws.records, subset, ws.corpus)
        report = score_report(predictions, gold)
        name = SCORE if subset is None else f"score_{subset}.json"
        ws.record(write_json(ws.path(name), report.to_dict()))
    logger.info(
        "FEVER %.4f, OFEVER %.4f, label accuracy %.4f over %d claims",
        report.fever,
        report.ofever,
        report.label_accuracy,
        report.n_claims,
    )
    return report


def score_files(
    gold_path: str | Path,
    predictions_path: str | Path,
    subset: Literal["doc", "sentence"] | None = None,
    corpus_path: str | Path | None = None,
) -> ScoreReport:
    """Score a predictions file against a gold claims file, outside any workspace.

    The corpus validates gold pointers when given, and is required to pick a
    difficult subset.
    """
    if subset is not None and corpus_path is None:
        raise StartupError(f"scoring the {subset} subset needs a corpus")
    corpus = load_corpus(corpus_path) if corpus_path is not None else None
    gold = load_claim_file(gold_path, corpus)
    with stage_errors("score"):
        predictions = read_predictions(Path(predictions_path))
        if subset is not None:
            gold = difficult_subset(gold, subset, corpus)
        return score_report(predictions, gold)


@dataclass
class PipelineResult:
    predictions: List[Prediction]
    report: ScoreReport
    artifacts: Dict[str, str] = field(default_factory=dict)


def run_pipeline(config: PipelineConfig, out_dir: str | Path | None = None) -> PipelineResult:
    """Retrieve, select, optionally enhance, verify and score the configured claims."""
    ws = Workspace(config, out_dir=Path(out_dir) if out_dir else None)
    ws.check_models()
    retrieved = retrieve_stage(ws)
    evidence = select_stage(ws, retrieved)
    if config.enhance:
        evidence = enhance_stage(ws, evidence)
    predictions = verify_stage(ws, evidence)
    report = score_stage(ws, predictions)
    manifest = update_manifest(ws.out_dir)
    return PipelineResult(predictions, report, manifest)


def threshold_sweep(
    config: PipelineConfig,
    thresholds: Sequence[float] = (0.5, 0.3, 0.1, 0.05),
    out_dir: str | Path | None = None,
) -> List[dict]:
    """Selection through verification under each sentence threshold; retrieval runs once."""
    ws = Workspace(config, out_dir=Path(out_dir) if out_dir else None)
    ws.check_models()
    retrieved = retrieve_stage(ws)
    rows = []
    for threshold in thresholds:
        selection = config.selection.model_copy(update={"sent_threshold": threshold})
        tag = f"{threshold:g}"
        evidence = select_stage(ws, retrieved, selection, name=f"selected_{tag}.jsonl")
        if config.enhance:
            evidence = enhance_stage(ws, evidence, selection, name=f"enhanced_{tag}.jsonl")
        predictions = verify_stage(ws, evidence, name=f"predictions_{tag}.jsonl")
        report = score_report(predictions, ws.records)
        rows.append(
            {
                "threshold": threshold,
                "label_accuracy": report.label_accuracy,
                "fever": report.fever,
                "ofever": report.ofever,
            }
        )
        logger.info("threshold %s: label accuracy %.4f, FEVER %.4f", tag, report.label_accuracy, report.fever)
    ws.record(write_json(ws.path("sweep.json"), rows))
    return rows


def ingest_report(corpus_path: str | Path, claims_path: str | Path | None = None) -> dict:
    """Document counts, and per-label claim counts when a claims file is validated too."""
    corpus = load_corpus(corpus_path)
    report = {
        "documents": len(corpus),
        "disambiguative": sum(corpus.is_disambiguative(d) for d in corpus.documents),
    }
    if claims_path is not None:
        records = load_claim_file(claims_path, corpus)
        report["claims"] = {label.value: sum(r.label == label for r in records) for label in Label}
        report["doc_difficult"] = len(difficult_subset(records, "doc", corpus))
    return report


# training


def _vocabulary(corpus: Corpus, records: Sequence[ClaimRecord]) -> List[List[str]]:
    texts = [tokenize(s) for doc in corpus.documents.values() for s in doc.sentences]
    return texts + [tokenize(r.claim) for r in records]


def _static_vectors(config: PipelineConfig):
    if config.embeddings is None:
        return None
    config.require("embeddings")
    vectors, _ = load_static_vectors(config.embeddings)
    return vectors


class _Trainer:
    def __init__(self, config: PipelineConfig, resume: bool = False):
        config.require("corpus", "train_claims")
        self.config = config
        self.resume = resume
        self.corpus = load_corpus(config.corpus)
        self.train = load_claim_file(config.train_claims, self.corpus)
        self.dev = []
        if config.dev_claims is not None:
            config.require("dev_claims")
            self.dev = load_claim_file(config.dev_claims, self.corpus)

    def fresh(self, stage: Stage, head: Head, **kwargs):
        path = self.config.checkpoint(stage)
        if self.resume and path.exists():
            logger.info("Resuming %s training from %s", stage, path)
            return load_checkpoint(path)
        training = self.config.training(stage)
        return init_matcher(
            _vocabulary(self.corpus, self.train + self.dev),
            head,
            dim=training.dim,
            seed=training.seed,
            static_vectors=_static_vectors(self.config),
            **kwargs,
        )

    def upstream(self, stage: Stage):
        path = self.config.checkpoint(stage)
        if not path.exists():
            raise StartupError(f"{stage} stage needs the trained {stage} checkpoint at {path}")
        return load_checkpoint(path)

    def doc_scorer(self) -> PairScorer | None:
        if not self.config.retrieval.strategy.neural:
            return None
        return relatedness_scorer(self.upstream("doc"))

    def retrieve(self, records):
        return retrieve_all(records, self.corpus, self.doc_scorer(), self.config.retrieval, self.config.max_workers)

    def train_doc(self) -> TrainingResult:
        model = self.fresh("doc", Head.EXTRACTION)
        pairs = make_doc_training_pairs(self.train, self.corpus)
        dev_pairs = make_doc_training_pairs(self.dev, self.corpus) if self.dev else None
        return train_dnsmn(pairs, model, self.config.doc_training, self.corpus, dev_pairs)

    def train_sent(self) -> TrainingResult:
        scorer = self.config.selection.scorer
        if scorer == SentenceScorer.TFIDF:
            raise StartupError("TF-IDF sentence selection has no model to train")
        model = self.fresh("sent", Head.EXTRACTION, kind="maxpool" if scorer == SentenceScorer.MAXPOOL else "nsmn")
        positives, negatives = make_sent_training_pairs(self.train, self.retrieve(self.train), self.corpus)
        dev_retrieved = self.retrieve(self.dev) if self.dev else None
        return train_snsmn(
            positives,
            negatives,
            model,
            self.config.sent_training,
            dev_records=self.dev or None,
            dev_retrieved=dev_retrieved,
            corpus=self.corpus,
        )

    def _candidates(self, records) -> dict[int, List[RankedSentence]]:
        retrieved = self.retrieve(records)
        if self.config.nei_pool == "tfidf" or self.config.selection.scorer == SentenceScorer.TFIDF:
            scorer = tfidf_sentence_scorer(self.corpus)
        else:
            scorer = relatedness_scorer(self.upstream("sent"))
        return select_all(records, retrieved, self.corpus, scorer, self.config.selection, self.config.max_workers)

    def _examples(self, records, sent_scorer, doc_scorer):
        return build_verification_training(
            records,
            self._candidates(records),
            self.corpus,
            seed=self.config.seed,
            sent_scorer=sent_scorer,
            doc_scorer=doc_scorer,
        )

    def train_verif(self) -> TrainingResult:
        features = self.config.features
        sent_scorer = doc_scorer = None
        if features.srs_sentence and self.config.selection.scorer != SentenceScorer.TFIDF:
            sent_scorer = relatedness_scorer(self.upstream("sent"))
        if features.srs_doc:
            doc_scorer = self.doc_scorer()
        model = self.fresh(
            "verif", Head.VERIFICATION, feature_dim=features.fixed_width, number=features.number
        )
        graph = load_graph(self.config)
        examples = self._examples(self.train, sent_scorer, doc_scorer)
        dev = self._examples(self.dev, sent_scorer, doc_scorer) if self.dev else None
        return train_vnsmn(examples, model, self.config.verif_training, graph, features, dev)


def train_stage(stage: Stage, config: PipelineConfig, resume: bool = False) -> Path:
    """Train one matcher; writes its checkpoint and a per-epoch training log next to it."""
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}, expected one of {STAGES}")
    trainer = _Trainer(config, resume=resume)
    with stage_errors(f"train {stage}"):
        result = getattr(trainer, f"train_{stage}")()
        path = save_checkpoint(config.checkpoint(stage), result.model)
        log_path = path.with_name(f"{path.stem}_training.jsonl")
        write_jsonl(log_path, (asdict(h) for h in result.history))
    logger.info("%s stage: best epoch %d, checkpoint %s", stage, result.best_epoch, path)
    return path
