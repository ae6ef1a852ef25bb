"""Sentence selection over retrieved documents and the annealed training schedule."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Mapping, Sequence

import numpy as np
from pydantic import BaseModel, Field

from factcheck.corpus import ClaimRecord, Corpus, EvidencePointer, tokenize
from factcheck.corpus.ranking import tfidf_similarity
from factcheck.errors import TrainingDataError, ValidationError
from factcheck.model import (
    Example,
    Head,
    MatchInput,
    PairScorer,
    Relatedness,
    TrainingConfig,
    TrainingResult,
    relatedness_scorer,
    train_matcher,
)
from factcheck.retrieval import RankedDoc
from factcheck.settings import settings
from factcheck.util import parallel_map

logger = logging.getLogger(__name__)


class SentenceScorer(str, Enum):
    SNSMN = "snsmn"
    TFIDF = "tfidf"
    MAXPOOL = "maxpool"


class SelectionConfig(BaseModel):
    sent_threshold: float = Field(default=0.05, gt=0, lt=1)
    max_evidence: int = Field(default=settings.MAX_EVIDENCE, ge=1)
    scorer: SentenceScorer = SentenceScorer.SNSMN


@dataclass
class RankedSentence:
    doc_id: str
    index: int
    m_plus: float
    p: float
    text: str = ""
    doc_p: float = 1.0

    def __post_init__(self):
        if self.index < 1:
            raise ValidationError(f"({self.doc_id!r}, {self.index}): titles are not evidence")

    @property
    def pointer(self) -> EvidencePointer:
        return (self.doc_id, self.index)

    def to_json(self) -> list:
        return [self.doc_id, self.index, self.p, self.m_plus, self.doc_p]

    @classmethod
    def from_json(cls, row: Sequence, corpus: Corpus | None = None) -> "RankedSentence":
        doc_id, index = row[0], int(row[1])
        text = corpus.sentence(doc_id, index) if corpus is not None else ""
        doc_p = row[4] if len(row) > 4 else 1.0
        return cls(doc_id, index, m_plus=row[3], p=row[2], text=text, doc_p=doc_p)


@dataclass(frozen=True)
class AnnealState:
    epoch: int
    p_e: float

    @classmethod
    def at(cls, epoch: int) -> "AnnealState":
        return cls(epoch, annealed_probability(epoch))


def annealed_probability(epoch: int) -> float:
    """0.5 at epoch 1, minus 0.1 per epoch, reset to 0.02 once it reaches 0.

    Kept in integer tenths so epoch 5 is exactly 0.1.
    """
    if epoch < 1:
        raise ValueError(f"epoch must be >= 1, got {epoch}")
    tenths = 6 - epoch
    if tenths <= 0:
        return 0.02
    return tenths / 10


def sample_training_epoch(
    positives: Sequence,
    negatives: Sequence,
    epoch: int,
    seed: int,
    annealed: bool = True,
) -> list:
    """All positives plus each negative with probability p_e, shuffled."""
    rng = np.random.default_rng([seed, epoch])
    p_e = annealed_probability(epoch) if annealed else 1.0
    keep = rng.random(len(negatives)) < p_e
    examples = list(positives) + [n for n, k in zip(negatives, keep) if k]
    return [examples[i] for i in rng.permutation(len(examples))]


@dataclass
class SentPair:
    claim_id: int
    claim: str
    doc_id: str
    index: int
    text: str
    positive: bool


def _doc_ids(docs: Sequence[RankedDoc | str]) -> List[str]:
    return [d.doc_id if isinstance(d, RankedDoc) else d for d in docs]


def make_sent_training_pairs(
    records: Sequence[ClaimRecord],
    retrieved: Mapping[int, Sequence[RankedDoc | str]],
    corpus: Corpus,
) -> tuple[List[SentPair], List[SentPair]]:
    """Gold sentences are positives; every other body sentence of the retrieved documents is negative."""
    positives, negatives = [], []
    for record in records:
        gold = record.gold_sentences()
        for doc_id, index in sorted(gold):
            if index < 1:
                continue
            text = corpus.sentence(doc_id, index)
            positives.append(SentPair(record.id, record.claim, doc_id, index, text, True))
        for doc_id in _doc_ids(retrieved.get(record.id, ())):
            doc = corpus.get(doc_id)
            if doc is None:
                raise ValidationError(f"claim {record.id}: retrieved document {doc_id!r} not in corpus")
            for index, text in doc.body_sentences():
                if (doc_id, index) not in gold:
                    negatives.append(SentPair(record.id, record.claim, doc_id, index, text, False))
    logger.info("Built %d positive and %d negative sentence pairs", len(positives), len(negatives))
    return positives, negatives


def tfidf_sentence_scorer(corpus: Corpus) -> PairScorer:
    def score(sentence_tokens: Sequence[str], claim_tokens: Sequence[str]) -> Relatedness:
        cos = tfidf_similarity(list(claim_tokens), list(sentence_tokens), corpus.index)
        eps = settings.TFIDF_P_EPS
        # m_plus keeps the raw cosine for ranking; p stays inside (0, 1)
        return Relatedness(m_plus=cos, p=float(np.clip(cos, eps, 1.0 - eps)))

    return score


def sentence_scorer(config: SelectionConfig, corpus: Corpus, model=None) -> PairScorer:
    if config.scorer == SentenceScorer.TFIDF:
        return tfidf_sentence_scorer(corpus)
    if model is None:
        raise ValueError(f"scorer {config.scorer.value} needs a trained model")
    return relatedness_scorer(model)


def select_sentences(
    claim: str,
    retrieved: Sequence[RankedDoc | str],
    corpus: Corpus,
    scorer: PairScorer,
    config: SelectionConfig,
) -> List[RankedSentence]:
    """Score each body sentence, drop p below threshold, keep the top by m_plus.

    Ties on m_plus fall back to (doc id, sentence index).
    """
    claim_tokens = tokenize(claim)
    if not claim_tokens:
        return []
    scored = []
    for entry in retrieved:
        doc_id = entry.doc_id if isinstance(entry, RankedDoc) else entry
        doc_p = entry.srs if isinstance(entry, RankedDoc) else 1.0
        for index, text in corpus[doc_id].body_sentences():
            tokens = tokenize(text)
            if not tokens:
                continue
            rel = scorer(tokens, claim_tokens)
            if rel.p < config.sent_threshold:
                continue
            scored.append(RankedSentence(doc_id, index, rel.m_plus, rel.p, text, doc_p))
    scored.sort(key=lambda s: (-s.m_plus, s.doc_id, s.index))
    return scored[: config.max_evidence]


def select_all(
    records: Sequence[ClaimRecord],
    retrieved: Mapping[int, Sequence[RankedDoc | str]],
    corpus: Corpus,
    scorer: PairScorer,
    config: SelectionConfig,
    max_workers: int | None = None,
) -> dict[int, List[RankedSentence]]:
    results = parallel_map(
        lambda r: select_sentences(r.claim, retrieved.get(r.id, ()), corpus, scorer, config),
        records,
        max_workers,
    )
    return {r.id: sentences for r, sentences in zip(records, results)}


def sentence_recall(
    selected: Mapping[int, Sequence[RankedSentence]], records: Sequence[ClaimRecord]
) -> float:
    """Micro recall of gold sentences among the selected ones, verifiable claims only."""
    hits = total = 0
    for record in records:
        if not record.verifiable:
            continue
        gold = record.gold_sentences()
        chosen = {s.pointer for s in selected.get(record.id, ())}
        hits += len(gold & chosen)
        total += len(gold)
    return hits / total if total else 0.0


def sent_example(pair: SentPair) -> Example:
    return Example(
        a=MatchInput(tokenize(pair.text)),
        b=MatchInput(tokenize(pair.claim)),
        label=0 if pair.positive else 1,
    )


def train_snsmn(
    positives: Sequence[SentPair],
    negatives: Sequence[SentPair],
    model,
    config: TrainingConfig,
    dev_records: Sequence[ClaimRecord] | None = None,
    dev_retrieved: Mapping[int, Sequence[RankedDoc | str]] | None = None,
    corpus: Corpus | None = None,
) -> TrainingResult:
    """Extraction-head training with negatives resampled every epoch.

    With ``config.annealed`` off every negative is used in every epoch. When
    dev claims are given, the dev metric is recall of the top sentences.
    """
    if not positives:
        raise TrainingDataError("sentence stage: no positive pairs")
    if model.head is not Head.EXTRACTION:
        raise ValueError("sentence matcher must use the extraction head")
    pos_examples = [sent_example(p) for p in positives if tokenize(p.text)]
    neg_examples = [sent_example(p) for p in negatives if tokenize(p.text)]

    def epoch_examples(epoch: int):
        return sample_training_epoch(
            pos_examples, neg_examples, epoch, config.seed, annealed=config.annealed
        )

    def schedule(epoch: int) -> float:
        return annealed_probability(epoch) if config.annealed else 1.0

    dev_metric = None
    if dev_records and dev_retrieved is not None and corpus is not None:
        # threshold effectively off: dev recall measures ranking only
        dev_config = SelectionConfig(sent_threshold=1e-9)

        def dev_metric(m):
            selected = {
                r.id: select_sentences(
                    r.claim, dev_retrieved.get(r.id, ()), corpus, relatedness_scorer(m), dev_config
                )
                for r in dev_records
            }
            return sentence_recall(selected, dev_records)

    return train_matcher(
        model,
        epoch_examples,
        config,
        batch_size=settings.SENT_BATCH_SIZE,
        stage="sent",
        dev_metric=dev_metric,
        schedule=schedule,
    )
