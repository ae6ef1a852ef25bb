"""Document retrieval: keyword matching, guaranteed documents and reranking of
disambiguative candidates."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel, Field

from factcheck.corpus import ClaimRecord, Corpus, Document, keyword_match, tokenize
from factcheck.corpus.index import representation_tokens
from factcheck.corpus.ranking import pageview_rank, tfidf_rank
from factcheck.errors import StartupError, TrainingDataError
from factcheck.model import (
    Example,
    Head,
    MatchInput,
    PairScorer,
    TrainingConfig,
    TrainingResult,
    train_matcher,
)
from factcheck.scoring import difficult_subset, doc_ofever
from factcheck.settings import settings
from factcheck.util import claim_seed, parallel_map

logger = logging.getLogger(__name__)


class Strategy(str, Enum):
    KM = "km"
    KM_TFIDF = "km+tfidf"
    KM_PAGEVIEW = "km+pageview"
    KM_DNSMN = "km+dnsmn"
    KM_PAGEVIEW_DNSMN = "km+pageview+dnsmn"

    @property
    def neural(self) -> bool:
        return self in (Strategy.KM_DNSMN, Strategy.KM_PAGEVIEW_DNSMN)


class RetrievalConfig(BaseModel):
    k: int = Field(default=5, ge=1)
    doc_threshold: float = Field(default=0.5, gt=0, lt=1)
    strategy: Strategy = Strategy.KM_DNSMN
    disambiguative_cap: int = Field(default=5, ge=1)
    seed: int = 0


class Priority(str, Enum):
    GUARANTEED = "guaranteed"
    SCORED = "scored"


@dataclass
class RankedDoc:
    doc_id: str
    priority: Priority
    m_plus: float | None = None
    p: float | None = None

    @property
    def srs(self) -> float:
        """Document-stage relatedness; guaranteed and unscored documents count as 1."""
        return 1.0 if self.p is None else self.p

    def to_json(self) -> list:
        return [self.doc_id, self.priority.value, self.m_plus, self.p]

    @classmethod
    def from_json(cls, row: Sequence) -> "RankedDoc":
        return cls(row[0], Priority(row[1]), row[2], row[3])


def doc_repr(doc: Document) -> List[str]:
    return representation_tokens(doc)


def _split_candidates(candidates, corpus: Corpus) -> tuple[List[str], List[str]]:
    guaranteed, disambiguative = [], []
    for doc_id in sorted(candidates):
        (disambiguative if corpus.is_disambiguative(doc_id) else guaranteed).append(doc_id)
    return guaranteed, disambiguative


def _neural_rerank(
    claim_tokens: List[str],
    pool: Sequence[str],
    corpus: Corpus,
    scorer: PairScorer,
    config: RetrievalConfig,
) -> List[RankedDoc]:
    scored = []
    for doc_id in pool:
        rel = scorer(doc_repr(corpus[doc_id]), claim_tokens)
        if rel.p < config.doc_threshold:
            continue
        scored.append(RankedDoc(doc_id, Priority.SCORED, rel.m_plus, rel.p))
    scored.sort(key=lambda r: (-r.m_plus, r.doc_id))
    return scored[: config.k]


def retrieve_documents(
    claim: str,
    corpus: Corpus,
    scorer: PairScorer | None,
    config: RetrievalConfig,
    claim_id: int = 0,
) -> List[RankedDoc]:
    """Guaranteed (non-disambiguative) keyword matches first, then at most k
    disambiguative documents chosen by the configured strategy."""
    guaranteed, disambiguative = _split_candidates(keyword_match(claim, corpus.index), corpus)
    ranked = [RankedDoc(d, Priority.GUARANTEED) for d in guaranteed]
    if not disambiguative:
        return ranked

    strategy = config.strategy
    if strategy.neural and scorer is None:
        raise StartupError(f"strategy {strategy.value} needs a document scorer")

    if strategy == Strategy.KM:
        chosen = disambiguative
        if len(chosen) > config.disambiguative_cap:
            rng = np.random.default_rng(claim_seed(config.seed, claim_id))
            picks = rng.choice(len(chosen), size=config.disambiguative_cap, replace=False)
            chosen = [chosen[i] for i in sorted(picks)]
        ranked += [RankedDoc(d, Priority.SCORED) for d in chosen[: config.k]]
    elif strategy == Strategy.KM_TFIDF:
        ranked += [
            RankedDoc(d, Priority.SCORED, m_plus=score)
            for d, score in tfidf_rank(claim, disambiguative, corpus)[: config.k]
        ]
    elif strategy == Strategy.KM_PAGEVIEW:
        ranked += [
            RankedDoc(d, Priority.SCORED)
            for d in pageview_rank(disambiguative, corpus.index)[: config.k]
        ]
    else:
        pool = disambiguative
        if strategy == Strategy.KM_PAGEVIEW_DNSMN:
            pool = pageview_rank(disambiguative, corpus.index)[: 2 * config.k]
        ranked += _neural_rerank(tokenize(claim), pool, corpus, scorer, config)
    return ranked


def retrieve_all(
    records: Sequence[ClaimRecord],
    corpus: Corpus,
    scorer: PairScorer | None,
    config: RetrievalConfig,
    max_workers: int | None = None,
) -> dict[int, List[RankedDoc]]:
    results = parallel_map(
        lambda r: retrieve_documents(r.claim, corpus, scorer, config, claim_id=r.id),
        records,
        max_workers,
    )
    return {r.id: docs for r, docs in zip(records, results)}


@dataclass
class DocPair:
    claim_id: int
    claim: str
    doc_id: str
    positive: bool


def make_doc_training_pairs(records: Sequence[ClaimRecord], corpus: Corpus) -> List[DocPair]:
    """Disambiguative keyword candidates: gold-evidence documents are positive, the rest negative."""
    pairs = []
    for record in records:
        gold_docs = record.gold_documents()
        _, disambiguative = _split_candidates(keyword_match(record.claim, corpus.index), corpus)
        for doc_id in disambiguative:
            pairs.append(DocPair(record.id, record.claim, doc_id, doc_id in gold_docs))
    n_pos = sum(p.positive for p in pairs)
    logger.info("Built %d document pairs (%d positive)", len(pairs), n_pos)
    return pairs


def doc_example(pair: DocPair, corpus: Corpus) -> Example:
    return Example(
        a=MatchInput(doc_repr(corpus[pair.doc_id])),
        b=MatchInput(tokenize(pair.claim)),
        label=0 if pair.positive else 1,
    )


def pair_accuracy(model, examples: Sequence[Example]) -> float:
    if not examples:
        return 0.0
    correct = sum(model.score(ex.a, ex.b).label_index == ex.label for ex in examples)
    return correct / len(examples)


def train_dnsmn(
    pairs: Sequence[DocPair],
    model,
    config: TrainingConfig,
    corpus: Corpus,
    dev_pairs: Sequence[DocPair] | None = None,
) -> TrainingResult:
    if not pairs:
        raise TrainingDataError("document stage: no training pairs")
    if model.head is not Head.EXTRACTION:
        raise ValueError("dNSMN must use the extraction head")
    examples = [doc_example(p, corpus) for p in pairs]
    dev_metric = None
    if dev_pairs:
        dev_examples = [doc_example(p, corpus) for p in dev_pairs]

        def dev_metric(m):
            return pair_accuracy(m, dev_examples)

    return train_matcher(
        model,
        examples,
        config,
        batch_size=settings.DOC_BATCH_SIZE,
        stage="doc",
        dev_metric=dev_metric,
    )


def evaluate_retrieval(
    records: Sequence[ClaimRecord],
    corpus: Corpus,
    scorer: PairScorer | None,
    config: RetrievalConfig,
    ks: Sequence[int] = (5, 10),
    max_workers: int | None = None,
) -> dict[str, dict[int, float]]:
    """Document-level OFEVER at each k on all claims and on the doc-difficult subset."""
    difficult = difficult_subset(records, "doc", corpus)
    report = {"full": {}, "doc_difficult": {}}
    for k in ks:
        retrieved = retrieve_all(
            records, corpus, scorer, config.model_copy(update={"k": k}), max_workers
        )
        ids = {cid: [r.doc_id for r in docs] for cid, docs in retrieved.items()}
        report["full"][k] = doc_ofever(ids, records)
        report["doc_difficult"][k] = doc_ofever(ids, difficult)
        logger.info(
            "%s k=%d: doc OFEVER %.4f (difficult %.4f, n=%d)",
            config.strategy.value,
            k,
            report["full"][k],
            report["doc_difficult"][k],
            len(difficult),
        )
    return report