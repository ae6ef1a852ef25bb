import logging
from dataclasses import dataclass
from typing import List, Literal, Mapping, Sequence

import numpy as np

from factcheck.corpus import LABELS, ClaimRecord, Corpus, EvidencePointer, Label, tokenize
from factcheck.errors import DataError, DimensionError, InputError, TrainingDataError
from factcheck.model import (
    Example,
    Head,
    MatchInput,
    PairScorer,
    TrainingConfig,
    TrainingResult,
    train_matcher,
)
from factcheck.model.embedding import SENTINEL
from factcheck.retrieval import RetrievalConfig, doc_repr
from factcheck.scoring import Prediction
from factcheck.selection import RankedSentence, SelectionConfig
from factcheck.settings import settings
from factcheck.util import claim_seed, parallel_map
from factcheck.verification.features import (
    FeatureConfig,
    Side,
    concat_evidence,
    feature_block,
)
from factcheck.verification.ontology import OntologyGraph

logger = logging.getLogger(__name__)

NeiPool = Literal["selected", "tfidf"]


def verification_inputs(
    claim: str,
    evidence: Sequence[RankedSentence],
    graph: OntologyGraph,
    features: FeatureConfig,
) -> tuple[MatchInput, MatchInput]:
    """(premise, hypothesis) model inputs; an empty side becomes a single sentinel token."""
    premise = concat_evidence(evidence)
    claim_tokens = tokenize(claim)
    if not premise.tokens and not claim_tokens:
        raise InputError("claim and evidence are both empty")
    p_tokens, srs = premise.tokens, premise.srs
    if not p_tokens:
        p_tokens, srs = [SENTINEL], np.zeros((2, 1))
    c_tokens = claim_tokens or [SENTINEL]
    a = MatchInput(p_tokens, feature_block(p_tokens, c_tokens, Side.EVIDENCE, srs, graph, features))
    b = MatchInput(c_tokens, feature_block(c_tokens, p_tokens, Side.CLAIM, None, graph, features))
    return a, b


def _check_model(model, features: FeatureConfig):
    if model.head is not Head.VERIFICATION:
        raise ValueError("verifier must use the verification head")
    if model.dims.feature_dim != features.fixed_width:
        raise DimensionError(
            "verify features", (model.dims.feature_dim,), (features.fixed_width,)
        )
    if (model.dims.number_dim > 0) != features.number:
        raise DimensionError("verify number channel", (model.dims.number_dim,), (int(features.number),))


def verify(
    claim: str,
    evidence: Sequence[RankedSentence],
    model,
    features: FeatureConfig,
    graph: OntologyGraph,
    claim_id: int = 0,
) -> Prediction:
    _check_model(model, features)
    a, b = verification_inputs(claim, evidence, graph, features)
    result = model.score(a, b)
    return Prediction(
        claim_id=claim_id,
        label=LABELS[result.label_index],
        evidence=[s.pointer for s in evidence][: settings.MAX_EVIDENCE],
        scores=[float(s) for s in result.scores],
    )


def verify_all(
    records: Sequence[ClaimRecord],
    evidence: Mapping[int, Sequence[RankedSentence]],
    model,
    features: FeatureConfig,
    graph: OntologyGraph,
    max_workers: int | None = None,
) -> List[Prediction]:
    return parallel_map(
        lambda r: verify(r.claim, evidence.get(r.id, ()), model, features, graph, claim_id=r.id),
        records,
        max_workers,
    )


def sample_nei_evidence(pool: Sequence, rng: np.random.Generator | int) -> list:
    """3 to 5 pool entries drawn uniformly without replacement, in pool order."""
    if not pool:
        return []
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    count = min(int(rng.integers(3, 6)), len(pool))
    picks = rng.choice(len(pool), size=count, replace=False)
    return [pool[i] for i in sorted(picks)]


@dataclass
class VerifExample:
    claim_id: int
    claim: str
    label: Label
    evidence: List[RankedSentence]


def _gold_evidence(
    record: ClaimRecord,
    corpus: Corpus,
    sent_scorer: PairScorer | None,
    doc_scorer: PairScorer | None,
) -> List[RankedSentence]:
    claim_tokens = tokenize(record.claim)
    evidence = []
    for doc_id, index in record.evidence_groups[0][: settings.MAX_EVIDENCE]:
        if index < 1:
            continue
        text = corpus.sentence(doc_id, index)
        m_plus, p = 1.0, 1.0
        if sent_scorer is not None and tokenize(text) and claim_tokens:
            m_plus, p = sent_scorer(tokenize(text), claim_tokens)
        doc_p = 1.0
        if doc_scorer is not None and corpus.is_disambiguative(doc_id) and claim_tokens:
            doc_p = doc_scorer(doc_repr(corpus[doc_id]), claim_tokens).p
        evidence.append(RankedSentence(doc_id, index, m_plus, p, text, doc_p))
    return evidence


def build_verification_training(
    records: Sequence[ClaimRecord],
    candidates: Mapping[int, Sequence[RankedSentence]],
    corpus: Corpus,
    seed: int = 0,
    sent_scorer: PairScorer | None = None,
    doc_scorer: PairScorer | None = None,
) -> List[VerifExample]:
    """Verifiable claims use their first gold group; NEI claims sample 3-5 of their candidates.

    ``candidates`` is the upstream selection output (or the TF-IDF selection
    for the data-quality ablation). NEI claims with no candidates are skipped.
    """
    examples = []
    skipped = 0
    for record in records:
        if record.verifiable:
            evidence = _gold_evidence(record, corpus, sent_scorer, doc_scorer)
        else:
            rng = np.random.default_rng(claim_seed(seed, record.id))
            evidence = sample_nei_evidence(list(candidates.get(record.id, ())), rng)
            if not evidence:
                skipped += 1
                continue
        examples.append(VerifExample(record.id, record.claim, record.label, evidence))
    if skipped:
        logger.info("Skipped %d NEI claim(s) with an empty candidate pool", skipped)
    return examples


def _to_examples(examples: Sequence[VerifExample], graph, features) -> List[Example]:
    out = []
    for ex in examples:
        a, b = verification_inputs(ex.claim, ex.evidence, graph, features)
        out.append(Example(a, b, ex.label.index))
    return out


def label_accuracy_of(model, examples: Sequence[Example]) -> float:
    if not examples:
        return 0.0
    return sum(model.score(e.a, e.b).label_index == e.label for e in examples) / len(examples)


def train_vnsmn(
    examples: Sequence[VerifExample],
    model,
    config: TrainingConfig,
    graph: OntologyGraph,
    features: FeatureConfig,
    dev_examples: Sequence[VerifExample] | None = None,
) -> TrainingResult:
    if not examples:
        raise TrainingDataError("verification stage: no training examples")
    missing = set(LABELS) - {ex.label for ex in examples}
    if missing:
        raise DataError(f"verification data lacks label(s) {sorted(l.value for l in missing)}")
    _check_model(model, features)
    train = _to_examples(examples, graph, features)
    dev_metric = None
    if dev_examples:
        dev = _to_examples(dev_examples, graph, features)

        def dev_metric(m):
            return label_accuracy_of(m, dev)

    return train_matcher(
        model,
        train,
        config,
        batch_size=settings.VERIF_BATCH_SIZE,
        stage="verif",
        dev_metric=dev_metric,
    )


def enhance_evidence(
    claim: str,
    evidence: Sequence[RankedSentence],
    corpus: Corpus,
    doc_scorer: PairScorer | None,
    sent_scorer: PairScorer,
    retrieval: RetrievalConfig | None = None,
    selection: SelectionConfig | None = None,
    protected: set[EvidencePointer] | None = None,
) -> List[RankedSentence]:
    """Two-hop step: add the best sentence from documents linked by the evidence.

    Linked disambiguative documents pass through the document threshold; the
    highest-p surviving new sentence is appended. Over the cap, the original
    sentence with the lowest m_plus is evicted, sparing ``protected`` pointers
    while any unprotected original remains.
    """
    evidence = list(evidence)
    if not evidence:
        return evidence
    retrieval = retrieval or RetrievalConfig()
    selection = selection or SelectionConfig()
    claim_tokens = tokenize(claim)
    if not claim_tokens:
        return evidence

    present = {s.pointer for s in evidence}
    linked = sorted(
        {
            target
            for s in evidence
            for target in corpus[s.doc_id].sentence_links(s.index)
            if target in corpus
        }
    )
    best = None
    for doc_id in linked:
        doc_p = 1.0
        if corpus.is_disambiguative(doc_id) and doc_scorer is not None:
            doc_p = doc_scorer(doc_repr(corpus[doc_id]), claim_tokens).p
            if doc_p < retrieval.doc_threshold:
                continue
        for index, text in corpus[doc_id].body_sentences():
            tokens = tokenize(text)
            if (doc_id, index) in present or not tokens:
                continue
            rel = sent_scorer(tokens, claim_tokens)
            if rel.p < selection.sent_threshold:
                continue
            candidate = RankedSentence(doc_id, index, rel.m_plus, rel.p, text, doc_p)
            if best is None or (rel.p, rel.m_plus) > (best.p, best.m_plus):
                best = candidate
    if best is None:
        return evidence

    enhanced = evidence + [best]
    if len(enhanced) > selection.max_evidence:
        originals = [s for s in evidence if s.pointer not in (protected or ())] or evidence
        victim = min(reversed(originals), key=lambda s: s.m_plus)
        enhanced.remove(victim)
    logger.debug("Enhanced evidence with %s", best.pointer)
    return enhanced


def enhance_all(
    records: Sequence[ClaimRecord],
    evidence: Mapping[int, Sequence[RankedSentence]],
    corpus: Corpus,
    doc_scorer: PairScorer | None,
    sent_scorer: PairScorer,
    retrieval: RetrievalConfig | None = None,
    selection: SelectionConfig | None = None,
    max_workers: int | None = None,
) -> dict[int, List[RankedSentence]]:
    results = parallel_map(
        lambda r: enhance_evidence(
            r.claim, evidence.get(r.id, ()), corpus, doc_scorer, sent_scorer, retrieval, selection
        ),
        records,
        max_workers,
    )
    return {r.id: ev for r, ev in zip(records, results)}
