"""FEVER / OFEVER, label accuracy, evidence P/R/F1 and difficult subsets."""

import logging
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Literal, Mapping, Sequence

from factcheck.corpus import LABELS, ClaimRecord, Corpus, EvidencePointer, Label
from factcheck.corpus.text import content_terms
from factcheck.errors import EvidenceLengthError
from factcheck.settings import settings

logger = logging.getLogger(__name__)


@dataclass
class Prediction:
    claim_id: int
    label: Label
    evidence: List[EvidencePointer] = field(default_factory=list)
    scores: List[float] | None = None

    def __post_init__(self):
        self.evidence = [(d, int(i)) for d, i in self.evidence]
        if len(self.evidence) > settings.MAX_EVIDENCE:
            raise EvidenceLengthError(
                f"claim {self.claim_id}: {len(self.evidence)} evidence sentences "
                f"(max {settings.MAX_EVIDENCE})"
            )

    def to_json(self) -> dict:
        row = {
            "id": self.claim_id,
            "predicted_label": self.label.value,
            "predicted_evidence": [[d, i] for d, i in self.evidence],
        }
        if self.scores is not None:
            row["scores"] = [float(s) for s in self.scores]
        return row

    @classmethod
    def from_json(cls, row: dict) -> "Prediction":
        return cls(
            claim_id=int(row["id"]),
            label=Label.parse(row["predicted_label"]),
            evidence=[tuple(p) for p in row.get("predicted_evidence", [])],
            scores=row.get("scores"),
        )


@dataclass
class ScoreReport:
    fever: float
    ofever: float
    label_accuracy: float
    evidence_precision: float
    evidence_recall: float
    evidence_f1: float
    per_label_f1: dict[str, float]
    n_claims: int

    def to_dict(self) -> dict:
        return asdict(self)


def _by_id(predictions: Iterable[Prediction] | Mapping[int, Prediction]) -> dict[int, Prediction]:
    if isinstance(predictions, Mapping):
        return dict(predictions)
    return {p.claim_id: p for p in predictions}


def evidence_covered(predicted: Sequence[EvidencePointer], gold_groups) -> bool:
    """True iff some gold group is a subset of ``predicted``; vacuously true without groups."""
    if len(predicted) > settings.MAX_EVIDENCE:
        raise EvidenceLengthError(
            f"{len(predicted)} evidence sentences (max {settings.MAX_EVIDENCE})"
        )
    if not gold_groups:
        return True
    chosen = {(d, int(i)) for d, i in predicted}
    return any({(d, int(i)) for d, i in group} <= chosen for group in gold_groups)


def fever_score(predictions, gold: Sequence[ClaimRecord]) -> float:
    if not gold:
        return 0.0
    by_id = _by_id(predictions)
    correct = 0
    missing = 0
    for record in gold:
        pred = by_id.get(record.id)
        if pred is None:
            missing += 1
            continue
        if pred.label != record.label:
            continue
        if record.label == Label.NEI or evidence_covered(pred.evidence, record.evidence_groups):
            correct += 1
    if missing:
        logger.warning("%d gold claim(s) have no prediction; counted incorrect", missing)
    return correct / len(gold)


def ofever(evidence: Mapping[int, Sequence[EvidencePointer]], gold: Sequence[ClaimRecord]) -> float:
    """Coverage rate of the given evidence sets, labels assumed correct."""
    if not gold:
        return 0.0
    covered = sum(
        evidence_covered(evidence.get(record.id, ()), record.evidence_groups)
        for record in gold
    )
    return covered / len(gold)


def doc_ofever(retrieved: Mapping[int, Sequence[str]], gold: Sequence[ClaimRecord]) -> float:
    """Fraction of claims for which every document of some gold group was retrieved."""
    if not gold:
        return 0.0
    covered = 0
    for record in gold:
        docs = set(retrieved.get(record.id, ()))
        if not record.evidence_groups or any(
            {d for d, _ in group} <= docs for group in record.evidence_groups
        ):
            covered += 1
    return covered / len(gold)


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def evidence_prf(predictions, gold: Sequence[ClaimRecord]) -> tuple[float, float, float]:
    """Micro-averaged sentence-level precision, recall and F1 over verifiable claims."""
    by_id = _by_id(predictions)
    hits = n_predicted = n_gold = 0
    for record in gold:
        if not record.verifiable:
            continue
        gold_sentences = record.gold_sentences()
        pred = by_id.get(record.id)
        chosen = set(pred.evidence) if pred is not None else set()
        hits += len(chosen & gold_sentences)
        n_predicted += len(chosen)
        n_gold += len(gold_sentences)
    precision = hits / n_predicted if n_predicted else 0.0
    recall = hits / n_gold if n_gold else 0.0
    return precision, recall, _f1(precision, recall)


def label_accuracy(predictions, gold: Sequence[ClaimRecord]) -> float:
    if not gold:
        return 0.0
    by_id = _by_id(predictions)
    correct = sum(
        1 for r in gold if r.id in by_id and by_id[r.id].label == r.label
    )
    return correct / len(gold)


def per_label_f1(predictions, gold: Sequence[ClaimRecord]) -> tuple[float, float, float]:
    """One-vs-rest F1 in SUPPORTS, REFUTES, NEI order; a class never gold nor predicted scores 0."""
    by_id = _by_id(predictions)
    scores = []
    for label in LABELS:
        tp = fp = fn = 0
        for record in gold:
            pred = by_id.get(record.id)
            predicted = pred.label if pred is not None else None
            if predicted == label and record.label == label:
                tp += 1
            elif predicted == label:
                fp += 1
            elif record.label == label:
                fn += 1
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        scores.append(_f1(precision, recall))
    return tuple(scores)


def word_overlap(a: str, b: str) -> int:
    return len(set(content_terms(a)) & set(content_terms(b)))


def difficult_subset(
    records: Sequence[ClaimRecord],
    kind: Literal["doc", "sentence"],
    corpus: Corpus,
) -> List[ClaimRecord]:
    """Verifiable claims whose evidence needs a disambiguative page (``doc``) or
    shares fewer than two words with every gold sentence (``sentence``)."""
    subset = []
    for record in records:
        if not record.verifiable:
            continue
        if kind == "doc":
            hit = any(corpus.is_disambiguative(d) for d in record.gold_documents())
        elif kind == "sentence":
            hit = all(
                word_overlap(record.claim, corpus.sentence(d, i)) < 2
                for d, i in record.gold_sentences()
            )
        else:
            raise ValueError(f"unknown subset kind {kind!r}")
        if hit:
            subset.append(record)
    return subset


def score_report(
    predictions,
    gold: Sequence[ClaimRecord],
    evidence: Mapping[int, Sequence[EvidencePointer]] | None = None,
) -> ScoreReport:
    """Full report; OFEVER uses ``evidence`` when given, else the predicted evidence."""
    by_id = _by_id(predictions)
    if evidence is None:
        evidence = {cid: p.evidence for cid, p in by_id.items()}
    precision, recall, f1 = evidence_prf(by_id, gold)
    return ScoreReport(
        fever=fever_score(by_id, gold),
        ofever=ofever(evidence, gold),
        label_accuracy=label_accuracy(by_id, gold),
        evidence_precision=precision,
        evidence_recall=recall,
        evidence_f1=f1,
        per_label_f1=dict(zip((l.value for l in LABELS), per_label_f1(by_id, gold))),
        n_claims=len(gold),
    )
