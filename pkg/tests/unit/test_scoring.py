import logging
from itertools import product

import numpy as np
import pytest

from factcheck.corpus import LABELS, ClaimRecord, Label
from factcheck.errors import EvidenceLengthError
from factcheck.scoring import (
    Prediction,
    difficult_subset,
    doc_ofever,
    evidence_covered,
    evidence_prf,
    fever_score,
    label_accuracy,
    ofever,
    per_label_f1,
    score_report,
    word_overlap,
)

POOL = [(doc, i) for doc, i in product("ABC", range(1, 5))]


def _random_fixture(rng):
    gold, predictions = [], []
    for claim_id in range(int(rng.integers(1, 9))):
        label = LABELS[int(rng.integers(3))]
        groups = []
        if label != Label.NEI:
            for _ in range(int(rng.integers(1, 4))):
                picks = rng.choice(len(POOL), size=int(rng.integers(1, 3)), replace=False)
                groups.append([POOL[i] for i in picks])
        gold.append(ClaimRecord(claim_id, f"claim {claim_id}", label, groups))
        if rng.random() < 0.1:
            continue
        picks = rng.choice(len(POOL), size=int(rng.integers(0, 6)), replace=False)
        predictions.append(Prediction(claim_id, LABELS[int(rng.integers(3))], [POOL[i] for i in sorted(picks)]))
    return gold, predictions


def _oracle_fever(gold, predictions):
    by_id = {p.claim_id: p for p in predictions}
    correct = 0
    for record in gold:
        pred = by_id.get(record.id)
        if pred is None or pred.label != record.label:
            continue
        if record.label == Label.NEI:
            correct += 1
            continue
        for group in record.evidence_groups:
            if all(pointer in pred.evidence for pointer in group):
                correct += 1
                break
    return correct / len(gold)


def _oracle_ofever(gold, predictions):
    by_id = {p.claim_id: p.evidence for p in predictions}
    covered = 0
    for record in gold:
        chosen = by_id.get(record.id, [])
        if not record.evidence_groups or any(all(p in chosen for p in g) for g in record.evidence_groups):
            covered += 1
    return covered / len(gold)


def _oracle_prf(gold, predictions):
    by_id = {p.claim_id: p.evidence for p in predictions}
    hits = predicted = expected = 0
    for record in gold:
        if record.label == Label.NEI:
            continue
        wanted = []
        for group in record.evidence_groups:
            for pointer in group:
                if pointer not in wanted:
                    wanted.append(pointer)
        chosen = by_id.get(record.id, [])
        predicted += len(chosen)
        expected += len(wanted)
        hits += sum(1 for pointer in chosen if pointer in wanted)
    precision = hits / predicted if predicted else 0.0
    recall = hits / expected if expected else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _oracle_label_f1(gold, predictions):
    by_id = {p.claim_id: p.label for p in predictions}
    # rows: gold label, columns: predicted label, last column: no prediction
    confusion = np.zeros((3, 4))
    for record in gold:
        predicted = by_id.get(record.id)
        column = 3 if predicted is None else LABELS.index(predicted)
        confusion[LABELS.index(record.label), column] += 1
    scores = []
    for k in range(3):
        tp = confusion[k, k]
        fp = confusion[:, k].sum() - tp
        fn = confusion[k].sum() - tp
        scores.append(2 * tp / (2 * tp + fp + fn) if tp else 0.0)
    return tuple(scores)


@pytest.mark.parametrize("block", range(10))
def test_metrics_match_brute_force(block):
    for seed in range(block * 100, (block + 1) * 100):
        gold, predictions = _random_fixture(np.random.default_rng(seed))
        evidence = {p.claim_id: p.evidence for p in predictions}
        assert fever_score(predictions, gold) == pytest.approx(_oracle_fever(gold, predictions))
        assert ofever(evidence, gold) == pytest.approx(_oracle_ofever(gold, predictions))
        assert evidence_prf(predictions, gold) == pytest.approx(_oracle_prf(gold, predictions))
        matches = sum(1 for p in predictions if p.label == gold[p.claim_id].label)
        assert label_accuracy(predictions, gold) == pytest.approx(matches / len(gold))
        assert per_label_f1(predictions, gold) == pytest.approx(_oracle_label_f1(gold, predictions))
        fever = fever_score(predictions, gold)
        assert fever <= min(label_accuracy(predictions, gold), ofever(evidence, gold)) + 1e-12


def test_fever_needs_label_and_evidence():
    gold = [
        ClaimRecord(1, "a", Label.SUPPORTS, [[("A", 1), ("A", 2)], [("B", 1)]]),
        ClaimRecord(2, "b", Label.NEI),
    ]
    assert fever_score([Prediction(1, Label.SUPPORTS, [("B", 1)]), Prediction(2, Label.NEI)], gold) == 1.0
    assert fever_score([Prediction(1, Label.SUPPORTS, [("A", 1)]), Prediction(2, Label.NEI)], gold) == 0.5
    assert fever_score([Prediction(1, Label.REFUTES, [("B", 1)]), Prediction(2, Label.NEI, [("C", 3)])], gold) == 0.5
    assert fever_score([], []) == 0.0


def test_missing_prediction_is_counted_wrong_and_logged(caplog):
    gold = [ClaimRecord(1, "a", Label.NEI), ClaimRecord(2, "b", Label.NEI)]
    with caplog.at_level(logging.WARNING, logger="factcheck.scoring"):
        assert fever_score([Prediction(1, Label.NEI)], gold) == 0.5
    assert "no prediction" in caplog.text


def test_evidence_length_is_capped():
    with pytest.raises(EvidenceLengthError):
        Prediction(1, Label.SUPPORTS, POOL[:6])
    with pytest.raises(EvidenceLengthError):
        evidence_covered(POOL[:6], [[POOL[0]]])
    assert evidence_covered([], [])


def test_prediction_json():
    row = Prediction(3, Label.NEI, [("A", 2)], scores=[0.1, 0.2, 0.7]).to_json()
    assert row == {"id": 3, "predicted_label": "NEI", "predicted_evidence": [["A", 2]], "scores": [0.1, 0.2, 0.7]}
    assert Prediction.from_json(row) == Prediction(3, Label.NEI, [("A", 2)], [0.1, 0.2, 0.7])
    assert "scores" not in Prediction(3, Label.NEI).to_json()
    assert Prediction.from_json({"id": 1, "predicted_label": "NOT ENOUGH INFO"}).label is Label.NEI


def test_doc_ofever():
    gold = [
        ClaimRecord(1, "a", Label.SUPPORTS, [[("A", 1), ("B", 1)]]),
        ClaimRecord(2, "b", Label.REFUTES, [[("C", 2)]]),
        ClaimRecord(3, "c", Label.NEI),
    ]
    assert doc_ofever({1: ["A", "B"], 2: ["A"]}, gold) == pytest.approx(2 / 3)
    assert doc_ofever({}, []) == 0.0


def test_per_label_f1_absent_class_scores_zero():
    gold = [ClaimRecord(1, "a", Label.SUPPORTS, [[("A", 1)]])]
    assert per_label_f1([Prediction(1, Label.SUPPORTS)], gold) == (1.0, 0.0, 0.0)


def test_difficult_subsets(savages_corpus):
    records = [
        ClaimRecord(1, "Savages are a rock band from London", Label.SUPPORTS, [[("Savages_(band)", 1)]]),
        ClaimRecord(2, "Dogs were domesticated from wolves", Label.SUPPORTS, [[("Dog", 2)]]),
        ClaimRecord(3, "A filmmaker made that", Label.REFUTES, [[("Savages", 2)]]),
        ClaimRecord(4, "Savages is a band", Label.NEI),
    ]
    assert [r.id for r in difficult_subset(records, "doc", savages_corpus)] == [1]
    assert [r.id for r in difficult_subset(records, "sentence", savages_corpus)] == [3]
    with pytest.raises(ValueError):
        difficult_subset(records, "claim", savages_corpus)
    assert word_overlap("Savages are a rock band", "Savages, a band.") == 3


def test_score_report():
    gold = [
        ClaimRecord(1, "a", Label.SUPPORTS, [[("A", 1)]]),
        ClaimRecord(2, "b", Label.REFUTES, [[("B", 2)]]),
    ]
    predictions = [Prediction(1, Label.SUPPORTS, [("A", 1)]), Prediction(2, Label.SUPPORTS, [("B", 2)])]
    report = score_report(predictions, gold)
    assert report.fever == 0.5 and report.ofever == 1.0 and report.label_accuracy == 0.5
    assert (report.evidence_precision, report.evidence_recall) == (1.0, 1.0)
    assert report.per_label_f1["NEI"] == 0.0
    assert report.to_dict()["n_claims"] == 2
    assert score_report(predictions, gold, evidence={1: [], 2: []}).ofever == 0.0
