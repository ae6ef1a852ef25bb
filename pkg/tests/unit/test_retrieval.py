import pytest

from factcheck.corpus import ClaimRecord, Corpus, Label, keyword_match, tokenize
from factcheck.errors import StartupError, TrainingDataError
from factcheck.model import Head, Relatedness, TrainingConfig
from factcheck.retrieval import (
    DocPair,
    Priority,
    RankedDoc,
    RetrievalConfig,
    Strategy,
    doc_example,
    doc_repr,
    evaluate_retrieval,
    make_doc_training_pairs,
    pair_accuracy,
    retrieve_all,
    retrieve_documents,
    train_dnsmn,
)

# (p, m_plus) keyed by the word inside the title parenthetical
HOMELAND_SCORES = {"novel": (0.9, 0.2), "TV": (0.6, 0.8), "album": (0.3, 2.0)}


@pytest.fixture(scope="module")
def homeland_corpus(document_factory):
    return Corpus.from_documents(
        [
            document_factory("Homeland", ["Homeland is an American spy thriller."], pageview=50),
            document_factory("Homeland_(novel)", ["Homeland is the first novel of the trilogy."], pageview=10),
            document_factory("Homeland_(TV_series)", ["Homeland is a television series."], pageview=40),
            document_factory("Homeland_(album)", ["Homeland is a studio album."], pageview=20),
        ]
    )


def _stub_scorer(scores, calls=None):
    def score(doc_tokens, claim_tokens):
        key = doc_tokens[doc_tokens.index("(") + 1]
        if calls is not None:
            calls.append(key)
        p, m_plus = scores[key]
        return Relatedness(m_plus, p)

    return score


def _ids(ranked):
    return [r.doc_id for r in ranked]


def test_doc_repr_concatenates_title_and_first_sentence(homeland_corpus, document_factory):
    doc = homeland_corpus["Homeland_(novel)"]
    assert doc_repr(doc) == tokenize("Homeland (novel)") + tokenize("Homeland is the first novel of the trilogy.")
    assert doc_repr(document_factory("Solo", [])) == ["Solo"]


def test_stubbed_five_step_trace(homeland_corpus):
    config = RetrievalConfig(k=5, doc_threshold=0.5, strategy=Strategy.KM_DNSMN)
    ranked = retrieve_documents("Homeland is great", homeland_corpus, _stub_scorer(HOMELAND_SCORES), config)
    assert _ids(ranked) == ["Homeland", "Homeland_(TV_series)", "Homeland_(novel)"]
    assert ranked[0].priority is Priority.GUARANTEED and ranked[0].srs == 1.0
    assert [r.p for r in ranked[1:]] == [0.6, 0.9]


def test_top_k_never_drops_guaranteed(homeland_corpus):
    config = RetrievalConfig(k=1, doc_threshold=0.5)
    ranked = retrieve_documents("Homeland is great", homeland_corpus, _stub_scorer(HOMELAND_SCORES), config)
    assert _ids(ranked) == ["Homeland", "Homeland_(TV_series)"]
    strict = retrieve_documents(
        "Homeland is great",
        homeland_corpus,
        _stub_scorer(HOMELAND_SCORES),
        RetrievalConfig(doc_threshold=0.95),
    )
    assert _ids(strict) == ["Homeland"]


def test_constant_probability_orders_by_m_plus_then_id(homeland_corpus):
    scores = {"novel": (0.8, 1.0), "TV": (0.8, 1.0), "album": (0.8, 3.0)}
    ranked = retrieve_documents("Homeland is great", homeland_corpus, _stub_scorer(scores), RetrievalConfig())
    assert _ids(ranked)[1:] == ["Homeland_(album)", "Homeland_(TV_series)", "Homeland_(novel)"]


def test_no_disambiguative_candidates_returns_keyword_matches(savages_corpus):
    ranked = retrieve_documents("Food Network is on YouTube", savages_corpus, None, RetrievalConfig())
    assert set(_ids(ranked)) == keyword_match("Food Network is on YouTube", savages_corpus.index)
    assert all(r.priority is Priority.GUARANTEED for r in ranked)


def test_no_candidates_returns_nothing(savages_corpus):
    assert retrieve_documents("nothing matches", savages_corpus, None, RetrievalConfig()) == []


def test_savages_claim(savages_corpus):
    calls = []
    scores = {"band": (0.7, 0.5), "2012": (0.8, 1.5)}
    ranked = retrieve_documents(
        "Savages was exclusively a German film", savages_corpus, _stub_scorer(scores, calls), RetrievalConfig()
    )
    assert _ids(ranked) == ["Savages", "Savages_(2012_film)", "Savages_(band)"]
    assert sorted(calls) == ["2012", "band"]


def test_neural_strategy_needs_scorer(homeland_corpus):
    with pytest.raises(StartupError):
        retrieve_documents("Homeland is great", homeland_corpus, None, RetrievalConfig())


def test_pageview_and_tfidf_strategies(homeland_corpus):
    pageview = retrieve_documents(
        "Homeland is great", homeland_corpus, None, RetrievalConfig(strategy=Strategy.KM_PAGEVIEW, k=2)
    )
    assert _ids(pageview) == ["Homeland", "Homeland_(TV_series)", "Homeland_(album)"]
    tfidf = retrieve_documents(
        "Homeland is a studio album", homeland_corpus, None, RetrievalConfig(strategy=Strategy.KM_TFIDF, k=1)
    )
    assert _ids(tfidf) == ["Homeland", "Homeland_(album)"]


def test_pageview_pool_is_truncated_before_scoring(homeland_corpus):
    calls = []
    config = RetrievalConfig(strategy=Strategy.KM_PAGEVIEW_DNSMN, k=1, doc_threshold=0.5)
    ranked = retrieve_documents("Homeland is great", homeland_corpus, _stub_scorer(HOMELAND_SCORES, calls), config)
    assert sorted(calls) == ["TV", "album"]
    assert _ids(ranked) == ["Homeland", "Homeland_(TV_series)"]


@pytest.fixture(scope="module")
def crowded_corpus(document_factory):
    docs = [document_factory("Mercury", ["Mercury is a word."])]
    docs += [document_factory(f"Mercury_({tag})", [f"Mercury is a {tag}."]) for tag in "abcdefg"]
    return Corpus.from_documents(docs)


def test_keyword_only_cap_is_seeded(crowded_corpus):
    config = RetrievalConfig(strategy=Strategy.KM, k=10, disambiguative_cap=5, seed=1)
    first = retrieve_documents("Mercury rises", crowded_corpus, None, config, claim_id=7)
    again = retrieve_documents("Mercury rises", crowded_corpus, None, config, claim_id=7)
    assert _ids(first) == _ids(again)
    assert len(first) == 1 + 5
    assert len(set(_ids(first))) == len(first)
    truncated = retrieve_documents("Mercury rises", crowded_corpus, None, config.model_copy(update={"k": 2}), claim_id=7)
    assert len(truncated) == 1 + 2


def test_retrieve_all_keeps_order_and_ids(crowded_corpus):
    records = [ClaimRecord(i, "Mercury rises", Label.NEI) for i in (5, 3, 9)]
    config = RetrievalConfig(strategy=Strategy.KM, seed=2)
    parallel = retrieve_all(records, crowded_corpus, None, config, max_workers=3)
    serial = retrieve_all(records, crowded_corpus, None, config, max_workers=1)
    assert list(parallel) == [5, 3, 9]
    assert {k: _ids(v) for k, v in parallel.items()} == {k: _ids(v) for k, v in serial.items()}


def test_ranked_doc_json():
    doc = RankedDoc("Homeland_(novel)", Priority.SCORED, 0.5, 0.7)
    assert RankedDoc.from_json(doc.to_json()) == doc


def _savages_records():
    return [
        ClaimRecord(1, "Savages are a rock band from London", Label.SUPPORTS, [[("Savages_(band)", 1)]]),
        ClaimRecord(2, "Savages is a German film released in 2012", Label.SUPPORTS, [[("Savages_(2012_film)", 1)]]),
        ClaimRecord(3, "Savages is a rock band", Label.REFUTES, [[("Savages_(band)", 2)]]),
        ClaimRecord(4, "Savages is a German film", Label.SUPPORTS, [[("Savages_(2012_film)", 2)]]),
    ]


def test_make_doc_training_pairs(savages_corpus):
    pairs = make_doc_training_pairs(_savages_records()[:1], savages_corpus)
    assert {(p.doc_id, p.positive) for p in pairs} == {("Savages_(band)", True), ("Savages_(2012_film)", False)}
    assert make_doc_training_pairs([ClaimRecord(5, "Dog is on YouTube", Label.NEI)], savages_corpus) == []
    nei = make_doc_training_pairs([ClaimRecord(6, "Savages won an award", Label.NEI)], savages_corpus)
    assert len(nei) == 2 and not any(p.positive for p in nei)


def test_doc_example_labels(savages_corpus):
    positive = doc_example(DocPair(1, "Savages rock", "Savages_(band)", True), savages_corpus)
    negative = doc_example(DocPair(1, "Savages rock", "Savages_(band)", False), savages_corpus)
    assert (positive.label, negative.label) == (0, 1)
    assert positive.b.tokens == ["Savages", "rock"]


def test_train_dnsmn_fits_separable_pairs(savages_corpus, tiny_model):
    pairs = make_doc_training_pairs(_savages_records(), savages_corpus)
    texts = [doc_repr(d) for d in savages_corpus.documents.values()] + [tokenize(r.claim) for r in _savages_records()]
    model = tiny_model(texts)
    result = train_dnsmn(pairs, model, TrainingConfig(epochs=30, lr=0.02, batch_size=4, dim=16), savages_corpus)
    assert len(result.history) == 30
    assert pair_accuracy(model, [doc_example(p, savages_corpus) for p in pairs]) >= 0.95


def test_train_dnsmn_loss_descends_with_small_lr(savages_corpus, tiny_model):
    pairs = make_doc_training_pairs(_savages_records(), savages_corpus)
    texts = [doc_repr(d) for d in savages_corpus.documents.values()] + [tokenize(r.claim) for r in _savages_records()]
    result = train_dnsmn(pairs, tiny_model(texts), TrainingConfig(epochs=2, lr=1e-3, batch_size=8, dim=16), savages_corpus)
    assert result.history[1].loss <= result.history[0].loss


def test_train_dnsmn_rejects_bad_input(savages_corpus, tiny_model):
    with pytest.raises(TrainingDataError):
        train_dnsmn([], tiny_model(["a"]), TrainingConfig(epochs=1), savages_corpus)
    pairs = [DocPair(1, "Savages rock", "Savages_(band)", True)]
    with pytest.raises(ValueError):
        train_dnsmn(pairs, tiny_model(["a"], head=Head.VERIFICATION), TrainingConfig(epochs=1), savages_corpus)


def test_evaluate_retrieval(savages_corpus):
    report = evaluate_retrieval(
        _savages_records(), savages_corpus, None, RetrievalConfig(strategy=Strategy.KM_PAGEVIEW), ks=(1, 5)
    )
    # pageview keeps the band page at k=1, so only the band claims are covered
    assert report["full"] == {1: 0.5, 5: 1.0}
    assert report["doc_difficult"] == {1: 0.5, 5: 1.0}
