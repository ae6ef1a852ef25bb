import pytest

from factcheck.corpus import Corpus, Document
from factcheck.model import Head, init_matcher
from factcheck.settings import settings
from factcheck.synthetic import SyntheticSpec, generate_synthetic, write_synthetic
from factcheck.verification import load_ontology

settings.SHOW_PROGRESS = False


def make_document(doc_id, sentences, links=None, pageview=0, title=None):
    title = title or doc_id.replace("_", " ")
    links = links or {}
    body = [title] + list(sentences)
    return Document(
        id=doc_id,
        title=title,
        sentences=tuple(body),
        links=tuple(tuple(links.get(i, ())) for i in range(len(body))),
        pageview=pageview,
    )


@pytest.fixture(scope="session")
def savages_corpus() -> Corpus:
    return Corpus.from_documents(
        [
            make_document(
                "Savages",
                ["Savages is a 2012 American crime thriller film.", "It was directed by Oliver Stone."],
                pageview=300,
            ),
            make_document(
                "Savages_(band)",
                [
                    "Savages are a rock band from London.",
                    "The band was formed in 2011.",
                    "Savages toured with Dog in 2013.",
                ],
                links={3: ["Dog"]},
                pageview=120,
            ),
            make_document(
                "Savages_(2012_film)",
                ["Savages is a German film released in 2012.", "The film was shot in Berlin."],
                pageview=80,
            ),
            make_document("YouTube", ["YouTube is a video sharing website."], pageview=900),
            make_document("Food_Network", ["Food Network is an American television channel."]),
            make_document(
                "Dog",
                ["The dog is a domesticated mammal.", "Dogs were domesticated from wolves."],
            ),
        ]
    )


TOY_ONTOLOGY = """\
# lemma records
LEMMA\tdog\tdog.n.01
LEMMA\tcanine\tcanine.n.01
LEMMA\tcarnivore\tcarnivore.n.01
LEMMA\tmammal\tmammal.n.01
LEMMA\tanimal\tanimal.n.01
LEMMA\tcat\tcat.n.01
LEMMA\tfeline\tfeline.n.01
HYPER\tdog.n.01\tcanine.n.01
HYPER\tcanine.n.01\tcarnivore.n.01
HYPER\tcarnivore.n.01\tmammal.n.01
HYPER\tmammal.n.01\tanimal.n.01
HYPER\tcat.n.01\tfeline.n.01
HYPER\tfeline.n.01\tcarnivore.n.01
ANT\thot\tcold
ANT\tlarge\tsmall
"""


@pytest.fixture(scope="session")
def toy_ontology():
    return load_ontology(TOY_ONTOLOGY.splitlines())


@pytest.fixture(scope="session")
def tiny_model():
    """Factory for seeded test-sized matchers."""

    def _make(texts, head=Head.EXTRACTION, **kwargs):
        kwargs.setdefault("dim", settings.TEST_MODEL_DIM)
        return init_matcher([t.split() if isinstance(t, str) else t for t in texts], head, **kwargs)

    return _make


@pytest.fixture(scope="session")
def synthetic_data():
    return generate_synthetic(SyntheticSpec(n_docs=60, claims_per_label=12), seed=3)


@pytest.fixture(scope="session")
def synthetic_dir(tmp_path_factory, synthetic_data):
    out = tmp_path_factory.mktemp("synthetic")
    write_synthetic(synthetic_data, out)
    return out


@pytest.fixture(scope="session")
def document_factory():
    return make_document
