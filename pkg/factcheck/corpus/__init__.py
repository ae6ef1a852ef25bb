from factcheck.corpus.index import (
    Corpus,
    CorpusIndex,
    ingest,
    load_claims,
    representation_tokens,
)
from factcheck.corpus.matching import (
    exact_match,
    first_article_elimination,
    keyword_match,
    singularize_claim,
)
from factcheck.corpus.ranking import pageview_rank, tfidf_rank, tfidf_similarity
from factcheck.corpus.schema import (
    LABELS,
    ClaimRecord,
    Document,
    EvidenceGroup,
    EvidencePointer,
    Label,
)
from factcheck.corpus.text import is_disambiguative, singularize, tokenize
