import math
from collections import Counter
from typing import Iterable, List, Sequence, Tuple

from factcheck.corpus.index import Corpus, CorpusIndex, representation_tokens
from factcheck.corpus.text import content_terms


def tfidf_vector(terms: Sequence[str], index: CorpusIndex) -> dict[str, float]:
    """Sublinear ``ln(1 + tf) * idf`` weights."""
    return {t: math.log1p(tf) * index.idf(t) for t, tf in Counter(terms).items()}


def cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(w * b.get(t, 0.0) for t, w in a.items())
    if dot == 0.0:
        return 0.0
    norm = math.sqrt(sum(w * w for w in a.values())) * math.sqrt(
        sum(w * w for w in b.values())
    )
    return min(1.0, dot / norm)


def tfidf_similarity(query, text, index: CorpusIndex) -> float:
    return cosine(
        tfidf_vector(content_terms(query), index),
        tfidf_vector(content_terms(text), index),
    )


def tfidf_rank(
    claim: str, candidates: Iterable[str], corpus: Corpus
) -> List[Tuple[str, float]]:
    """Candidates by descending cosine against title + first sentence; ties by id."""
    query = tfidf_vector(content_terms(claim), corpus.index)
    scored = [
        (
            doc_id,
            cosine(
                query,
                tfidf_vector(
                    content_terms(representation_tokens(corpus[doc_id])), corpus.index
                ),
            ),
        )
        for doc_id in set(candidates)
    ]
    return sorted(scored, key=lambda x: (-x[1], x[0]))


def pageview_rank(candidates: Iterable[str], index: CorpusIndex) -> List[str]:
    """Descending pageview count, ties broken by id; unknown ids count as 0."""
    return sorted(set(candidates), key=lambda d: (-index.pageview(d), d))
