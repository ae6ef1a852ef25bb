"""Keyword matching: exact title spans, leading-article elimination, singularization."""

from typing import List, Sequence

from factcheck.corpus.index import CorpusIndex
from factcheck.corpus.text import ARTICLES, singularize, span_key, tokenize
from factcheck.settings import settings


def _match_tokens(tokens: Sequence[str], index: CorpusIndex) -> set[str]:
    found: set[str] = set()
    n = len(tokens)
    for start in range(n):
        lengths = set(range(1, min(settings.MAX_SPAN_TOKENS, n - start) + 1))
        lengths.update(
            L
            for L in index.long_title_lengths.get(span_key(tokens[start : start + 1]), ())
            if start + L <= n
        )
        for length in lengths:
            key = span_key(tokens[start : start + length])
            found.update(index.exact_titles.get(key, ()))
            found.update(index.stripped_titles.get(key, ()))
    return found


def exact_match(claim: str, index: CorpusIndex) -> set[str]:
    """Documents whose title (or title minus its parenthetical) equals a claim span."""
    return _match_tokens(tokenize(claim), index)


def first_article_elimination(claim: str) -> str | None:
    parts = claim.strip().split(maxsplit=1)
    if len(parts) == 2 and parts[0].lower() in ARTICLES:
        return parts[1]
    return None


def singularize_claim(tokens: Sequence[str]) -> List[str]:
    return [singularize(t) for t in tokens]


def keyword_match(claim: str, index: CorpusIndex) -> set[str]:
    """Exact matching, unioned with exact matching after leading-article elimination.

    Singularization runs only when both found nothing. The first-letter case
    rule holds throughout: "the youtube video" never matches "YouTube".
    """
    matched = exact_match(claim, index)
    stripped = first_article_elimination(claim)
    if stripped is not None:
        matched |= exact_match(stripped, index)
    if matched:
        return matched
    return _match_tokens(singularize_claim(tokenize(claim)), index)
