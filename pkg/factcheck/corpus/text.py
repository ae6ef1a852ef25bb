"""Tokenizer, title normalization, singularizer and number grammar.

Claims, titles, sentences and ontology lemmas all go through the same
tokenizer so keyword matching and features agree on token boundaries.
"""

import re
import string
from typing import List, Sequence

PUNCTUATION = frozenset(string.punctuation)
ARTICLES = ("a", "an", "the")

_PARENTHETICAL = re.compile(r"^(?P<base>.+?) \((?P<note>[^()]*)\)$")
_NUMBER = re.compile(
    r"^[$€£]?(?P<num>[+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?|[+-]?\.\d+)%?$"
)


def tokenize(text: str) -> List[str]:
    """Split on whitespace, then split leading/trailing punctuation into tokens."""
    tokens = []
    for chunk in text.split():
        start, end = 0, len(chunk)
        while start < end and chunk[start] in PUNCTUATION:
            start += 1
        while end > start and chunk[end - 1] in PUNCTUATION:
            end -= 1
        tokens.extend(chunk[:start])
        if start < end:
            tokens.append(chunk[start:end])
        tokens.extend(chunk[end:])
    return tokens


def is_punctuation(token: str) -> bool:
    return all(ch in PUNCTUATION for ch in token)


def span_key(tokens: Sequence[str]) -> str:
    """Matching key: case-insensitive except for the first letter."""
    text = " ".join(tokens)
    if not text:
        return text
    return text[0] + text[1:].lower()


def strip_parenthetical(title: str) -> str | None:
    match = _PARENTHETICAL.match(title)
    if match is None:
        return None
    return match.group("base")


def is_disambiguative(title: str) -> bool:
    """True when the title ends with a ``" (...)"`` disambiguation suffix."""
    return _PARENTHETICAL.match(title) is not None


def content_terms(text_or_tokens) -> List[str]:
    """Case-folded tokens without pure punctuation, for TF-IDF and overlap counts."""
    tokens = tokenize(text_or_tokens) if isinstance(text_or_tokens, str) else text_or_tokens
    return [t.lower() for t in tokens if not is_punctuation(t)]


# Singularizer rule table, checked top to bottom on the lowercased token:
#   1. tokens of <= 3 letters, possessives and INVARIANT words stay unchanged
#   2. IRREGULAR words map through the table
#   3. -ss, -us, -is endings stay unchanged
#   4. -ies -> -y, except IES_TO_IE words which drop only the -s
#   5. -es -> strip "es" after x, z, ch, sh, ss or for ES_STRIP words, else strip "s"
#   6. -s -> strip "s"
INVARIANT = frozenset(
    {"news", "series", "species", "physics", "mathematics", "economics", "politics",
     "athletics", "chaos", "lens", "always", "perhaps", "sometimes", "various",
     "was", "has", "does", "is", "his", "hers", "its", "this", "thus", "yes",
     "whereas", "towards", "afterwards", "besides", "ethos", "pathos", "canvas"}
)
IRREGULAR = {
    "buses": "bus", "gases": "gas", "men": "man", "women": "woman",
    "children": "child", "feet": "foot", "teeth": "tooth", "mice": "mouse",
    "geese": "goose", "people": "person", "oxen": "ox", "criteria": "criterion",
    "phenomena": "phenomenon", "data": "datum", "wolves": "wolf", "knives": "knife",
    "wives": "wife", "lives": "life", "leaves": "leaf", "halves": "half",
    "shelves": "shelf", "thieves": "thief",
}
IES_TO_IE = frozenset(
    {"movies", "cookies", "zombies", "calories", "rookies", "hippies", "goalies",
     "brownies", "pies", "ties", "lies", "dies", "prairies", "sorties", "genies"}
)
ES_STRIP = frozenset(
    {"potatoes", "tomatoes", "heroes", "echoes", "vetoes", "torpedoes", "volcanoes",
     "mosquitoes", "dominoes", "buzzes", "quizzes"}
)


def singularize(token: str) -> str:
    lower = token.lower()
    if len(lower) <= 3 or lower in INVARIANT or lower.endswith("'s"):
        return token
    if lower in IRREGULAR:
        return _match_case(token, IRREGULAR[lower])
    if lower.endswith(("ss", "us", "is")):
        return token
    if lower.endswith("ies"):
        if lower in IES_TO_IE:
            return token[:-1]
        return token[:-3] + ("Y" if token[-3:].isupper() else "y")
    if lower.endswith("es"):
        stem = lower[:-2]
        if lower in ES_STRIP or stem.endswith(("x", "z", "ch", "sh", "ss")):
            return token[:-2]
        return token[:-1]
    if lower.endswith("s"):
        return token[:-1]
    return token


def _match_case(original: str, replacement: str) -> str:
    if original.isupper():
        return replacement.upper()
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def lemma(token: str) -> str:
    """Lowercase + singularize, standing in for a dictionary lemmatizer."""
    return singularize(token.lower())


def number_surface(token: str) -> str | None:
    """Numeric part of ``token`` (integer, decimal, comma-grouped, optional
    currency prefix or percent suffix) or None if it is not a number."""
    match = _NUMBER.match(token)
    if match is None:
        return None
    return match.group("num")
