import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, List, Mapping

from pydantic import ValidationError as PydanticValidationError

from factcheck.corpus.schema import (
    ClaimLine,
    ClaimRecord,
    Document,
    DocumentLine,
)
from factcheck.corpus.text import (
    content_terms,
    is_disambiguative,
    span_key,
    strip_parenthetical,
    tokenize,
)
from factcheck.errors import ConflictError, ParseError, ValidationError
from factcheck.settings import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorpusIndex:
    """Immutable lookup tables consumed by keyword matching and ranking."""

    exact_titles: Mapping[str, frozenset[str]]
    stripped_titles: Mapping[str, frozenset[str]]
    long_title_lengths: Mapping[str, frozenset[int]]
    postings: Mapping[str, frozenset[str]]
    doc_count: int
    pageviews: Mapping[str, int]

    def document_frequency(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def idf(self, term: str) -> float:
        return math.log((self.doc_count + 1) / (self.document_frequency(term) + 1)) + 1.0

    def pageview(self, doc_id: str) -> int:
        return self.pageviews.get(doc_id, 0)

    @classmethod
    def build(cls, documents: Iterable[Document]) -> "CorpusIndex":
        exact = defaultdict(set)
        stripped = defaultdict(set)
        long_lengths = defaultdict(set)
        postings = defaultdict(set)
        pageviews = {}
        count = 0
        for doc in documents:
            count += 1
            pageviews[doc.id] = doc.pageview
            _add_title(exact, long_lengths, tokenize(doc.title), doc.id)
            base = strip_parenthetical(doc.title)
            if base is not None:
                _add_title(stripped, long_lengths, tokenize(base), doc.id)
            for term in set(content_terms(representation_tokens(doc))):
                postings[term].add(doc.id)

        return cls(
            exact_titles=_freeze(exact),
            stripped_titles=_freeze(stripped),
            long_title_lengths=_freeze(long_lengths),
            postings=_freeze(postings),
            doc_count=count,
            pageviews=MappingProxyType(pageviews),
        )


def _add_title(table, long_lengths, tokens: List[str], doc_id: str):
    if not tokens:
        return
    table[span_key(tokens)].add(doc_id)
    if len(tokens) > settings.MAX_SPAN_TOKENS:
        long_lengths[span_key(tokens[:1])].add(len(tokens))


def _freeze(table) -> Mapping:
    return MappingProxyType({k: frozenset(v) for k, v in table.items()})


def representation_tokens(doc: Document) -> List[str]:
    """Title tokens followed by the tokens of the first body sentence."""
    tokens = tokenize(doc.title)
    if len(doc.sentences) > 1:
        tokens += tokenize(doc.sentences[1])
    return tokens


@dataclass(frozen=True)
class Corpus:
    documents: Mapping[str, Document]
    index: CorpusIndex

    def __len__(self):
        return len(self.documents)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.documents

    def __getitem__(self, doc_id: str) -> Document:
        return self.documents[doc_id]

    def get(self, doc_id: str) -> Document | None:
        return self.documents.get(doc_id)

    def sentence(self, doc_id: str, index: int) -> str:
        doc = self.documents.get(doc_id)
        if doc is None or not 0 <= index < len(doc.sentences):
            raise ValidationError(f"evidence ({doc_id!r}, {index}) not in corpus")
        return doc.sentences[index]

    def is_disambiguative(self, doc_id: str) -> bool:
        doc = self.documents.get(doc_id)
        return doc is not None and is_disambiguative(doc.title)

    @classmethod
    def from_documents(cls, documents: Iterable[Document]) -> "Corpus":
        store = {}
        for doc in documents:
            if doc.id in store:
                raise ConflictError(f"duplicate document id {doc.id!r}")
            store[doc.id] = doc
        return cls(documents=MappingProxyType(store), index=CorpusIndex.build(store.values()))


def _parse_lines(stream: Iterable[str], model):
    for line_number, line in enumerate(stream, 1):
        if not line.strip():
            continue
        try:
            yield line_number, model.model_validate(json.loads(line))
        except (json.JSONDecodeError, PydanticValidationError) as e:
            raise ParseError(" ".join(str(e).split()), line_number) from e


def ingest(stream: Iterable[str]) -> Corpus:
    """Build the document store and all indexes from corpus JSONL lines."""
    documents = {}
    for line_number, parsed in _parse_lines(stream, DocumentLine):
        try:
            doc = parsed.to_document()
        except ValueError as e:
            raise ParseError(str(e), line_number) from e
        if doc.id in documents:
            raise ConflictError(f"line {line_number}: duplicate document id {doc.id!r}")
        documents[doc.id] = doc

    corpus = Corpus.from_documents(documents.values())
    dangling = sum(
        1
        for doc in corpus.documents.values()
        for group in doc.links
        for target in group
        if target not in corpus
    )
    if dangling:
        logger.warning("%d hyperlink target(s) do not resolve in the corpus", dangling)
    logger.info("Ingested %d documents", len(corpus))
    return corpus


def load_claims(stream: Iterable[str], corpus: Corpus | None = None) -> List[ClaimRecord]:
    """Parse claim JSONL; with a corpus, every evidence pointer must resolve."""
    records = []
    seen = set()
    for line_number, parsed in _parse_lines(stream, ClaimLine):
        try:
            record = parsed.to_record()
        except ValueError as e:
            raise ParseError(str(e), line_number) from e
        if record.id in seen:
            raise ConflictError(f"line {line_number}: duplicate claim id {record.id}")
        seen.add(record.id)
        if corpus is not None:
            for doc_id, index in record.gold_sentences():
                corpus.sentence(doc_id, index)
        records.append(record)
    return records
