from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel

from factcheck.corpus import tokenize
from factcheck.corpus.text import is_punctuation, lemma
from factcheck.model.embedding import EmbeddingProvider
from factcheck.selection import RankedSentence
from factcheck.settings import settings
from factcheck.verification.ontology import Direction, OntologyGraph, hypernym_distance

WORDNET_WIDTH = 30
SRS_WIDTH = 2


class Side(str, Enum):
    EVIDENCE = "evidence"
    CLAIM = "claim"

    @property
    def code(self) -> np.ndarray:
        return np.array([1.0, 0.0, 1.0] if self is Side.EVIDENCE else [0.0, 1.0, 1.0])


class Channel(IntEnum):
    EXACT_LEMMA = 0
    ANTONYM = 1
    HYPONYM = 2
    HYPERNYM = 3
    HYPONYM_1 = 4
    HYPERNYM_1 = 5
    HYPONYM_2 = 6
    HYPERNYM_2 = 7
    HYPONYM_FAR = 8
    HYPERNYM_FAR = 9


class FeatureConfig(BaseModel):
    wordnet: bool = True
    number: bool = True
    srs_sentence: bool = True
    srs_doc: bool = False

    @property
    def srs(self) -> bool:
        return self.srs_sentence or self.srs_doc

    @property
    def fixed_width(self) -> int:
        """Width of the features computed outside the model (number vectors are learned)."""
        return WORDNET_WIDTH * self.wordnet + SRS_WIDTH * self.srs

    @property
    def width(self) -> int:
        return self.fixed_width + settings.NUMBER_EMBEDDING_DIM * self.number

    @classmethod
    def parse(cls, spec: str) -> "FeatureConfig":
        """``"wn,num,srs"`` style flag lists; ``srs-doc`` adds the document score."""
        names = {s.strip().lower() for s in spec.split(",") if s.strip()}
        unknown = names - {"wn", "num", "srs", "srs-sent", "srs-doc", "none"}
        if unknown:
            raise ValueError(f"unknown feature flag(s): {sorted(unknown)}")
        return cls(
            wordnet="wn" in names,
            number="num" in names,
            srs_sentence=bool(names & {"srs", "srs-sent"}),
            srs_doc="srs-doc" in names,
        )


def _fired_channels(token: str, other: Sequence[str], graph: OntologyGraph, cache: dict) -> set[Channel]:
    fired = set()
    own = lemma(token)
    for word in other:
        if is_punctuation(word):
            continue
        key = (own, lemma(word))
        if key not in cache:
            cache[key] = _relation_channels(token, word, key, graph)
        fired |= cache[key]
    return fired


def _relation_channels(token: str, word: str, key, graph: OntologyGraph) -> set[Channel]:
    own, theirs = key
    channels = set()
    if own == theirs:
        channels.add(Channel.EXACT_LEMMA)
    if graph.are_antonyms(token, word):
        channels.add(Channel.ANTONYM)
    rel = hypernym_distance(token, word, graph)
    if rel is not None:
        hyper = rel.direction is Direction.HYPERNYM
        channels.add(Channel.HYPERNYM if hyper else Channel.HYPONYM)
        if rel.edges == 1:
            channels.add(Channel.HYPERNYM_1 if hyper else Channel.HYPONYM_1)
        elif rel.edges == 2:
            channels.add(Channel.HYPERNYM_2 if hyper else Channel.HYPONYM_2)
        else:
            channels.add(Channel.HYPERNYM_FAR if hyper else Channel.HYPONYM_FAR)
    return channels


def wordnet_channels(
    token: str,
    other_tokens: Sequence[str],
    side: Side,
    graph: OntologyGraph,
    cache: dict | None = None,
) -> np.ndarray:
    """30 indicator values: for each of the 10 channels, the side code if any
    other-side token stands in that relation to ``token``, else zeros."""
    out = np.zeros(WORDNET_WIDTH)
    if is_punctuation(token):
        return out
    for channel in _fired_channels(token, other_tokens, graph, {} if cache is None else cache):
        out[3 * channel : 3 * channel + 3] = side.code
    return out


def wordnet_matrix(tokens: Sequence[str], other_tokens: Sequence[str], side: Side, graph: OntologyGraph) -> np.ndarray:
    cache: dict = {}
    cols = [wordnet_channels(t, other_tokens, side, graph, cache) for t in tokens]
    return np.stack(cols, axis=1) if cols else np.zeros((WORDNET_WIDTH, 0))


def number_feature(token: str, embedding: EmbeddingProvider) -> np.ndarray:
    return embedding.number_feature(token)


@dataclass
class Premise:
    tokens: List[str]
    srs: np.ndarray  # 2 x n: (document-stage p, sentence-stage p)


def concat_evidence(evidence: Sequence[RankedSentence]) -> Premise:
    """Evidence tokens in selection order, each carrying its sentence's two relatedness scores."""
    tokens: List[str] = []
    cols = []
    for sentence in evidence:
        sent_tokens = tokenize(sentence.text)
        tokens += sent_tokens
        cols += [(sentence.doc_p, sentence.p)] * len(sent_tokens)
    srs = np.array(cols, dtype=np.float64).T if cols else np.zeros((SRS_WIDTH, 0))
    return Premise(tokens, srs)


def feature_block(
    tokens: Sequence[str],
    other_tokens: Sequence[str],
    side: Side,
    srs: np.ndarray | None,
    graph: OntologyGraph,
    config: FeatureConfig,
) -> np.ndarray | None:
    """Fixed feature rows for one side; claim-side and disabled SRS rows are zero."""
    rows = []
    if config.wordnet:
        rows.append(wordnet_matrix(tokens, other_tokens, side, graph))
    if config.srs:
        block = np.zeros((SRS_WIDTH, len(tokens)))
        if srs is not None and side is Side.EVIDENCE:
            if config.srs_doc:
                block[0] = srs[0]
            if config.srs_sentence:
                block[1] = srs[1]
        rows.append(block)
    if not rows:
        return None
    return np.concatenate(rows, axis=0)
