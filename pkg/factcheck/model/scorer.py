from typing import Callable, Iterable, Literal, Sequence

import numpy as np

from factcheck.model.embedding import EmbeddingProvider
from factcheck.model.maxpool import MaxPoolParams
from factcheck.model.nsmn import NSMNParams
from factcheck.model.schema import Head, MatchInput, NSMNDims, Relatedness
from factcheck.settings import settings

# (evidence-side tokens, claim tokens) -> relatedness
PairScorer = Callable[[Sequence[str], Sequence[str]], Relatedness]


def init_matcher(
    texts: Iterable[Sequence[str]],
    head: Head,
    dim: int | None = None,
    feature_dim: int = 0,
    number: bool = False,
    kind: Literal["nsmn", "maxpool"] = "nsmn",
    seed: int = 0,
    static_vectors: dict[str, np.ndarray] | None = None,
    static_dim: int | None = None,
    scale: float | None = None,
):
    """Fresh matcher whose vocabulary covers ``texts``."""
    dim = dim or settings.MODEL_DIM
    scale = settings.INIT_SCALE if scale is None else scale
    if static_dim is None:
        static_dim = settings.STATIC_EMBEDDING_DIM
        if static_vectors:
            static_dim = len(next(iter(static_vectors.values())))
    embedding = EmbeddingProvider.build(
        texts,
        static_dim=static_dim,
        trainable_dim=settings.TRAINABLE_EMBEDDING_DIM,
        number_dim=settings.NUMBER_EMBEDDING_DIM if number else 0,
        rng=np.random.default_rng([seed, 1]),
        scale=scale,
        static_vectors=static_vectors,
    )
    dims = NSMNDims.uniform(
        dim,
        static_dim=embedding.static_dim,
        trainable_dim=embedding.trainable_dim,
        feature_dim=feature_dim,
        number_dim=embedding.number_dim,
    )
    cls = MaxPoolParams if kind == "maxpool" else NSMNParams
    return cls.init(embedding, head, dims, seed=seed, scale=scale)


def relatedness_scorer(model) -> PairScorer:
    """Wrap an extraction-head matcher as ``(evidence tokens, claim tokens) -> (m+, p)``."""
    if model.head is not Head.EXTRACTION:
        raise ValueError("relatedness scoring needs an extraction-head model")

    def score(evidence_tokens: Sequence[str], claim_tokens: Sequence[str]) -> Relatedness:
        return model.score(
            MatchInput(list(evidence_tokens)), MatchInput(list(claim_tokens))
        ).relatedness()

    return score
