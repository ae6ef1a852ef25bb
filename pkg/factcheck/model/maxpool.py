from dataclasses import dataclass

import numpy as np

from factcheck.errors import DimensionError, InputError
from factcheck.model.embedding import EmbeddingProvider
from factcheck.model.nsmn import OutputParams, head_scores, output_features
from factcheck.model.schema import Head, MatchInput, MatchResult, NSMNDims
from factcheck.numerics import BiLSTMParams, ParamSet, Tensor, bilstm, maxpool_row
from factcheck.settings import settings


@dataclass
class MaxPoolParams:
    """Sentence-encoder baseline: one shared BiLSTM + max-pool per side, no alignment.

    Uses ``dims.d0`` as input width and ``dims.d1`` as the pooled vector width;
    d2 and d3 are unused.
    """

    dims: NSMNDims
    head: Head
    embedding: EmbeddingProvider
    encoder: BiLSTMParams
    output: OutputParams
    params: ParamSet

    kind = "maxpool"

    @classmethod
    def init(
        cls,
        embedding: EmbeddingProvider,
        head: Head,
        dims: NSMNDims,
        seed: int = 0,
        scale: float | None = None,
    ) -> "MaxPoolParams":
        scale = settings.INIT_SCALE if scale is None else scale
        if dims.static_dim != embedding.static_dim or dims.trainable_dim != embedding.trainable_dim:
            raise DimensionError(
                "MaxPoolParams.init",
                (dims.static_dim, dims.trainable_dim),
                (embedding.static_dim, embedding.trainable_dim),
            )
        rng = np.random.default_rng(seed)
        params = ParamSet()
        embedding.register(params)
        encoder = BiLSTMParams.init(dims.d0, dims.d1 // 2, rng, scale, "encoder")
        output = OutputParams.init(4 * dims.d1, dims.output_hidden, head, rng, scale, "output")
        for name, t in {**encoder.named_tensors(), **output.named_tensors()}.items():
            params.add(name, t)
        return cls(dims, head, embedding, encoder, output, params)

    def logits(self, a: MatchInput, b: MatchInput) -> Tensor:
        return maxpool_forward(a, b, self)

    def score(self, a: MatchInput, b: MatchInput) -> MatchResult:
        return maxpool_encoder_score(a, b, self)


def maxpool_forward(a: MatchInput, b: MatchInput, params: MaxPoolParams) -> Tensor:
    if not a.tokens or not b.tokens:
        raise InputError("both sequences must contain at least one token")
    p = maxpool_row(bilstm(params.embedding.channels(a).U, params.encoder))
    q = maxpool_row(bilstm(params.embedding.channels(b).U, params.encoder))
    return head_scores(output_features(p, q), params.output)


def maxpool_encoder_score(a: MatchInput, b: MatchInput, params: MaxPoolParams) -> MatchResult:
    return MatchResult(head=params.head, scores=maxpool_forward(a, b, params).values.copy())
