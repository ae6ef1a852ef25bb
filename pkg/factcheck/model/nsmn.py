"""Neural semantic matching network: encoding, alignment, matching and output layers.

Sequence A (``U``) is the evidence or document side, sequence B (``V``) the claim.
"""

from dataclasses import dataclass

import numpy as np

from factcheck.errors import DimensionError, InputError
from factcheck.model.embedding import EmbeddingProvider
from factcheck.model.schema import Head, MatchInput, MatchResult, NSMNDims
from factcheck.numerics import (
    BiLSTMParams,
    ParamSet,
    Tensor,
    abs_,
    affine,
    bilstm,
    concat_rows,
    init_uniform,
    matmul,
    maxpool_row,
    mul,
    softmax_col,
    sub,
    transpose,
)
from factcheck.settings import settings


@dataclass
class OutputParams:
    """h = affine -> rectifier -> affine over [p; q; |p-q|; p*q]."""

    W1: Tensor
    b1: Tensor
    W2: Tensor
    b2: Tensor

    @classmethod
    def init(cls, d_in: int, hidden: int, head: Head, rng, scale: float, prefix: str):
        return cls(
            W1=init_uniform((hidden, d_in), scale, rng, f"{prefix}.W1"),
            b1=init_uniform((hidden,), scale, rng, f"{prefix}.b1"),
            W2=init_uniform((head.size, hidden), scale, rng, f"{prefix}.W2"),
            b2=init_uniform((head.size,), scale, rng, f"{prefix}.b2"),
        )

    def named_tensors(self) -> dict[str, Tensor]:
        return {t.name: t for t in (self.W1, self.b1, self.W2, self.b2)}


@dataclass
class NSMNParams:
    dims: NSMNDims
    head: Head
    embedding: EmbeddingProvider
    encoder: BiLSTMParams
    combine_W: Tensor
    combine_b: Tensor
    matcher: BiLSTMParams
    output: OutputParams
    params: ParamSet

    kind = "nsmn"

    @classmethod
    def init(
        cls,
        embedding: EmbeddingProvider,
        head: Head,
        dims: NSMNDims,
        seed: int = 0,
        scale: float | None = None,
    ) -> "NSMNParams":
        scale = settings.INIT_SCALE if scale is None else scale
        if dims.static_dim != embedding.static_dim or dims.trainable_dim != embedding.trainable_dim:
            raise DimensionError(
                "NSMNParams.init",
                (dims.static_dim, dims.trainable_dim),
                (embedding.static_dim, embedding.trainable_dim),
            )
        rng = np.random.default_rng(seed)
        params = ParamSet()
        embedding.register(params)
        encoder = BiLSTMParams.init(dims.d0, dims.d1 // 2, rng, scale, "encoder")
        combine_W = init_uniform((dims.d2, 4 * dims.d1), scale, rng, "combine.W")
        combine_b = init_uniform((dims.d2,), scale, rng, "combine.b")
        matcher = BiLSTMParams.init(dims.d2 + dims.d_s, dims.d3 // 2, rng, scale, "matcher")
        output = OutputParams.init(4 * dims.d3, dims.output_hidden, head, rng, scale, "output")
        for name, t in {
            **encoder.named_tensors(),
            "combine.W": combine_W,
            "combine.b": combine_b,
            **matcher.named_tensors(),
            **output.named_tensors(),
        }.items():
            params.add(name, t)
        return cls(dims, head, embedding, encoder, combine_W, combine_b, matcher, output, params)

    def logits(self, a: MatchInput, b: MatchInput) -> Tensor:
        return forward(a, b, self)

    def score(self, a: MatchInput, b: MatchInput) -> MatchResult:
        return score_pair(a, b, self)


def encode(U: Tensor, params: NSMNParams) -> Tensor:
    return bilstm(U, params.encoder)


def align(U_bar: Tensor, V_bar: Tensor) -> tuple[Tensor, Tensor, Tensor]:
    """E = U_bar^T V_bar; each side attends over the other's encoded tokens."""
    if U_bar.shape[0] != V_bar.shape[0]:
        raise DimensionError("align", U_bar.shape, V_bar.shape)
    E = matmul(transpose(U_bar), V_bar)
    U_tilde = matmul(V_bar, softmax_col(transpose(E)))
    V_tilde = matmul(U_bar, softmax_col(E))
    return E, U_tilde, V_tilde


def combine(X_bar: Tensor, X_tilde: Tensor, params: NSMNParams) -> Tensor:
    if X_bar.shape != X_tilde.shape:
        raise DimensionError("combine", X_bar.shape, X_tilde.shape)
    stacked = concat_rows([X_bar, X_tilde, sub(X_bar, X_tilde), mul(X_bar, X_tilde)])
    return affine(stacked, params.combine_W, params.combine_b, "rectifier")


def match(S: Tensor, U_star: Tensor | None, params: NSMNParams) -> Tensor:
    if U_star is not None and U_star.shape[0]:
        if U_star.shape[1] != S.shape[1]:
            raise DimensionError("match", S.shape, U_star.shape)
        S = concat_rows([S, U_star])
    return bilstm(S, params.matcher)


def output_features(p: Tensor, q: Tensor) -> Tensor:
    return concat_rows([p, q, abs_(sub(p, q)), mul(p, q)])


def head_scores(features: Tensor, out: OutputParams) -> Tensor:
    hidden = affine(features, out.W1, out.b1, "rectifier")
    return affine(hidden, out.W2, out.b2, "none")


def output(P: Tensor, Q: Tensor, params: NSMNParams) -> Tensor:
    return head_scores(output_features(maxpool_row(P), maxpool_row(Q)), params.output)


def forward(a: MatchInput, b: MatchInput, params: NSMNParams) -> Tensor:
    """Full pass encode -> align -> combine -> match -> output; returns raw scores m."""
    if not a.tokens or not b.tokens:
        raise InputError("both sequences must contain at least one token")
    ca = params.embedding.channels(a)
    cb = params.embedding.channels(b)
    U_bar = encode(ca.U, params)
    V_bar = encode(cb.U, params)
    _, U_tilde, V_tilde = align(U_bar, V_bar)
    S = combine(U_bar, U_tilde, params)
    T = combine(V_bar, V_tilde, params)
    P = match(S, ca.shortcut, params)
    Q = match(T, cb.shortcut, params)
    return output(P, Q, params)


def score_pair(a: MatchInput, b: MatchInput, params: NSMNParams) -> MatchResult:
    return MatchResult(head=params.head, scores=forward(a, b, params).values.copy())
