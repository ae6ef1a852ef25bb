import math
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple

import numpy as np

from factcheck.numerics import Tensor, concat_rows


class Head(str, Enum):
    EXTRACTION = "extraction"
    VERIFICATION = "verification"

    @property
    def size(self) -> int:
        return 2 if self is Head.EXTRACTION else 3


@dataclass(frozen=True)
class NSMNDims:
    """Layer widths. d0 and the shortcut width d_s follow from the channel widths."""

    static_dim: int
    trainable_dim: int
    feature_dim: int = 0
    number_dim: int = 0
    d1: int = 128
    d2: int = 128
    d3: int = 128
    hidden: int | None = None

    def __post_init__(self):
        for name in ("d1", "d3"):
            if getattr(self, name) % 2:
                raise ValueError(f"{name} must be even (two LSTM directions)")

    @property
    def d_s(self) -> int:
        return self.trainable_dim + self.feature_dim + self.number_dim

    @property
    def d0(self) -> int:
        return self.static_dim + self.d_s

    @property
    def output_hidden(self) -> int:
        return self.hidden or self.d3

    @classmethod
    def uniform(cls, dim: int, static_dim: int, trainable_dim: int, feature_dim=0, number_dim=0):
        return cls(static_dim, trainable_dim, feature_dim, number_dim, dim, dim, dim)


@dataclass
class MatchInput:
    """One side of a pair: tokens and optional per-token features (width x n)."""

    tokens: List[str]
    features: np.ndarray | None = None

    def __post_init__(self):
        if self.features is not None and self.features.shape[1] != len(self.tokens):
            raise ValueError(
                f"{self.features.shape[1]} feature columns for {len(self.tokens)} tokens"
            )


@dataclass
class TokenChannels:
    static: Tensor | None  # frozen, never in the shortcut
    trainable: Tensor
    features: Tensor | None

    @property
    def U(self) -> Tensor:
        return concat_rows([c for c in (self.static, self.trainable, self.features) if c is not None])

    @property
    def shortcut(self) -> Tensor:
        return concat_rows([c for c in (self.trainable, self.features) if c is not None])


class Relatedness(NamedTuple):
    m_plus: float
    p: float


@dataclass
class MatchResult:
    head: Head
    scores: np.ndarray

    @property
    def m_plus(self) -> float:
        return float(self.scores[0])

    @property
    def m_minus(self) -> float:
        return float(self.scores[1])

    @property
    def p(self) -> float:
        """exp(m+) / (exp(m+) + exp(m-)), evaluated stably."""
        d = self.m_minus - self.m_plus
        if d >= 0:
            e = math.exp(-d)
            return e / (1.0 + e)
        return 1.0 / (1.0 + math.exp(d))

    @property
    def label_index(self) -> int:
        return int(np.argmax(self.scores))

    def relatedness(self) -> Relatedness:
        return Relatedness(self.m_plus, self.p)
