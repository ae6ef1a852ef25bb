import hashlib
import logging
from pathlib import Path
from typing import Iterable, List, Sequence

import numpy as np

from factcheck.corpus.text import number_surface
from factcheck.errors import ParseError
from factcheck.model.schema import MatchInput, NSMNDims, TokenChannels
from factcheck.numerics import ParamSet, Tensor, concat_rows, gather_columns

logger = logging.getLogger(__name__)

UNK = "<unk>"
SENTINEL = "<empty>"


def load_static_vectors(path: str | Path) -> tuple[dict[str, np.ndarray], int]:
    """Read ``token v1 v2 ... vd`` lines; every line must carry the same d."""
    vectors = {}
    dim = None
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, 1):
            parts = line.rstrip().split(" ")
            if len(parts) < 2:
                continue
            try:
                vec = np.asarray([float(x) for x in parts[1:]])
            except ValueError as e:
                raise ParseError(str(e), line_number) from e
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ParseError(f"expected {dim} values, got {len(vec)}", line_number)
            vectors[parts[0].lower()] = vec
    logger.info("Loaded %d static vectors of width %s from %s", len(vectors), dim, path)
    return vectors, dim or 0


def hash_vector(token: str, dim: int, scale: float = 0.5) -> np.ndarray:
    """Deterministic frozen vector for tokens without a loaded embedding."""
    seed = int.from_bytes(hashlib.md5(token.lower().encode("utf-8")).digest()[:8], "little")
    return np.random.default_rng(seed).uniform(-scale, scale, size=dim)


class EmbeddingProvider:
    """Token vocabulary plus the static, trainable and number channels.

    The static matrix is frozen; the trainable and number tables are registered
    in the owning model's ParamSet.
    """

    def __init__(
        self,
        vocab: Sequence[str],
        static: np.ndarray,
        trainable: Tensor,
        number_vocab: Sequence[str] = (),
        number_table: Tensor | None = None,
    ):
        self.vocab = list(vocab)
        self.token_ids = {t: i for i, t in enumerate(self.vocab)}
        self.static = static
        self.trainable = trainable
        self.number_vocab = list(number_vocab)
        self.number_ids = {t: i for i, t in enumerate(self.number_vocab)}
        self.number_table = number_table

    @property
    def static_dim(self) -> int:
        return self.static.shape[1]

    @property
    def trainable_dim(self) -> int:
        return self.trainable.shape[1]

    @property
    def number_dim(self) -> int:
        return 0 if self.number_table is None else self.number_table.shape[1]

    @classmethod
    def build(
        cls,
        texts: Iterable[Sequence[str]],
        static_dim: int,
        trainable_dim: int,
        number_dim: int = 0,
        rng: np.random.Generator | None = None,
        scale: float = 0.08,
        static_vectors: dict[str, np.ndarray] | None = None,
    ) -> "EmbeddingProvider":
        rng = rng or np.random.default_rng(0)
        words = set()
        numbers = set()
        for tokens in texts:
            for t in tokens:
                words.add(t.lower())
                num = number_surface(t)
                if num is not None:
                    numbers.add(num)
        vocab = [UNK, SENTINEL] + sorted(words - {UNK, SENTINEL})
        static = np.zeros((len(vocab), static_dim))
        for i, word in enumerate(vocab):
            if static_vectors is not None and word in static_vectors:
                static[i] = static_vectors[word]
            elif static_dim:
                static[i] = hash_vector(word, static_dim)
        trainable = Tensor(
            rng.uniform(-scale, scale, size=(len(vocab), trainable_dim)), requires_grad=True
        )
        number_vocab = [UNK] + sorted(numbers)
        number_table = None
        if number_dim:
            number_table = Tensor(
                rng.uniform(-scale, scale, size=(len(number_vocab), number_dim)),
                requires_grad=True,
            )
        return cls(vocab, static, trainable, number_vocab, number_table)

    def clone(self) -> "EmbeddingProvider":
        """Independent copy; two models must never share trainable tables."""
        return EmbeddingProvider(
            self.vocab,
            self.static,
            Tensor(self.trainable.values.copy(), requires_grad=True),
            self.number_vocab,
            None
            if self.number_table is None
            else Tensor(self.number_table.values.copy(), requires_grad=True),
        )

    def register(self, params: ParamSet, prefix: str = "embedding"):
        params.add(f"{prefix}.trainable", self.trainable)
        if self.number_table is not None:
            params.add(f"{prefix}.number", self.number_table)

    def ids(self, tokens: Sequence[str]) -> List[int]:
        return [self.token_ids.get(t.lower(), 0) for t in tokens]

    def static_columns(self, tokens: Sequence[str]) -> np.ndarray:
        cols = np.empty((self.static_dim, len(tokens)))
        for j, t in enumerate(tokens):
            i = self.token_ids.get(t.lower())
            cols[:, j] = self.static[i] if i is not None else hash_vector(t, self.static_dim)
        return cols

    def number_ids_for(self, tokens: Sequence[str]) -> tuple[List[int], np.ndarray]:
        """Number table rows and a 0/1 mask of which tokens are numbers."""
        rows, mask = [], np.zeros(len(tokens))
        for j, t in enumerate(tokens):
            num = number_surface(t)
            rows.append(self.number_ids.get(num, 0) if num is not None else 0)
            mask[j] = num is not None
        return rows, mask

    def number_feature(self, token: str) -> np.ndarray:
        """Learned number vector for numeric tokens, zeros otherwise."""
        width = self.number_dim
        num = number_surface(token)
        if num is None or self.number_table is None:
            return np.zeros(width)
        return self.number_table.values[self.number_ids.get(num, 0)].copy()

    def channels(self, inp: MatchInput) -> TokenChannels:
        tokens = inp.tokens
        static = Tensor(self.static_columns(tokens)) if self.static_dim else None
        trainable = gather_columns(self.trainable, self.ids(tokens))
        feature_parts = []
        if inp.features is not None and inp.features.shape[0]:
            feature_parts.append(Tensor(inp.features))
        if self.number_table is not None:
            rows, mask = self.number_ids_for(tokens)
            numbers = gather_columns(self.number_table, rows)
            feature_parts.append(numbers * Tensor(np.broadcast_to(mask, numbers.shape)))
        features = concat_rows(feature_parts) if feature_parts else None
        return TokenChannels(static=static, trainable=trainable, features=features)

    def dims(self, feature_dim: int, d1: int, d2: int, d3: int) -> NSMNDims:
        return NSMNDims(
            static_dim=self.static_dim,
            trainable_dim=self.trainable_dim,
            feature_dim=feature_dim,
            number_dim=self.number_dim,
            d1=d1,
            d2=d2,
            d3=d3,
        )
