from factcheck.model.checkpoint import load_checkpoint, save_checkpoint
from factcheck.model.embedding import EmbeddingProvider, hash_vector, load_static_vectors
from factcheck.model.maxpool import MaxPoolParams, maxpool_encoder_score
from factcheck.model.nsmn import (
    NSMNParams,
    align,
    combine,
    encode,
    match,
    output,
    score_pair,
)
from factcheck.model.schema import (
    Head,
    MatchInput,
    MatchResult,
    NSMNDims,
    Relatedness,
    TokenChannels,
)
from factcheck.model.train import EpochLog, Example, TrainingConfig, TrainingResult, train_matcher
from factcheck.model.scorer import PairScorer, init_matcher, relatedness_scorer
