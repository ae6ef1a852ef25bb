from dotenv import find_dotenv
from pydantic import computed_field
from pydantic_settings import BaseSettings
import numpy as np
import os


class Settings(BaseSettings):
    # Paths
    BASE_DIR: str = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    CHECKPOINT_DIR: str = "checkpoints"

    # Model dimensions, d1 = d2 = d3 = MODEL_DIM unless overridden per stage
    MODEL_DIM: int = 128
    TEST_MODEL_DIM: int = 16
    STATIC_EMBEDDING_DIM: int = 16
    TRAINABLE_EMBEDDING_DIM: int = 16
    NUMBER_EMBEDDING_DIM: int = 5
    INIT_SCALE: float = 0.08

    # Optimizer
    ADAM_LR: float = 1e-3
    ADAM_BETA1: float = 0.9
    ADAM_BETA2: float = 0.999
    ADAM_EPS: float = 1e-8
    DOC_BATCH_SIZE: int = 128
    SENT_BATCH_SIZE: int = 128
    VERIF_BATCH_SIZE: int = 32

    # Retrieval and features
    MAX_SPAN_TOKENS: int = 7
    ONTOLOGY_MAX_DEPTH: int = 6
    MAX_EVIDENCE: int = 5
    TFIDF_P_EPS: float = 1e-6

    # Runtime
    MAX_WORKERS: int | None = None
    SHOW_PROGRESS: bool = True
    LOG_LEVEL: str = "INFO"

    @computed_field
    @property
    def DTYPE(self) -> type:
        return np.float64

    class Config:
        env_file = find_dotenv("local.env")
        extra = "ignore"


settings = Settings()
