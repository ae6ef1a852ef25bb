import logging
from dataclasses import dataclass, field
from typing import Callable, List, Sequence

import numpy as np
from pydantic import BaseModel, Field
from tqdm import tqdm

from factcheck.errors import TrainingDataError
from factcheck.model.schema import MatchInput
from factcheck.numerics import Tape, adam_step, backward, cross_entropy
from factcheck.settings import settings

logger = logging.getLogger(__name__)


class TrainingConfig(BaseModel):
    epochs: int = Field(default=10, ge=0)
    lr: float = Field(default=settings.ADAM_LR, gt=0)
    batch_size: int | None = Field(default=None, ge=1)
    dim: int = Field(default=settings.MODEL_DIM, ge=2)
    seed: int = 0
    annealed: bool = True


@dataclass
class Example:
    a: MatchInput
    b: MatchInput
    label: int


@dataclass
class EpochLog:
    epoch: int
    loss: float
    accuracy: float
    n_examples: int
    dev_metric: float | None = None
    p_e: float | None = None


@dataclass
class TrainingResult:
    model: object
    history: List[EpochLog] = field(default_factory=list)
    best_epoch: int = 0

    @property
    def losses(self) -> List[float]:
        return [h.loss for h in self.history]


def _batches(examples: Sequence[Example], size: int):
    for start in range(0, len(examples), size):
        yield examples[start : start + size]


def train_matcher(
    model,
    examples: Sequence[Example] | Callable[[int], Sequence[Example]],
    config: TrainingConfig,
    batch_size: int,
    stage: str = "matcher",
    dev_metric: Callable[[object], float] | None = None,
    schedule: Callable[[int], float] | None = None,
) -> TrainingResult:
    """Minibatch cross-entropy training shared by every stage.

    ``examples`` is either a fixed list (shuffled per epoch) or a callable
    returning the examples of a given 1-based epoch. Gradients are summed per
    example and averaged before one Adam step per batch. The parameters of the
    best epoch (dev metric, or lowest loss without one) are restored at the end,
    Adam moments and step count included; ties keep the earliest epoch.
    """
    batch_size = config.batch_size or batch_size
    if not callable(examples) and not examples:
        raise TrainingDataError(f"{stage}: no training examples")

    params = model.params
    history: List[EpochLog] = []
    best_score, best_epoch, best_state = None, 0, params.snapshot_state()

    for epoch in range(1, config.epochs + 1):
        if callable(examples):
            epoch_examples = list(examples(epoch))
        else:
            order = np.random.default_rng([config.seed, epoch]).permutation(len(examples))
            epoch_examples = [examples[i] for i in order]
        if not epoch_examples:
            raise TrainingDataError(f"{stage}: epoch {epoch} has no training examples")

        total_loss, correct = 0.0, 0
        batches = _batches(epoch_examples, batch_size)
        for batch in tqdm(
            batches,
            total=-(-len(epoch_examples) // batch_size),
            desc=f"{stage} epoch {epoch}",
            disable=not settings.SHOW_PROGRESS,
            leave=False,
        ):
            params.zero_grad()
            for ex in batch:
                with Tape():
                    logits = model.logits(ex.a, ex.b)
                    loss = cross_entropy(logits, ex.label)
                    backward(loss)
                total_loss += loss.item()
                correct += int(np.argmax(logits.values)) == ex.label
            params.scale_grad(1.0 / len(batch))
            adam_step(params, lr=config.lr)

        log = EpochLog(
            epoch=epoch,
            loss=total_loss / len(epoch_examples),
            accuracy=correct / len(epoch_examples),
            n_examples=len(epoch_examples),
            p_e=schedule(epoch) if schedule else None,
        )
        if dev_metric is not None:
            log.dev_metric = dev_metric(model)
        history.append(log)
        logger.info(
            "%s epoch %d: loss=%.4f acc=%.4f dev=%s p_e=%s n=%d",
            stage,
            epoch,
            log.loss,
            log.accuracy,
            "-" if log.dev_metric is None else f"{log.dev_metric:.4f}",
            "-" if log.p_e is None else f"{log.p_e:.2f}",
            log.n_examples,
        )

        score = log.dev_metric if dev_metric is not None else -log.loss
        if best_score is None or score > best_score:
            best_score, best_epoch, best_state = score, epoch, params.snapshot_state()

    params.restore_state(best_state)
    if history:
        logger.info("%s: keeping epoch %d of %d", stage, best_epoch, len(history))
    return TrainingResult(model=model, history=history, best_epoch=best_epoch)
