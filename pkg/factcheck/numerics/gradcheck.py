import logging
from typing import Callable

import numpy as np

from factcheck.numerics.optim import ParamSet
from factcheck.numerics.tensor import Tape, Tensor, backward

logger = logging.getLogger(__name__)


def grad_check(
    forward: Callable[[], Tensor],
    params: ParamSet,
    eps: float = 1e-5,
    samples_per_param: int = 12,
    seed: int = 0,
    atol: float = 0.0,
) -> float:
    """Max relative error between taped gradients and central differences.

    ``forward`` must be deterministic and return a scalar loss. At most
    ``samples_per_param`` coordinates of each parameter are probed; coordinates
    whose absolute discrepancy is at most ``atol`` count as exact.
    """
    params.zero_grad()
    with Tape():
        loss = forward()
        backward(loss)
    analytic = {name: t.grad.copy() for name, t in params.items()}

    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, t in params.items():
        flat = t.values.reshape(-1)
        coords = np.arange(flat.size)
        if flat.size > samples_per_param:
            coords = rng.choice(flat.size, size=samples_per_param, replace=False)
        for c in coords:
            orig = flat[c]
            flat[c] = orig + eps
            plus = forward().item()
            flat[c] = orig - eps
            minus = forward().item()
            flat[c] = orig
            numeric = (plus - minus) / (2 * eps)
            a = analytic[name].reshape(-1)[c]
            if abs(a - numeric) <= atol:
                continue
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            if err > worst:
                logger.debug("%s[%d]: analytic=%g numeric=%g", name, c, a, numeric)
                worst = err
    params.zero_grad()
    return worst
