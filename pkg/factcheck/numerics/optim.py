from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from factcheck.errors import ConflictError, UninitializedGradientError
from factcheck.numerics.tensor import Tensor
from factcheck.settings import settings


@dataclass
class ParamSet:
    """Named trainable tensors plus their Adam moments."""

    tensors: dict[str, Tensor] = field(default_factory=dict)
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    def add(self, name: str, tensor: Tensor) -> Tensor:
        if name in self.tensors:
            raise ConflictError(f"parameter {name!r} registered twice")
        tensor.name = name
        tensor.requires_grad = True
        self.tensors[name] = tensor
        self.first_moment[name] = np.zeros_like(tensor.values)
        self.second_moment[name] = np.zeros_like(tensor.values)
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self):
        return len(self.tensors)

    def items(self):
        return self.tensors.items()

    def num_parameters(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def zero_grad(self):
        for t in self.tensors.values():
            t.zero_grad()

    def scale_grad(self, factor: float):
        for t in self.tensors.values():
            if t.grad is not None:
                t.grad *= factor

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: t.values.copy() for name, t in self.tensors.items()}

    def restore(self, values: dict[str, np.ndarray]):
        for name, v in values.items():
            self.tensors[name].values[...] = v

    def snapshot_state(self) -> "ParamState":
        """Values together with the Adam moments and step count."""
        return ParamState(
            values=self.snapshot(),
            first_moment={name: m.copy() for name, m in self.first_moment.items()},
            second_moment={name: v.copy() for name, v in self.second_moment.items()},
            step=self.step,
        )

    def restore_state(self, state: "ParamState"):
        self.restore(state.values)
        for name, m in state.first_moment.items():
            self.first_moment[name][...] = m
        for name, v in state.second_moment.items():
            self.second_moment[name][...] = v
        self.step = state.step


@dataclass
class ParamState:
    values: dict[str, np.ndarray]
    first_moment: dict[str, np.ndarray]
    second_moment: dict[str, np.ndarray]
    step: int


def adam_step(
    params: ParamSet,
    lr: float | None = None,
    beta1: float | None = None,
    beta2: float | None = None,
    eps: float | None = None,
) -> ParamSet:
    """One bias-corrected Adam update; gradients are zeroed afterwards."""
    lr = settings.ADAM_LR if lr is None else lr
    beta1 = settings.ADAM_BETA1 if beta1 is None else beta1
    beta2 = settings.ADAM_BETA2 if beta2 is None else beta2
    eps = settings.ADAM_EPS if eps is None else eps

    for name, t in params.items():
        if t.grad is None:
            raise UninitializedGradientError(f"parameter {name!r} has no gradient")

    params.step += 1
    bc1 = 1.0 - beta1**params.step
    bc2 = 1.0 - beta2**params.step
    for name, t in params.items():
        g = t.grad
        m = params.first_moment[name]
        v = params.second_moment[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        t.values -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
        t.zero_grad()
    return params
