import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from factcheck.errors import DimensionError, StaleTapeError
from factcheck.settings import settings

_local = threading.local()


class Tensor:
    """Dense float64 array with an optional gradient.

    Leaf tensors created with ``requires_grad=True`` accumulate ``grad`` across
    backward passes until zeroed; intermediate tensors only live on a tape.
    """

    __slots__ = ("values", "grad", "requires_grad", "name", "_tape")

    def __init__(self, values, requires_grad: bool = False, name: str | None = None):
        self.values = np.asarray(values, dtype=settings.DTYPE)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._tape: "Tape | None" = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def size(self) -> int:
        return int(self.values.size)

    def item(self) -> float:
        return float(self.values.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.values

    def zero_grad(self):
        self.grad = np.zeros_like(self.values)

    def __add__(self, other: "Tensor") -> "Tensor":
        from factcheck.numerics.ops import add

        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        from factcheck.numerics.ops import sub

        return sub(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        from factcheck.numerics.ops import mul

        return mul(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from factcheck.numerics.ops import matmul

        return matmul(self, other)

    def __repr__(self):
        r = repr(self.values).replace("array", "tensor")
        if self.name:
            r = r[:-1] + f", name={self.name!r})"
        return r


@dataclass
class _Node:
    out: Tensor
    inputs: Sequence[Tensor]
    backward: Callable[[np.ndarray], Sequence[np.ndarray | None]]


class Tape:
    """Records differentiable ops executed inside ``with Tape():``.

    Tapes are thread-local; ops run outside any tape are not recorded.
    """

    def __init__(self):
        self.nodes: list[_Node] = []
        self.cleared = False

    def __enter__(self) -> "Tape":
        stack = getattr(_local, "stack", None)
        if stack is None:
            stack = _local.stack = []
        stack.append(self)
        return self

    def __exit__(self, *args):
        _local.stack.pop()

    def __len__(self):
        return len(self.nodes)


def active_tape() -> Tape | None:
    stack = getattr(_local, "stack", None)
    if not stack:
        return None
    return stack[-1]


def record(
    values: np.ndarray,
    inputs: Sequence[Tensor],
    backward: Callable[[np.ndarray], Sequence[np.ndarray | None]],
) -> Tensor:
    out = Tensor(values)
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out._tape = tape
        tape.nodes.append(_Node(out, tuple(inputs), backward))
    return out


def backward(loss: Tensor):
    """Populate ``grad`` on every leaf reachable from ``loss``, then clear the tape."""
    tape = loss._tape
    if tape is None:
        raise StaleTapeError("loss was not produced by a taped forward pass")
    if tape.cleared:
        raise StaleTapeError("tape already consumed; run a new forward pass first")
    if loss.size != 1:
        raise DimensionError("backward", loss.shape, ())

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.values)}
    for node in reversed(tape.nodes):
        g = grads.pop(id(node.out), None)
        if g is None:
            continue
        for t, gi in zip(node.inputs, node.backward(g)):
            if gi is None or not t.requires_grad:
                continue
            if t._tape is tape:
                prev = grads.get(id(t))
                grads[id(t)] = gi if prev is None else prev + gi
            elif t.grad is None:
                t.grad = np.array(gi, dtype=settings.DTYPE)
            else:
                t.grad += gi

    tape.nodes.clear()
    tape.cleared = True
