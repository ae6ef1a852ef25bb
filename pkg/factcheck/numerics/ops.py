from typing import Literal, Sequence

import numpy as np

from factcheck.errors import DimensionError, EmptySequenceError, LabelError
from factcheck.numerics.tensor import Tensor, record

Activation = Literal["none", "rectifier"]


def _same_shape(op: str, a: Tensor, b: Tensor):
    if a.shape != b.shape:
        raise DimensionError(op, a.shape, b.shape)


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("add", a, b)
    return record(a.values + b.values, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("sub", a, b)
    return record(a.values - b.values, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("mul", a, b)
    av, bv = a.values, b.values
    return record(av * bv, (a, b), lambda g: (g * bv, g * av))


def abs_(a: Tensor) -> Tensor:
    # np.sign(0) == 0 gives the zero subgradient at the kink
    sign = np.sign(a.values)
    return record(np.abs(a.values), (a,), lambda g: (g * sign,))


def relu(a: Tensor) -> Tensor:
    mask = a.values > 0
    return record(a.values * mask, (a,), lambda g: (g * mask,))


def sigmoid(a: Tensor) -> Tensor:
    s = _sigmoid(a.values)
    return record(s, (a,), lambda g: (g * s * (1.0 - s),))


def tanh(a: Tensor) -> Tensor:
    t = np.tanh(a.values)
    return record(t, (a,), lambda g: (g * (1.0 - t * t),))


def sum_(a: Tensor) -> Tensor:
    shape = a.shape
    return record(np.sum(a.values), (a,), lambda g: (np.broadcast_to(g, shape),))


def transpose(a: Tensor) -> Tensor:
    if a.values.ndim != 2:
        raise DimensionError("transpose", a.shape)
    return record(a.values.T, (a,), lambda g: (g.T,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    av, bv = a.values, b.values
    if av.ndim != 2 or bv.ndim not in (1, 2) or av.shape[1] != bv.shape[0]:
        raise DimensionError("matmul", a.shape, b.shape)

    def _backward(g):
        if bv.ndim == 1:
            return np.outer(g, bv), av.T @ g
        return g @ bv.T, av.T @ g

    return record(av @ bv, (a, b), _backward)


def concat_rows(parts: Sequence[Tensor]) -> Tensor:
    """Stack tensors along axis 0; all parts share their trailing dimensions."""
    parts = [p for p in parts if p.shape[0] > 0]
    if not parts:
        raise DimensionError("concat_rows", ())
    if len(parts) == 1:
        return parts[0]
    trailing = parts[0].shape[1:]
    for p in parts[1:]:
        if p.shape[1:] != trailing:
            raise DimensionError("concat_rows", parts[0].shape, p.shape)
    bounds = np.cumsum([p.shape[0] for p in parts])[:-1]

    def _backward(g):
        return np.split(g, bounds, axis=0)

    return record(np.concatenate([p.values for p in parts], axis=0), parts, _backward)


def gather_columns(table: Tensor, indices: Sequence[int]) -> Tensor:
    """Look up rows of ``table`` (vocab x width) and return them as columns (width x n)."""
    idx = np.asarray(indices, dtype=np.int64)
    shape = table.shape

    def _backward(g):
        gt = np.zeros(shape)
        np.add.at(gt, idx, g.T)
        return (gt,)

    return record(table.values[idx].T, (table,), _backward)


def affine(
    x: Tensor, W: Tensor, b: Tensor, activation: Activation = "none"
) -> Tensor:
    """Column-wise ``act(W @ x_j + b)`` for a matrix ``x`` or a single vector."""
    xv, Wv, bv = x.values, W.values, b.values
    if (
        Wv.ndim != 2
        or xv.ndim not in (1, 2)
        or Wv.shape[1] != xv.shape[0]
        or bv.shape != (Wv.shape[0],)
    ):
        raise DimensionError("affine", W.shape, x.shape, b.shape)

    z = Wv @ xv + (bv[:, None] if xv.ndim == 2 else bv)
    if activation == "rectifier":
        mask = z > 0
        out = z * mask
    else:
        mask = None
        out = z

    def _backward(g):
        gz = g * mask if mask is not None else g
        if xv.ndim == 1:
            return Wv.T @ gz, np.outer(gz, xv), gz
        return Wv.T @ gz, gz @ xv.T, gz.sum(axis=1)

    return record(out, (x, W, b), _backward)


def softmax_col(M: Tensor) -> Tensor:
    if M.values.ndim != 2:
        raise DimensionError("softmax_col", M.shape)
    s = _softmax(M.values, axis=0)

    def _backward(g):
        return (s * (g - np.sum(g * s, axis=0, keepdims=True)),)

    return record(s, (M,), _backward)


def maxpool_row(M: Tensor) -> Tensor:
    """Row-wise max; gradient goes to the first argmax column on ties."""
    if M.values.ndim != 2:
        raise DimensionError("maxpool_row", M.shape)
    if M.shape[1] == 0:
        raise EmptySequenceError("maxpool_row over zero columns")
    rows = np.arange(M.shape[0])
    arg = np.argmax(M.values, axis=1)
    shape = M.shape

    def _backward(g):
        gm = np.zeros(shape)
        gm[rows, arg] = g
        return (gm,)

    return record(M.values[rows, arg], (M,), _backward)


def cross_entropy(logits: Tensor, gold: int) -> Tensor:
    """``-log softmax(logits)[gold]`` as a scalar tensor."""
    lv = logits.values
    if lv.ndim != 1:
        raise DimensionError("cross_entropy", logits.shape)
    if not 0 <= gold < lv.shape[0]:
        raise LabelError(f"gold label {gold} outside [0, {lv.shape[0]})")
    lse = _logsumexp(lv)
    probs = np.exp(lv - lse)

    def _backward(g):
        grad = probs.copy()
        grad[gold] -= 1.0
        return (g * grad,)

    return record(np.asarray(lse - lv[gold]), (logits,), _backward)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softmax(x: np.ndarray, axis: int) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def _logsumexp(x: np.ndarray) -> float:
    top = np.max(x)
    return float(top + np.log(np.sum(np.exp(x - top))))


def softmax(x: np.ndarray) -> np.ndarray:
    """Untaped softmax of a vector, used for reporting probabilities."""
    return _softmax(np.asarray(x, dtype=np.float64), axis=0)
