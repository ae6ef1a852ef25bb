from dataclasses import dataclass

import numpy as np

from factcheck.errors import DimensionError, EmptySequenceError
from factcheck.numerics.ops import _sigmoid
from factcheck.numerics.tensor import Tensor, record


def init_uniform(shape, scale: float, rng: np.random.Generator, name: str | None = None) -> Tensor:
    return Tensor(rng.uniform(-scale, scale, size=shape), requires_grad=True, name=name)


@dataclass
class LSTMDirection:
    """Gate weights stacked in input, forget, cell, output order."""

    W: Tensor  # 4h x d_in
    U: Tensor  # 4h x h
    b: Tensor  # 4h

    @classmethod
    def init(cls, d_in: int, h: int, rng: np.random.Generator, scale: float, prefix: str):
        return cls(
            W=init_uniform((4 * h, d_in), scale, rng, f"{prefix}.W"),
            U=init_uniform((4 * h, h), scale, rng, f"{prefix}.U"),
            b=init_uniform((4 * h,), scale, rng, f"{prefix}.b"),
        )

    def tensors(self) -> list[Tensor]:
        return [self.W, self.U, self.b]


@dataclass
class BiLSTMParams:
    d_in: int
    h: int
    forward: LSTMDirection
    backward: LSTMDirection

    @property
    def d_out(self) -> int:
        return 2 * self.h

    @classmethod
    def init(cls, d_in: int, h: int, rng: np.random.Generator, scale: float, prefix: str = "bilstm"):
        return cls(
            d_in=d_in,
            h=h,
            forward=LSTMDirection.init(d_in, h, rng, scale, f"{prefix}.fwd"),
            backward=LSTMDirection.init(d_in, h, rng, scale, f"{prefix}.bwd"),
        )

    def named_tensors(self) -> dict[str, Tensor]:
        return {t.name: t for t in self.forward.tensors() + self.backward.tensors()}


def _run_direction(x: np.ndarray, W: np.ndarray, U: np.ndarray, b: np.ndarray):
    h = U.shape[1]
    n = x.shape[1]
    pre = W @ x + b[:, None]
    H = np.zeros((h, n + 1))  # column 0 is the zero initial state
    C = np.zeros((h, n + 1))
    gates = np.zeros((4 * h, n))
    for t in range(n):
        a = pre[:, t] + U @ H[:, t]
        i = _sigmoid(a[:h])
        f = _sigmoid(a[h : 2 * h])
        g = np.tanh(a[2 * h : 3 * h])
        o = _sigmoid(a[3 * h :])
        C[:, t + 1] = f * C[:, t] + i * g
        H[:, t + 1] = o * np.tanh(C[:, t + 1])
        gates[:, t] = np.concatenate([i, f, g, o])
    return H, C, gates


def _bptt(gH: np.ndarray, x, W, U, H, C, gates):
    h = U.shape[1]
    n = x.shape[1]
    dA = np.zeros((4 * h, n))
    dh_next = np.zeros(h)
    dc_next = np.zeros(h)
    for t in reversed(range(n)):
        i, f, g, o = (gates[k * h : (k + 1) * h, t] for k in range(4))
        tc = np.tanh(C[:, t + 1])
        dh = gH[:, t] + dh_next
        dc = dh * o * (1.0 - tc * tc) + dc_next
        da = np.concatenate(
            [
                dc * g * i * (1.0 - i),
                dc * C[:, t] * f * (1.0 - f),
                dc * i * (1.0 - g * g),
                dh * tc * o * (1.0 - o),
            ]
        )
        dA[:, t] = da
        dh_next = U.T @ da
        dc_next = dc * f
    dW = dA @ x.T
    dU = dA @ H[:, :n].T
    db = dA.sum(axis=1)
    dx = W.T @ dA
    return dx, dW, dU, db


def bilstm(seq: Tensor, params: BiLSTMParams) -> Tensor:
    """Bidirectional LSTM over the columns of ``seq``.

    Rows ``0..h-1`` hold the left-to-right pass, rows ``h..2h-1`` the right-to-left
    pass, both aligned to input positions.
    """
    x = seq.values
    if x.ndim != 2 or x.shape[0] != params.d_in:
        raise DimensionError("bilstm", seq.shape, (params.d_in, "n"))
    if x.shape[1] == 0:
        raise EmptySequenceError("bilstm over an empty sequence")

    fw, bw = params.forward, params.backward
    x_rev = x[:, ::-1]
    Hf, Cf, Gf = _run_direction(x, fw.W.values, fw.U.values, fw.b.values)
    Hb, Cb, Gb = _run_direction(x_rev, bw.W.values, bw.U.values, bw.b.values)
    out = np.concatenate([Hf[:, 1:], Hb[:, 1:][:, ::-1]], axis=0)
    h = params.h

    def _backward(g):
        dxf, dWf, dUf, dbf = _bptt(g[:h], x, fw.W.values, fw.U.values, Hf, Cf, Gf)
        dxb, dWb, dUb, dbb = _bptt(
            g[h:][:, ::-1], x_rev, bw.W.values, bw.U.values, Hb, Cb, Gb
        )
        return dxf + dxb[:, ::-1], dWf, dUf, dbf, dWb, dUb, dbb

    return record(out, (seq, *fw.tensors(), *bw.tensors()), _backward)
