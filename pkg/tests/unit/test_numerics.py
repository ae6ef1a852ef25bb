import math

import numpy as np
import pytest

from factcheck.errors import (
    DimensionError,
    EmptySequenceError,
    LabelError,
    StaleTapeError,
    UninitializedGradientError,
)
from factcheck.numerics import (
    BiLSTMParams,
    ParamSet,
    Tape,
    Tensor,
    abs_,
    adam_step,
    affine,
    backward,
    bilstm,
    concat_rows,
    cross_entropy,
    gather_columns,
    grad_check,
    matmul,
    maxpool_row,
    mul,
    softmax_col,
    sum_,
    tanh,
    transpose,
)


def _params(**arrays) -> ParamSet:
    params = ParamSet()
    for name, values in arrays.items():
        params.add(name, Tensor(np.array(values, dtype=float)))
    return params


def _sig(x):
    return 1.0 / (1.0 + math.exp(-x))


def _lstm_oracle(xs, W, U, b):
    """Scalar unrolled LSTM with gates in input, forget, cell, output order."""
    h = U.shape[1]
    hs, cs = [0.0] * h, [0.0] * h
    out = []
    for x in xs:
        a = [
            sum(W[r][k] * x[k] for k in range(len(x))) + sum(U[r][k] * hs[k] for k in range(h)) + b[r]
            for r in range(4 * h)
        ]
        new_c, new_h = [], []
        for j in range(h):
            i, f = _sig(a[j]), _sig(a[h + j])
            g, o = math.tanh(a[2 * h + j]), _sig(a[3 * h + j])
            c = f * cs[j] + i * g
            new_c.append(c)
            new_h.append(o * math.tanh(c))
        hs, cs = new_h, new_c
        out.append(hs)
    return out


def test_affine_identity():
    out = affine(Tensor([[1.0], [-2.0]]), Tensor(np.eye(2)), Tensor(np.zeros(2)))
    assert out.values.tolist() == [[1.0], [-2.0]]


def test_affine_rectifier():
    out = affine(Tensor([[1.0], [-2.0]]), Tensor(np.eye(2)), Tensor(np.zeros(2)), "rectifier")
    assert out.values.tolist() == [[1.0], [0.0]]


def test_affine_matches_triple_loop():
    rng = np.random.default_rng(0)
    W, x, b = rng.normal(size=(3, 4)), rng.normal(size=(4, 2)), rng.normal(size=3)
    out = affine(Tensor(x), Tensor(W), Tensor(b)).values
    for i in range(3):
        for j in range(2):
            expected = sum(W[i, k] * x[k, j] for k in range(4)) + b[i]
            assert out[i, j] == pytest.approx(expected, abs=1e-12)


def test_affine_shape_mismatch_names_shapes():
    with pytest.raises(DimensionError, match=r"\(3, 4\)"):
        affine(Tensor(np.zeros((5, 2))), Tensor(np.zeros((3, 4))), Tensor(np.zeros(3)))


def test_bilstm_single_token_shape():
    params = BiLSTMParams.init(3, 2, np.random.default_rng(0), 0.1)
    assert bilstm(Tensor(np.ones((3, 1))), params).shape == (4, 1)


def test_bilstm_zero_weights_give_zero_output():
    params = BiLSTMParams.init(3, 2, np.random.default_rng(0), 0.1)
    for t in params.named_tensors().values():
        t.values[...] = 0.0
    out = bilstm(Tensor(np.random.default_rng(1).normal(size=(3, 4))), params)
    assert np.all(out.values == 0.0)


def test_bilstm_empty_sequence():
    params = BiLSTMParams.init(3, 2, np.random.default_rng(0), 0.1)
    with pytest.raises(EmptySequenceError):
        bilstm(Tensor(np.zeros((3, 0))), params)


def test_bilstm_matches_unrolled_oracle():
    params = BiLSTMParams.init(3, 2, np.random.default_rng(7), 0.5)
    x = np.random.default_rng(8).normal(size=(3, 2))
    out = bilstm(Tensor(x), params).values
    fw, bw = params.forward, params.backward
    cols = [list(x[:, t]) for t in range(2)]
    fwd = _lstm_oracle(cols, fw.W.values.tolist(), fw.U.values, fw.b.values.tolist())
    bwd = _lstm_oracle(cols[::-1], bw.W.values.tolist(), bw.U.values, bw.b.values.tolist())[::-1]
    for t in range(2):
        np.testing.assert_allclose(out[:2, t], fwd[t], atol=1e-12)
        np.testing.assert_allclose(out[2:, t], bwd[t], atol=1e-12)


def test_bilstm_forward_half_is_causal():
    params = BiLSTMParams.init(3, 2, np.random.default_rng(2), 0.5)
    x = np.random.default_rng(3).normal(size=(3, 5))
    base = bilstm(Tensor(x), params).values
    x2 = x.copy()
    x2[:, 3:] += 1.0
    moved = bilstm(Tensor(x2), params).values
    np.testing.assert_array_equal(base[:2, :3], moved[:2, :3])
    assert not np.allclose(base[2:, :3], moved[2:, :3])


def test_softmax_col_cases():
    assert np.all(softmax_col(Tensor(np.zeros((2, 2)))).values == 0.5)
    np.testing.assert_allclose(
        softmax_col(Tensor([[math.log(3)], [0.0]])).values[:, 0], [0.75, 0.25], atol=1e-12
    )
    sums = softmax_col(Tensor(np.random.default_rng(0).normal(size=(5, 4)) * 10)).values.sum(axis=0)
    assert np.all(np.abs(sums - 1.0) < 1e-12)


def test_maxpool_row_values_and_tie_gradient():
    assert maxpool_row(Tensor([[1.0, 3.0], [2.0, 0.0]])).values.tolist() == [3.0, 2.0]
    assert maxpool_row(Tensor([[4.0], [5.0]])).values.tolist() == [4.0, 5.0]
    params = _params(M=[[5.0, 5.0]])
    with Tape():
        backward(sum_(maxpool_row(params["M"])))
    assert params["M"].grad.tolist() == [[1.0, 0.0]]


def test_maxpool_row_column_permutation_invariant():
    M = np.random.default_rng(4).normal(size=(3, 6))
    perm = np.random.default_rng(5).permutation(6)
    np.testing.assert_array_equal(maxpool_row(Tensor(M)).values, maxpool_row(Tensor(M[:, perm])).values)


def test_maxpool_row_empty():
    with pytest.raises(EmptySequenceError):
        maxpool_row(Tensor(np.zeros((2, 0))))


def test_cross_entropy_values():
    assert cross_entropy(Tensor([0.0, 0.0]), 0).item() == pytest.approx(math.log(2))
    assert cross_entropy(Tensor([10.0, -10.0]), 0).item() < 1e-4
    logits = np.random.default_rng(0).normal(size=3) * 5
    lse = math.log(sum(math.exp(v) for v in logits))
    assert cross_entropy(Tensor(logits), 2).item() == pytest.approx(lse - logits[2], abs=1e-10)


def test_cross_entropy_label_out_of_range():
    with pytest.raises(LabelError):
        cross_entropy(Tensor([0.0, 0.0]), 2)


def test_backward_simple_cases():
    params = _params(x=[1.0, 2.0, 3.0], a=[2.0], b=[5.0])
    with Tape():
        backward(sum_(params["x"]))
    assert params["x"].grad.tolist() == [1.0, 1.0, 1.0]
    with Tape():
        backward(sum_(mul(params["a"], params["b"])))
    assert params["a"].grad.tolist() == [5.0]
    assert params["b"].grad.tolist() == [2.0]


def test_backward_twice_is_stale():
    params = _params(x=[1.0, 2.0])
    with Tape():
        loss = sum_(params["x"])
        backward(loss)
        with pytest.raises(StaleTapeError):
            backward(loss)


def test_ops_outside_tape_record_nothing():
    params = _params(x=[1.0, 2.0])
    out = sum_(params["x"])
    assert out.requires_grad is False
    with pytest.raises(StaleTapeError):
        backward(out)


def test_gather_columns_scatter_adds():
    params = _params(table=np.arange(6.0).reshape(3, 2))
    with Tape():
        out = gather_columns(params["table"], [2, 0, 2])
        assert out.values.tolist() == [[4.0, 0.0, 4.0], [5.0, 1.0, 5.0]]
        backward(sum_(out))
    assert params["table"].grad.tolist() == [[1.0, 1.0], [0.0, 0.0], [2.0, 2.0]]


def test_adam_zero_gradient_keeps_values():
    params = _params(w=[1.5])
    params["w"].zero_grad()
    adam_step(params)
    assert params["w"].values.tolist() == [1.5]
    assert params.step == 1


def test_adam_first_step_moves_by_lr():
    params = _params(w=[1.0])
    params["w"].grad = np.array([1.0])
    adam_step(params, lr=1e-3)
    assert params["w"].values[0] == pytest.approx(1.0 - 1e-3, abs=1e-10)
    assert params["w"].grad.tolist() == [0.0]


def test_adam_descends_quadratic():
    params = _params(x=[2.0])
    losses = []
    for _ in range(3):
        with Tape():
            loss = sum_(mul(params["x"], params["x"]))
            backward(loss)
        losses.append(loss.item())
        adam_step(params, lr=0.1)
    assert losses[0] > losses[1] > losses[2]


def test_adam_without_gradient():
    with pytest.raises(UninitializedGradientError):
        adam_step(_params(w=[1.0]))


def test_snapshot_restore():
    params = _params(w=[1.0, 2.0])
    snap = params.snapshot()
    params["w"].values += 5
    params.restore(snap)
    assert params["w"].values.tolist() == [1.0, 2.0]


def test_snapshot_state_restores_adam_moments():
    params = _params(w=[1.0, 2.0])
    state = params.snapshot_state()
    params["w"].grad = np.array([0.5, -0.5])
    adam_step(params)
    assert params.step == 1
    params.restore_state(state)
    assert params.step == 0
    assert params["w"].values.tolist() == [1.0, 2.0]
    assert not params.first_moment["w"].any() and not params.second_moment["w"].any()


def test_grad_check_affine():
    rng = np.random.default_rng(0)
    params = _params(W=rng.normal(size=(3, 4)), b=rng.normal(size=3), x=rng.normal(size=(4, 2)))
    error = grad_check(lambda: sum_(tanh(affine(params["x"], params["W"], params["b"]))), params)
    assert error < 1e-6


def test_grad_check_bilstm():
    rng = np.random.default_rng(1)
    lstm = BiLSTMParams.init(3, 2, rng, 0.5)
    params = ParamSet()
    for name, t in lstm.named_tensors().items():
        params.add(name, t)
    params.add("x", Tensor(rng.normal(size=(3, 4))))
    weights = Tensor(rng.normal(size=(4, 4)))
    error = grad_check(lambda: sum_(mul(bilstm(params["x"], lstm), weights)), params, atol=1e-9)
    assert error < 1e-4


def test_grad_check_composite_ops():
    rng = np.random.default_rng(2)
    params = _params(A=rng.normal(size=(3, 2)), B=rng.normal(size=(3, 4)))

    def forward():
        E = matmul(transpose(params["A"]), params["B"])
        attended = matmul(params["A"], softmax_col(E))
        stacked = concat_rows([params["B"], attended, abs_(attended)])
        return cross_entropy(maxpool_row(transpose(stacked)), 1)

    assert grad_check(forward, params, atol=1e-9) < 1e-6
