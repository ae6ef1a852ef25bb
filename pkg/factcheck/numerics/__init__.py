from factcheck.numerics.gradcheck import grad_check
from factcheck.numerics.lstm import BiLSTMParams, LSTMDirection, bilstm, init_uniform
from factcheck.numerics.ops import (
    abs_,
    add,
    affine,
    concat_rows,
    cross_entropy,
    gather_columns,
    matmul,
    maxpool_row,
    mul,
    relu,
    sigmoid,
    softmax,
    softmax_col,
    sub,
    sum_,
    tanh,
    transpose,
)
from factcheck.numerics.optim import ParamSet, ParamState, adam_step
from factcheck.numerics.tensor import Tape, Tensor, active_tape, backward
