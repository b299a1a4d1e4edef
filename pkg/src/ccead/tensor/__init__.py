"""Tensor core: flat float64 buffers, a gradient tape, and twin kernel
backends (compiled extension with a pure-Python fallback)."""

from .core import (
    Graph,
    Tensor,
    add,
    add_bt,
    add_rowvec,
    affine,
    backend_name,
    check_finite,
    clip_grad_norm,
    concat,
    constant,
    conv1d,
    dotv,
    dropout,
    embed,
    int_vec,
    leaf,
    linear,
    log,
    matmul,
    mul,
    nelem,
    nll,
    reshape,
    select_t,
    softmax,
    stack_t,
    sum_all,
    tanh,
    sigmoid,
    weighted_sum,
    zeros,
)

__all__ = [
    "Graph", "Tensor", "add", "add_bt", "add_rowvec", "affine",
    "backend_name", "check_finite", "clip_grad_norm", "concat", "constant",
    "conv1d", "dotv", "dropout", "embed", "int_vec", "leaf", "linear",
    "log", "matmul", "mul", "nelem", "nll", "reshape", "select_t",
    "softmax", "stack_t", "sum_all", "tanh", "sigmoid", "weighted_sum",
    "zeros",
]
