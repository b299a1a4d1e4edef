"""Small define-by-run tensor library.

Tensors hold flat float64 buffers plus a shape tuple. Ops compute eagerly
through the selected kernel backend and, when a Graph is active, record a
backward closure on a tape. ``Graph.backward`` replays the tape in reverse,
accumulating gradients into ``.grad`` buffers.

Only the operations this model needs exist here; there is no broadcasting
beyond the specific patterns the ops document.
"""

import math
from array import array

from ..errors import ContractError, DimensionError, NonFiniteError
from .backend import kernels as K
from .backend import backend_name

__all__ = [
    "Tensor", "Graph", "backend_name", "zeros", "constant", "leaf",
    "nelem", "check_finite", "matmul", "linear", "add", "add_rowvec",
    "mul", "affine", "tanh", "sigmoid", "log", "softmax", "conv1d",
    "embed", "select_t", "stack_t", "add_bt", "dotv", "weighted_sum",
    "concat", "reshape", "nll", "sum_all", "dropout", "int_vec",
    "clip_grad_norm",
]


def nelem(shape):
    n = 1
    for d in shape:
        n *= d
    return n


def _zero_buf(n):
    return array("d", bytes(8 * n))


class Tensor:
    """Flat row-major float64 buffer with a shape."""

    __slots__ = ("shape", "data", "grad", "requires_grad", "name")

    def __init__(self, shape, data=None, requires_grad=False, name=None):
        shape = tuple(shape)
        n = nelem(shape)
        if data is None:
            data = _zero_buf(n)
        elif len(data) != n:
            raise DimensionError(
                "buffer of %d values does not fill shape %r" % (len(data), shape))
        self.shape = shape
        self.data = data
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name

    def ensure_grad(self):
        if self.grad is None:
            self.grad = _zero_buf(nelem(self.shape))
        return self.grad

    def zero_grad(self):
        if self.grad is not None:
            n = nelem(self.shape)
            self.grad = _zero_buf(n)

    def item(self):
        if nelem(self.shape) != 1:
            raise ContractError("item() needs a single-element tensor, got %r"
                                % (self.shape,))
        return self.data[0]

    def tolist(self):
        return list(self.data)

    def __repr__(self):
        return "Tensor(shape=%r, name=%r)" % (self.shape, self.name)


def zeros(shape):
    return Tensor(shape)


def constant(values, shape):
    return Tensor(shape, array("d", values))


def leaf(values, shape, name=None):
    """Trainable parameter tensor."""
    return Tensor(shape, array("d", values), requires_grad=True, name=name)


def int_vec(values):
    """Index buffer for embedding/select/nll ops."""
    return array("q", values)


def check_finite(t, what="tensor"):
    if not K.isfinite_buf(t.data, nelem(t.shape)):
        raise NonFiniteError("%s contains a non-finite value" % what)


# ----- tape -----

_ACTIVE = None


class Graph:
    """Gradient tape. Use as a context manager around the forward pass."""

    def __init__(self):
        self.nodes = []

    def __enter__(self):
        global _ACTIVE
        if _ACTIVE is not None:
            raise ContractError("a Graph is already active; nesting is not supported")
        _ACTIVE = self
        return self

    def __exit__(self, exc_type, exc, tb):
        global _ACTIVE
        _ACTIVE = None
        return False

    def backward(self, loss):
        """Propagate d(loss)/d(x) into .grad of every tensor that fed loss."""
        if nelem(loss.shape) != 1:
            raise ContractError("backward needs a scalar loss, got shape %r"
                                % (loss.shape,))
        loss.ensure_grad()
        loss.grad[0] = 1.0
        for out, bwd in reversed(self.nodes):
            if out.grad is not None:
                bwd()


def _record(out, inputs, bwd):
    g = _ACTIVE
    if g is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        g.nodes.append((out, bwd))
    return out


# ----- ops -----

def matmul(a, b):
    """[m,k] @ [k,n] -> [m,n]."""
    if len(a.shape) != 2 or len(b.shape) != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError("matmul shapes %r @ %r" % (a.shape, b.shape))
    m, k = a.shape
    n = b.shape[1]
    out = Tensor((m, n))
    K.matmul_nn(a.data, b.data, out.data, m, k, n)

    def bwd():
        if a.requires_grad:
            K.matmul_nt_acc(out.grad, b.data, a.ensure_grad(), m, n, k)
        if b.requires_grad:
            K.matmul_tn_acc(a.data, out.grad, b.ensure_grad(), m, k, n)

    return _record(out, (a, b), bwd)


def linear(x, w, b=None):
    """x @ w^T (+ b). w stored (out_features, in_features); x may be 2-D or 3-D."""
    k = x.shape[-1]
    if len(w.shape) != 2 or w.shape[1] != k:
        raise DimensionError("linear: x %r vs w %r" % (x.shape, w.shape))
    n_out = w.shape[0]
    if b is not None and b.shape != (n_out,):
        raise DimensionError("linear: bias %r vs %d outputs" % (b.shape, n_out))
    rows = nelem(x.shape) // k
    out = Tensor(x.shape[:-1] + (n_out,))
    K.matmul_nt(x.data, w.data, out.data, rows, k, n_out)
    if b is not None:
        K.add_bias_rows(out.data, b.data, out.data, rows, n_out)

    def bwd():
        if x.requires_grad:
            K.matmul_nn_acc(out.grad, w.data, x.ensure_grad(), rows, n_out, k)
        if w.requires_grad:
            K.matmul_tn_acc(out.grad, x.data, w.ensure_grad(), rows, n_out, k)
        if b is not None and b.requires_grad:
            K.sum_rows_acc(out.grad, b.ensure_grad(), rows, n_out)

    inputs = (x, w) if b is None else (x, w, b)
    return _record(out, inputs, bwd)


def add(a, b):
    if a.shape != b.shape:
        raise DimensionError("add shapes %r vs %r" % (a.shape, b.shape))
    n = nelem(a.shape)
    out = Tensor(a.shape)
    K.add_v(a.data, b.data, out.data, n)

    def bwd():
        if a.requires_grad:
            K.axpy(1.0, out.grad, a.ensure_grad(), n)
        if b.requires_grad:
            K.axpy(1.0, out.grad, b.ensure_grad(), n)

    return _record(out, (a, b), bwd)


def add_rowvec(x, bias):
    """x[..., n] + bias[n], bias repeated over leading rows."""
    n = x.shape[-1]
    if bias.shape != (n,):
        raise DimensionError("add_rowvec: %r + %r" % (x.shape, bias.shape))
    rows = nelem(x.shape) // n
    out = Tensor(x.shape)
    K.add_bias_rows(x.data, bias.data, out.data, rows, n)

    def bwd():
        if x.requires_grad:
            K.axpy(1.0, out.grad, x.ensure_grad(), rows * n)
        if bias.requires_grad:
            K.sum_rows_acc(out.grad, bias.ensure_grad(), rows, n)

    return _record(out, (x, bias), bwd)


def mul(a, b):
    if a.shape != b.shape:
        raise DimensionError("mul shapes %r vs %r" % (a.shape, b.shape))
    n = nelem(a.shape)
    out = Tensor(a.shape)
    K.mul_v(a.data, b.data, out.data, n)

    def bwd():
        if a.requires_grad:
            K.mul_acc(out.grad, b.data, a.ensure_grad(), n)
        if b.requires_grad:
            K.mul_acc(out.grad, a.data, b.ensure_grad(), n)

    return _record(out, (a, b), bwd)


def affine(x, alpha, beta=0.0):
    """alpha * x + beta, scalars."""
    n = nelem(x.shape)
    out = Tensor(x.shape)
    K.axpb_v(x.data, alpha, beta, out.data, n)

    def bwd():
        if x.requires_grad:
            K.axpy(alpha, out.grad, x.ensure_grad(), n)

    return _record(out, (x,), bwd)


def tanh(x):
    n = nelem(x.shape)
    out = Tensor(x.shape)
    K.tanh_v(x.data, out.data, n)

    def bwd():
        if x.requires_grad:
            K.dtanh_acc(out.data, out.grad, x.ensure_grad(), n)

    return _record(out, (x,), bwd)


def sigmoid(x):
    n = nelem(x.shape)
    out = Tensor(x.shape)
    K.sigmoid_v(x.data, out.data, n)

    def bwd():
        if x.requires_grad:
            K.dsigmoid_acc(out.data, out.grad, x.ensure_grad(), n)

    return _record(out, (x,), bwd)


def log(x):
    """Natural log; caller guarantees strictly positive input."""
    n = nelem(x.shape)
    out = Tensor(x.shape)
    K.log_v(x.data, out.data, n)

    def bwd():
        if x.requires_grad:
            K.dlog_acc(x.data, out.grad, x.ensure_grad(), n)

    return _record(out, (x,), bwd)


def softmax(x):
    """Softmax over the last axis, numerically stabilised per row."""
    n = x.shape[-1]
    rows = nelem(x.shape) // n
    out = Tensor(x.shape)
    K.softmax_rows(x.data, out.data, rows, n)

    def bwd():
        if x.requires_grad:
            K.softmax_rows_bwd_acc(out.data, out.grad, x.ensure_grad(), rows, n)

    return _record(out, (x,), bwd)


def conv1d(g, f, stride=1):
    """Temporal convolution.

    g: [B, l, e] input sequence, f: [F, k, e] filters. Output [B, y, F] with
    y = floor((l - k + 1) / stride); out[b, y, f] sums f[f, x, :].g[b, y*stride
    + k - 1 - x, :] over tap x, so a unit-impulse input reads the filter taps
    in reverse.
    """
    if len(g.shape) != 3 or len(f.shape) != 3 or g.shape[2] != f.shape[2]:
        raise DimensionError("conv1d shapes %r, %r" % (g.shape, f.shape))
    B, l, e = g.shape
    F, k, _ = f.shape
    if k > l:
        raise DimensionError("filter width %d exceeds sequence length %d" % (k, l))
    if stride < 1:
        raise DimensionError("stride must be >= 1, got %d" % stride)
    y_len = (l - k + 1) // stride
    out = Tensor((B, y_len, F))
    K.conv1d_fwd(g.data, f.data, out.data, B, l, e, F, k, stride)

    def bwd():
        if g.requires_grad:
            K.conv1d_bwd_g(f.data, out.grad, g.ensure_grad(), B, l, e, F, k, stride)
        if f.requires_grad:
            K.conv1d_bwd_f(g.data, out.grad, f.ensure_grad(), B, l, e, F, k, stride)

    return _record(out, (g, f), bwd)


def embed(table, ids, lead_shape):
    """Row lookup: out[..., :] = table[ids[...], :]."""
    n_ids = nelem(lead_shape)
    if len(ids) != n_ids:
        raise DimensionError("%d ids do not fill shape %r" % (len(ids), lead_shape))
    rows, d = table.shape
    for i in ids:
        if i < 0 or i >= rows:
            raise DimensionError("embedding id %d out of range [0,%d)" % (i, rows))
    out = Tensor(tuple(lead_shape) + (d,))
    K.embed_fwd(table.data, ids, out.data, n_ids, d)

    def bwd():
        if table.requires_grad:
            K.embed_bwd_acc(out.grad, ids, table.ensure_grad(), n_ids, d)

    return _record(out, (table,), bwd)


def select_t(x, t):
    """x[:, t, :] of a [B, T, e] tensor."""
    if len(x.shape) != 3:
        raise DimensionError("select_t needs rank 3, got %r" % (x.shape,))
    B, T, e = x.shape
    if not 0 <= t < T:
        raise DimensionError("t=%d outside [0,%d)" % (t, T))
    out = Tensor((B, e))
    K.select_t(x.data, t, out.data, B, T, e)

    def bwd():
        if x.requires_grad:
            K.scatter_t_acc(out.grad, x.ensure_grad(), t, B, T, e)

    return _record(out, (x,), bwd)


def stack_t(parts):
    """Stack T tensors of shape [B, e] into [B, T, e]."""
    if not parts:
        raise DimensionError("stack_t of nothing")
    B, e = parts[0].shape
    T = len(parts)
    for p in parts:
        if p.shape != (B, e):
            raise DimensionError("stack_t mixes shapes %r and %r" % ((B, e), p.shape))
    out = Tensor((B, T, e))
    for t, p in enumerate(parts):
        K.place_t(p.data, out.data, t, B, T, e)

    def bwd():
        for t, p in enumerate(parts):
            if p.requires_grad:
                K.gather_t_acc(out.grad, t, p.ensure_grad(), B, T, e)

    return _record(out, tuple(parts), bwd)


def add_bt(k_seq, q):
    """k_seq[B,T,S] + q[B,S] broadcast over T."""
    if len(k_seq.shape) != 3 or q.shape != (k_seq.shape[0], k_seq.shape[2]):
        raise DimensionError("add_bt shapes %r + %r" % (k_seq.shape, q.shape))
    B, T, S = k_seq.shape
    out = Tensor((B, T, S))
    K.add_bt_fwd(k_seq.data, q.data, out.data, B, T, S)

    def bwd():
        if k_seq.requires_grad:
            K.axpy(1.0, out.grad, k_seq.ensure_grad(), B * T * S)
        if q.requires_grad:
            K.add_bt_bwd_q_acc(out.grad, q.ensure_grad(), B, T, S)

    return _record(out, (k_seq, q), bwd)


def dotv(x, v):
    """Per-position dot with a shared vector: [B,T,S].[S] -> [B,T]."""
    if len(x.shape) != 3 or v.shape != (x.shape[2],):
        raise DimensionError("dotv shapes %r . %r" % (x.shape, v.shape))
    B, T, S = x.shape
    out = Tensor((B, T))
    K.dotv_fwd(x.data, v.data, out.data, B, T, S)

    def bwd():
        if x.requires_grad:
            K.dotv_bwd_x_acc(out.grad, v.data, x.ensure_grad(), B, T, S)
        if v.requires_grad:
            K.dotv_bwd_v_acc(out.grad, x.data, v.ensure_grad(), B, T, S)

    return _record(out, (x, v), bwd)


def weighted_sum(alpha, h):
    """Attention pooling: sum_t alpha[b,t] * h[b,t,:] -> [B,H]."""
    if len(h.shape) != 3 or alpha.shape != h.shape[:2]:
        raise DimensionError("weighted_sum shapes %r, %r" % (alpha.shape, h.shape))
    B, T, Hd = h.shape
    out = Tensor((B, Hd))
    K.wsum_fwd(alpha.data, h.data, out.data, B, T, Hd)

    def bwd():
        if alpha.requires_grad:
            K.wsum_bwd_alpha_acc(out.grad, h.data, alpha.ensure_grad(), B, T, Hd)
        if h.requires_grad:
            K.wsum_bwd_h_acc(out.grad, alpha.data, h.ensure_grad(), B, T, Hd)

    return _record(out, (alpha, h), bwd)


def concat(a, b):
    """Concatenate two tensors along the last axis; leading dims must match."""
    if a.shape[:-1] != b.shape[:-1]:
        raise DimensionError("concat shapes %r | %r" % (a.shape, b.shape))
    na, nb = a.shape[-1], b.shape[-1]
    rows = nelem(a.shape) // na
    out = Tensor(a.shape[:-1] + (na + nb,))
    K.concat_cols(a.data, b.data, out.data, rows, na, nb)

    def bwd():
        ga = a.ensure_grad() if a.requires_grad else _zero_buf(nelem(a.shape))
        gb = b.ensure_grad() if b.requires_grad else _zero_buf(nelem(b.shape))
        K.split_cols_acc(out.grad, ga, gb, rows, na, nb)

    return _record(out, (a, b), bwd)


def reshape(x, new_shape):
    """View with a different shape; shares the data buffer."""
    new_shape = tuple(new_shape)
    if nelem(new_shape) != nelem(x.shape):
        raise DimensionError("reshape %r -> %r" % (x.shape, new_shape))
    out = Tensor(new_shape, x.data)

    def bwd():
        if x.requires_grad:
            K.axpy(1.0, out.grad, x.ensure_grad(), nelem(new_shape))

    return _record(out, (x,), bwd)


def nll(probs, ids, mask):
    """Per-row negative log likelihood: -mask[b] * log(probs[b, ids[b]])."""
    if len(probs.shape) != 2:
        raise DimensionError("nll needs [B,V] probabilities, got %r" % (probs.shape,))
    B, V = probs.shape
    if len(ids) != B or mask.shape != (B,):
        raise DimensionError("nll: %d rows vs %d ids" % (B, len(ids)))
    out = Tensor((B,))
    K.nll_fwd(probs.data, ids, mask.data, out.data, B, V)

    def bwd():
        if probs.requires_grad:
            K.nll_bwd_acc(probs.data, ids, mask.data, out.grad,
                          probs.ensure_grad(), B, V)

    return _record(out, (probs,), bwd)


def sum_all(x):
    """Sum of every element, as a scalar tensor."""
    n = nelem(x.shape)
    out = Tensor(())
    out.data[0] = K.sum_all(x.data, n)

    def bwd():
        if x.requires_grad:
            K.axpy_scalar(out.grad[0], x.ensure_grad(), n)

    return _record(out, (x,), bwd)


def dropout(x, rate, rng, training):
    """Inverted dropout; identity when not training or rate is 0."""
    if not training or rate == 0.0:
        return x
    if not 0.0 <= rate < 1.0:
        raise ContractError("dropout rate must be in [0,1), got %r" % rate)
    keep = 1.0 - rate
    inv = 1.0 / keep
    n = nelem(x.shape)
    mask = Tensor(x.shape, array(
        "d", (inv if rng.random() >= rate else 0.0 for _ in range(n))))
    return mul(x, mask)


def clip_grad_norm(params, max_norm):
    """Scale every gradient in place so the global L2 norm is <= max_norm."""
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += K.sumsq(p.grad, nelem(p.shape))
    norm = math.sqrt(total)
    if norm > max_norm and norm > 0.0:
        factor = max_norm / norm
        for p in params:
            if p.grad is not None:
                K.scale_v(p.grad, factor, nelem(p.shape))
    return norm
