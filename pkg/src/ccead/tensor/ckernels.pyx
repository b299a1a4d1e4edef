# cython: language_level=3
"""Compiled kernels.

Mirror of ``pykernels.py``: same function names, same signatures, same
floating-point operation order. Compiled without -ffast-math so results
match the pure backend bit for bit. Forward kernels overwrite their output
buffer; backward kernels accumulate into the gradient buffer.
"""

from libc.math cimport exp, log, tanh as ctanh, sqrt, pow as cpow, isfinite


# ----- elementwise -----

def add_v(double[:] a, double[:] b, double[:] out, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = a[i] + b[i]


def mul_v(double[:] a, double[:] b, double[:] out, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = a[i] * b[i]


def mul_acc(double[:] g, double[:] b, double[:] ga, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        ga[i] += g[i] * b[i]


def axpb_v(double[:] a, double alpha, double beta, double[:] out, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = alpha * a[i] + beta


def axpy(double alpha, double[:] x, double[:] y, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        y[i] += alpha * x[i]


def axpy_scalar(double g, double[:] y, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        y[i] += g


def scale_v(double[:] x, double alpha, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        x[i] *= alpha


def tanh_v(double[:] x, double[:] out, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = ctanh(x[i])


def dtanh_acc(double[:] y, double[:] g, double[:] gx, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        gx[i] += g[i] * (1.0 - y[i] * y[i])


def sigmoid_v(double[:] x, double[:] out, Py_ssize_t n):
    # branch on sign so exp never overflows
    cdef Py_ssize_t i
    cdef double v, e
    for i in range(n):
        v = x[i]
        if v >= 0.0:
            out[i] = 1.0 / (1.0 + exp(-v))
        else:
            e = exp(v)
            out[i] = e / (1.0 + e)


def dsigmoid_acc(double[:] y, double[:] g, double[:] gx, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        gx[i] += g[i] * y[i] * (1.0 - y[i])


def log_v(double[:] x, double[:] out, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = log(x[i])


def dlog_acc(double[:] x, double[:] g, double[:] gx, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        gx[i] += g[i] / x[i]


# ----- reductions / bias -----

def add_bias_rows(double[:] x, double[:] bias, double[:] out,
                  Py_ssize_t rows, Py_ssize_t n):
    cdef Py_ssize_t r, j, base
    for r in range(rows):
        base = r * n
        for j in range(n):
            out[base + j] = x[base + j] + bias[j]


def sum_rows_acc(double[:] g, double[:] out, Py_ssize_t rows, Py_ssize_t n):
    cdef Py_ssize_t r, j, base
    for r in range(rows):
        base = r * n
        for j in range(n):
            out[j] += g[base + j]


def sum_all(double[:] x, Py_ssize_t n):
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        s += x[i]
    return s


def sumsq(double[:] x, Py_ssize_t n):
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        s += x[i] * x[i]
    return s


def isfinite_buf(double[:] x, Py_ssize_t n):
    cdef Py_ssize_t i
    for i in range(n):
        if not isfinite(x[i]):
            return False
    return True


# ----- matmul family -----

def matmul_nn(double[:] a, double[:] b, double[:] out,
              Py_ssize_t m, Py_ssize_t k, Py_ssize_t n):
    # out[m,n] = a[m,k] @ b[k,n]; i-p-j order, out zeroed row by row
    cdef Py_ssize_t i, j, p, ob, ab, bb
    cdef double av
    for i in range(m):
        ob = i * n
        for j in range(n):
            out[ob + j] = 0.0
        ab = i * k
        for p in range(k):
            av = a[ab + p]
            bb = p * n
            for j in range(n):
                out[ob + j] += av * b[bb + j]


def matmul_nt(double[:] a, double[:] b, double[:] out,
              Py_ssize_t m, Py_ssize_t k, Py_ssize_t n):
    # out[m,n] = a[m,k] @ b[n,k]^T
    cdef Py_ssize_t i, j, p, ab, ob, bb
    cdef double s
    for i in range(m):
        ab = i * k
        ob = i * n
        for j in range(n):
            bb = j * k
            s = 0.0
            for p in range(k):
                s += a[ab + p] * b[bb + p]
            out[ob + j] = s


def matmul_nn_acc(double[:] a, double[:] b, double[:] out,
                  Py_ssize_t m, Py_ssize_t k, Py_ssize_t n):
    cdef Py_ssize_t i, j, p, ob, ab, bb
    cdef double av
    for i in range(m):
        ob = i * n
        ab = i * k
        for p in range(k):
            av = a[ab + p]
            bb = p * n
            for j in range(n):
                out[ob + j] += av * b[bb + j]


def matmul_nt_acc(double[:] a, double[:] b, double[:] out,
                  Py_ssize_t m, Py_ssize_t k, Py_ssize_t n):
    cdef Py_ssize_t i, j, p, ab, ob, bb
    cdef double s
    for i in range(m):
        ab = i * k
        ob = i * n
        for j in range(n):
            bb = j * k
            s = 0.0
            for p in range(k):
                s += a[ab + p] * b[bb + p]
            out[ob + j] += s


def matmul_tn_acc(double[:] a, double[:] b, double[:] out,
                  Py_ssize_t m, Py_ssize_t k, Py_ssize_t n):
    # out[k,n] += a[m,k]^T @ b[m,n]; rank-1 updates per row of a/b
    cdef Py_ssize_t i, j, p, ab, bb, obase
    cdef double av
    for i in range(m):
        ab = i * k
        bb = i * n
        for p in range(k):
            av = a[ab + p]
            obase = p * n
            for j in range(n):
                out[obase + j] += av * b[bb + j]


# ----- softmax -----

def softmax_rows(double[:] x, double[:] out, Py_ssize_t rows, Py_ssize_t n):
    cdef Py_ssize_t r, j, base
    cdef double mx, s, e, inv
    for r in range(rows):
        base = r * n
        mx = x[base]
        for j in range(1, n):
            if x[base + j] > mx:
                mx = x[base + j]
        s = 0.0
        for j in range(n):
            e = exp(x[base + j] - mx)
            out[base + j] = e
            s += e
        inv = 1.0 / s
        for j in range(n):
            out[base + j] *= inv


def softmax_rows_bwd_acc(double[:] y, double[:] g, double[:] gx,
                         Py_ssize_t rows, Py_ssize_t n):
    # gx += y * (g - sum_j g_j y_j) per row
    cdef Py_ssize_t r, j, base
    cdef double dot
    for r in range(rows):
        base = r * n
        dot = 0.0
        for j in range(n):
            dot += g[base + j] * y[base + j]
        for j in range(n):
            gx[base + j] += y[base + j] * (g[base + j] - dot)


# ----- temporal convolution -----
# out[b,y,f] = sum_{x=0..k-1} sum_{ch} fw[f,x,ch] * g[b, y*d + k-1-x, ch]

def conv1d_fwd(double[:] g, double[:] fw, double[:] out,
               Py_ssize_t B, Py_ssize_t l, Py_ssize_t e,
               Py_ssize_t F, Py_ssize_t k, Py_ssize_t d):
    cdef Py_ssize_t y_len = (l - k + 1) // d
    cdef Py_ssize_t b, y, f, x, ch, gb, ob, fb, gi, fi
    cdef double s
    for b in range(B):
        gb = b * l * e
        ob = b * y_len * F
        for y in range(y_len):
            for f in range(F):
                s = 0.0
                fb = f * k * e
                for x in range(k):
                    gi = gb + (y * d + k - 1 - x) * e
                    fi = fb + x * e
                    for ch in range(e):
                        s += fw[fi + ch] * g[gi + ch]
                out[ob + y * F + f] = s


def conv1d_bwd_g(double[:] fw, double[:] gout, double[:] gg,
                 Py_ssize_t B, Py_ssize_t l, Py_ssize_t e,
                 Py_ssize_t F, Py_ssize_t k, Py_ssize_t d):
    cdef Py_ssize_t y_len = (l - k + 1) // d
    cdef Py_ssize_t b, y, f, x, ch, gb, ob, fb, gi, fi
    cdef double go
    for b in range(B):
        gb = b * l * e
        ob = b * y_len * F
        for y in range(y_len):
            for f in range(F):
                go = gout[ob + y * F + f]
                fb = f * k * e
                for x in range(k):
                    gi = gb + (y * d + k - 1 - x) * e
                    fi = fb + x * e
                    for ch in range(e):
                        gg[gi + ch] += go * fw[fi + ch]


def conv1d_bwd_f(double[:] g, double[:] gout, double[:] gf,
                 Py_ssize_t B, Py_ssize_t l, Py_ssize_t e,
                 Py_ssize_t F, Py_ssize_t k, Py_ssize_t d):
    cdef Py_ssize_t y_len = (l - k + 1) // d
    cdef Py_ssize_t b, y, f, x, ch, gb, ob, fb, gi, fi
    cdef double go
    for b in range(B):
        gb = b * l * e
        ob = b * y_len * F
        for y in range(y_len):
            for f in range(F):
                go = gout[ob + y * F + f]
                fb = f * k * e
                for x in range(k):
                    gi = gb + (y * d + k - 1 - x) * e
                    fi = fb + x * e
                    for ch in range(e):
                        gf[fi + ch] += go * g[gi + ch]


# ----- embedding -----

def embed_fwd(double[:] E, long long[:] ids, double[:] out,
              Py_ssize_t n_ids, Py_ssize_t d):
    cdef Py_ssize_t i, j, eb, ob
    for i in range(n_ids):
        eb = ids[i] * d
        ob = i * d
        for j in range(d):
            out[ob + j] = E[eb + j]


def embed_bwd_acc(double[:] gout, long long[:] ids, double[:] gE,
                  Py_ssize_t n_ids, Py_ssize_t d):
    cdef Py_ssize_t i, j, eb, ob
    for i in range(n_ids):
        eb = ids[i] * d
        ob = i * d
        for j in range(d):
            gE[eb + j] += gout[ob + j]


# ----- attention helpers -----

def add_bt_fwd(double[:] K, double[:] q, double[:] out,
               Py_ssize_t B, Py_ssize_t T, Py_ssize_t S):
    # out[b,t,:] = K[b,t,:] + q[b,:]
    cdef Py_ssize_t b, t, s, qb, base
    for b in range(B):
        qb = b * S
        for t in range(T):
            base = (b * T + t) * S
            for s in range(S):
                out[base + s] = K[base + s] + q[qb + s]


def add_bt_bwd_q_acc(double[:] gout, double[:] gq,
                     Py_ssize_t B, Py_ssize_t T, Py_ssize_t S):
    cdef Py_ssize_t b, t, s, qb, base
    for b in range(B):
        qb = b * S
        for t in range(T):
            base = (b * T + t) * S
            for s in range(S):
                gq[qb + s] += gout[base + s]


def dotv_fwd(double[:] X, double[:] v, double[:] out,
             Py_ssize_t B, Py_ssize_t T, Py_ssize_t S):
    # out[b,t] = X[b,t,:] . v
    cdef Py_ssize_t b, t, j, base
    cdef double s
    for b in range(B):
        for t in range(T):
            base = (b * T + t) * S
            s = 0.0
            for j in range(S):
                s += X[base + j] * v[j]
            out[b * T + t] = s


def dotv_bwd_x_acc(double[:] gout, double[:] v, double[:] gX,
                   Py_ssize_t B, Py_ssize_t T, Py_ssize_t S):
    cdef Py_ssize_t b, t, j, base
    cdef double go
    for b in range(B):
        for t in range(T):
            base = (b * T + t) * S
            go = gout[b * T + t]
            for j in range(S):
                gX[base + j] += go * v[j]


def dotv_bwd_v_acc(double[:] gout, double[:] X, double[:] gv,
                   Py_ssize_t B, Py_ssize_t T, Py_ssize_t S):
    cdef Py_ssize_t b, t, j, base
    cdef double go
    for b in range(B):
        for t in range(T):
            base = (b * T + t) * S
            go = gout[b * T + t]
            for j in range(S):
                gv[j] += go * X[base + j]


def wsum_fwd(double[:] alpha, double[:] H, double[:] out,
             Py_ssize_t B, Py_ssize_t T, Py_ssize_t Hd):
    # out[b,:] = sum_t alpha[b,t] * H[b,t,:]
    cdef Py_ssize_t b, t, j, ob, hb
    cdef double av
    for b in range(B):
        ob = b * Hd
        for j in range(Hd):
            out[ob + j] = 0.0
        for t in range(T):
            av = alpha[b * T + t]
            hb = (b * T + t) * Hd
            for j in range(Hd):
                out[ob + j] += av * H[hb + j]


def wsum_bwd_alpha_acc(double[:] gout, double[:] H, double[:] galpha,
                       Py_ssize_t B, Py_ssize_t T, Py_ssize_t Hd):
    cdef Py_ssize_t b, t, j, ob, hb
    cdef double s
    for b in range(B):
        ob = b * Hd
        for t in range(T):
            hb = (b * T + t) * Hd
            s = 0.0
            for j in range(Hd):
                s += gout[ob + j] * H[hb + j]
            galpha[b * T + t] += s


def wsum_bwd_h_acc(double[:] gout, double[:] alpha, double[:] gH,
                   Py_ssize_t B, Py_ssize_t T, Py_ssize_t Hd):
    cdef Py_ssize_t b, t, j, ob, hb
    cdef double av
    for b in range(B):
        ob = b * Hd
        for t in range(T):
            av = alpha[b * T + t]
            hb = (b * T + t) * Hd
            for j in range(Hd):
                gH[hb + j] += av * gout[ob + j]


# ----- masked NLL -----

def nll_fwd(double[:] probs, long long[:] ids, double[:] mask, double[:] out,
            Py_ssize_t B, Py_ssize_t V):
    cdef Py_ssize_t b
    for b in range(B):
        out[b] = -log(probs[b * V + ids[b]]) * mask[b]


def nll_bwd_acc(double[:] probs, long long[:] ids, double[:] mask,
                double[:] gout, double[:] gprobs, Py_ssize_t B, Py_ssize_t V):
    cdef Py_ssize_t b, idx
    for b in range(B):
        idx = b * V + ids[b]
        gprobs[idx] += -mask[b] * gout[b] / probs[idx]


# ----- slicing / stacking along the middle axis -----

def select_t(double[:] X, Py_ssize_t t, double[:] out,
             Py_ssize_t B, Py_ssize_t T, Py_ssize_t e):
    cdef Py_ssize_t b, j, base, ob
    for b in range(B):
        base = (b * T + t) * e
        ob = b * e
        for j in range(e):
            out[ob + j] = X[base + j]


def scatter_t_acc(double[:] g2, double[:] gX, Py_ssize_t t,
                  Py_ssize_t B, Py_ssize_t T, Py_ssize_t e):
    # gX[b,t,:] += g2[b,:]
    cdef Py_ssize_t b, j, base, gb
    for b in range(B):
        base = (b * T + t) * e
        gb = b * e
        for j in range(e):
            gX[base + j] += g2[gb + j]


def place_t(double[:] src, double[:] X, Py_ssize_t t,
            Py_ssize_t B, Py_ssize_t T, Py_ssize_t e):
    # X[b,t,:] = src[b,:]
    cdef Py_ssize_t b, j, base, sb
    for b in range(B):
        base = (b * T + t) * e
        sb = b * e
        for j in range(e):
            X[base + j] = src[sb + j]


def gather_t_acc(double[:] gX, Py_ssize_t t, double[:] g2,
                 Py_ssize_t B, Py_ssize_t T, Py_ssize_t e):
    # g2[b,:] += gX[b,t,:]
    cdef Py_ssize_t b, j, base, gb
    for b in range(B):
        base = (b * T + t) * e
        gb = b * e
        for j in range(e):
            g2[gb + j] += gX[base + j]


# ----- concat of trailing columns -----

def concat_cols(double[:] a, double[:] b, double[:] out,
                Py_ssize_t rows, Py_ssize_t na, Py_ssize_t nb):
    cdef Py_ssize_t n = na + nb
    cdef Py_ssize_t r, j, ab, bb, ob
    for r in range(rows):
        ab = r * na
        bb = r * nb
        ob = r * n
        for j in range(na):
            out[ob + j] = a[ab + j]
        for j in range(nb):
            out[ob + na + j] = b[bb + j]


def split_cols_acc(double[:] gout, double[:] ga, double[:] gb,
                   Py_ssize_t rows, Py_ssize_t na, Py_ssize_t nb):
    cdef Py_ssize_t n = na + nb
    cdef Py_ssize_t r, j, ab, bb, ob
    for r in range(rows):
        ab = r * na
        bb = r * nb
        ob = r * n
        for j in range(na):
            ga[ab + j] += gout[ob + j]
        for j in range(nb):
            gb[bb + j] += gout[ob + na + j]


# ----- optimizer -----

def adam_update(double[:] param, double[:] grad, double[:] m, double[:] v,
                Py_ssize_t n, Py_ssize_t t, double lr, double b1, double b2,
                double eps):
    # standard bias-corrected update, in place
    cdef double c1 = 1.0 - cpow(b1, <double> t)
    cdef double c2 = 1.0 - cpow(b2, <double> t)
    cdef Py_ssize_t i
    cdef double g, mhat, vhat
    for i in range(n):
        g = grad[i]
        m[i] = b1 * m[i] + (1.0 - b1) * g
        v[i] = b2 * v[i] + (1.0 - b2) * g * g
        mhat = m[i] / c1
        vhat = v[i] / c2
        param[i] -= lr * mhat / (sqrt(vhat) + eps)
