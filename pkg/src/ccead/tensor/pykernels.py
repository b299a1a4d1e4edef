"""Pure-Python kernel fallback.

Every function here has a compiled twin in ``ckernels.pyx`` with the same
signature and, crucially, the same floating-point operation order, so the
two backends produce bitwise-identical results. Buffers are flat
``array('d')`` (row-major) and ``array('q')`` for integer ids; callers own
all shape bookkeeping.

Forward kernels overwrite their output buffer; backward kernels accumulate
(+=) into the gradient buffer they are given.
"""

import math


# ----- elementwise -----

def add_v(a, b, out, n):
    for i in range(n):
        out[i] = a[i] + b[i]


def mul_v(a, b, out, n):
    for i in range(n):
        out[i] = a[i] * b[i]


def mul_acc(g, b, ga, n):
    for i in range(n):
        ga[i] += g[i] * b[i]


def axpb_v(a, alpha, beta, out, n):
    for i in range(n):
        out[i] = alpha * a[i] + beta


def axpy(alpha, x, y, n):
    for i in range(n):
        y[i] += alpha * x[i]


def axpy_scalar(g, y, n):
    for i in range(n):
        y[i] += g


def scale_v(x, alpha, n):
    for i in range(n):
        x[i] *= alpha


def tanh_v(x, out, n):
    for i in range(n):
        out[i] = math.tanh(x[i])


def dtanh_acc(y, g, gx, n):
    for i in range(n):
        gx[i] += g[i] * (1.0 - y[i] * y[i])


def sigmoid_v(x, out, n):
    # branch on sign so exp never overflows
    for i in range(n):
        v = x[i]
        if v >= 0.0:
            out[i] = 1.0 / (1.0 + math.exp(-v))
        else:
            e = math.exp(v)
            out[i] = e / (1.0 + e)


def dsigmoid_acc(y, g, gx, n):
    for i in range(n):
        gx[i] += g[i] * y[i] * (1.0 - y[i])


def log_v(x, out, n):
    for i in range(n):
        out[i] = math.log(x[i])


def dlog_acc(x, g, gx, n):
    for i in range(n):
        gx[i] += g[i] / x[i]


# ----- reductions / bias -----

def add_bias_rows(x, bias, out, rows, n):
    for r in range(rows):
        base = r * n
        for j in range(n):
            out[base + j] = x[base + j] + bias[j]


def sum_rows_acc(g, out, rows, n):
    for r in range(rows):
        base = r * n
        for j in range(n):
            out[j] += g[base + j]


def sum_all(x, n):
    s = 0.0
    for i in range(n):
        s += x[i]
    return s


def sumsq(x, n):
    s = 0.0
    for i in range(n):
        s += x[i] * x[i]
    return s


def isfinite_buf(x, n):
    for i in range(n):
        if not math.isfinite(x[i]):
            return False
    return True


# ----- matmul family -----

def matmul_nn(a, b, out, m, k, n):
    # out[m,n] = a[m,k] @ b[k,n]; i-p-j order, out zeroed row by row
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


def matmul_nt(a, b, out, m, k, n):
    # out[m,n] = a[m,k] @ b[n,k]^T
    for i in range(m):
        ab = i * k
        ob = i * n
        for j in range(n):
            bb = j * k
            s = 0.0
            for p in range(k):
                s += a[ab + p] * b[bb + p]
            out[ob + j] = s


def matmul_nn_acc(a, b, out, m, k, n):
    for i in range(m):
        ob = i * n
        ab = i * k
        for p in range(k):
            av = a[ab + p]
            bb = p * n
            for j in range(n):
                out[ob + j] += av * b[bb + j]


def matmul_nt_acc(a, b, out, m, k, n):
    for i in range(m):
        ab = i * k
        ob = i * n
        for j in range(n):
            bb = j * k
            s = 0.0
            for p in range(k):
                s += a[ab + p] * b[bb + p]
            out[ob + j] += s


def matmul_tn_acc(a, b, out, m, k, n):
    # out[k,n] += a[m,k]^T @ b[m,n]; rank-1 updates per row of a/b
    for i in range(m):
        ab = i * k
        bb = i * n
        for p in range(k):
            av = a[ab + p]
            obase = p * n
            for j in range(n):
                out[obase + j] += av * b[bb + j]


# ----- softmax -----

def softmax_rows(x, out, rows, n):
    for r in range(rows):
        base = r * n
        mx = x[base]
        for j in range(1, n):
            if x[base + j] > mx:
                mx = x[base + j]
        s = 0.0
        for j in range(n):
            e = math.exp(x[base + j] - mx)
            out[base + j] = e
            s += e
        inv = 1.0 / s
        for j in range(n):
            out[base + j] *= inv


def softmax_rows_bwd_acc(y, g, gx, rows, n):
    # gx += y * (g - sum_j g_j y_j) per row
    for r in range(rows):
        base = r * n
        dot = 0.0
        for j in range(n):
            dot += g[base + j] * y[base + j]
        for j in range(n):
            gx[base + j] += y[base + j] * (g[base + j] - dot)


# ----- temporal convolution -----
# out[b,y,f] = sum_{x=0..k-1} sum_{ch} fw[f,x,ch] * g[b, y*d + k-1-x, ch]

def conv1d_fwd(g, fw, out, B, l, e, F, k, d):
    y_len = (l - k + 1) // d
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


def conv1d_bwd_g(fw, gout, gg, B, l, e, F, k, d):
    y_len = (l - k + 1) // d
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


def conv1d_bwd_f(g, gout, gf, B, l, e, F, k, d):
    y_len = (l - k + 1) // d
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

def embed_fwd(E, ids, out, n_ids, d):
    for i in range(n_ids):
        eb = ids[i] * d
        ob = i * d
        for j in range(d):
            out[ob + j] = E[eb + j]


def embed_bwd_acc(gout, ids, gE, n_ids, d):
    for i in range(n_ids):
        eb = ids[i] * d
        ob = i * d
        for j in range(d):
            gE[eb + j] += gout[ob + j]


# ----- attention helpers -----

def add_bt_fwd(K, q, out, B, T, S):
    # out[b,t,:] = K[b,t,:] + q[b,:]
    for b in range(B):
        qb = b * S
        for t in range(T):
            base = (b * T + t) * S
            for s in range(S):
                out[base + s] = K[base + s] + q[qb + s]


def add_bt_bwd_q_acc(gout, gq, B, T, S):
    for b in range(B):
        qb = b * S
        for t in range(T):
            base = (b * T + t) * S
            for s in range(S):
                gq[qb + s] += gout[base + s]


def dotv_fwd(X, v, out, B, T, S):
    # out[b,t] = X[b,t,:] . v
    for b in range(B):
        for t in range(T):
            base = (b * T + t) * S
            s = 0.0
            for j in range(S):
                s += X[base + j] * v[j]
            out[b * T + t] = s


def dotv_bwd_x_acc(gout, v, gX, B, T, S):
    for b in range(B):
        for t in range(T):
            base = (b * T + t) * S
            go = gout[b * T + t]
            for j in range(S):
                gX[base + j] += go * v[j]


def dotv_bwd_v_acc(gout, X, gv, B, T, S):
    for b in range(B):
        for t in range(T):
            base = (b * T + t) * S
            go = gout[b * T + t]
            for j in range(S):
                gv[j] += go * X[base + j]


def wsum_fwd(alpha, H, out, B, T, Hd):
    # out[b,:] = sum_t alpha[b,t] * H[b,t,:]
    for b in range(B):
        ob = b * Hd
        for j in range(Hd):
            out[ob + j] = 0.0
        for t in range(T):
            av = alpha[b * T + t]
            hb = (b * T + t) * Hd
            for j in range(Hd):
                out[ob + j] += av * H[hb + j]


def wsum_bwd_alpha_acc(gout, H, galpha, B, T, Hd):
    for b in range(B):
        ob = b * Hd
        for t in range(T):
            hb = (b * T + t) * Hd
            s = 0.0
            for j in range(Hd):
                s += gout[ob + j] * H[hb + j]
            galpha[b * T + t] += s


def wsum_bwd_h_acc(gout, alpha, gH, B, T, Hd):
    for b in range(B):
        ob = b * Hd
        for t in range(T):
            av = alpha[b * T + t]
            hb = (b * T + t) * Hd
            for j in range(Hd):
                gH[hb + j] += av * gout[ob + j]


# ----- masked NLL -----

def nll_fwd(probs, ids, mask, out, B, V):
    for b in range(B):
        out[b] = -math.log(probs[b * V + ids[b]]) * mask[b]


def nll_bwd_acc(probs, ids, mask, gout, gprobs, B, V):
    for b in range(B):
        idx = b * V + ids[b]
        gprobs[idx] += -mask[b] * gout[b] / probs[idx]


# ----- slicing / stacking along the middle axis -----

def select_t(X, t, out, B, T, e):
    for b in range(B):
        base = (b * T + t) * e
        ob = b * e
        for j in range(e):
            out[ob + j] = X[base + j]


def scatter_t_acc(g2, gX, t, B, T, e):
    # gX[b,t,:] += g2[b,:]
    for b in range(B):
        base = (b * T + t) * e
        gb = b * e
        for j in range(e):
            gX[base + j] += g2[gb + j]


def place_t(src, X, t, B, T, e):
    # X[b,t,:] = src[b,:]
    for b in range(B):
        base = (b * T + t) * e
        sb = b * e
        for j in range(e):
            X[base + j] = src[sb + j]


def gather_t_acc(gX, t, g2, B, T, e):
    # g2[b,:] += gX[b,t,:]
    for b in range(B):
        base = (b * T + t) * e
        gb = b * e
        for j in range(e):
            g2[gb + j] += gX[base + j]


# ----- concat of trailing columns -----

def concat_cols(a, b, out, rows, na, nb):
    n = na + nb
    for r in range(rows):
        ab = r * na
        bb = r * nb
        ob = r * n
        for j in range(na):
            out[ob + j] = a[ab + j]
        for j in range(nb):
            out[ob + na + j] = b[bb + j]


def split_cols_acc(gout, ga, gb, rows, na, nb):
    n = na + nb
    for r in range(rows):
        ab = r * na
        bb = r * nb
        ob = r * n
        for j in range(na):
            ga[ab + j] += gout[ob + j]
        for j in range(nb):
            gb[bb + j] += gout[ob + na + j]


# ----- optimizer -----

def adam_update(param, grad, m, v, n, t, lr, b1, b2, eps):
    # standard bias-corrected update, in place
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for i in range(n):
        g = grad[i]
        m[i] = b1 * m[i] + (1.0 - b1) * g
        v[i] = b2 * v[i] + (1.0 - b2) * g * g
        mhat = m[i] / c1
        vhat = v[i] / c2
        param[i] -= lr * mhat / (math.sqrt(vhat) + eps)
