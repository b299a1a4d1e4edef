"""Character-level encoder: embedding, GRU over the window, multi-width
temporal CNN with a fully-connected head, and affine fusion of the two into
the decoder's initial state."""

import math
from dataclasses import dataclass

from . import tensor as T
from .errors import DimensionError


def glorot(rng, fan_out, fan_in, shape, name):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    n = T.nelem(shape)
    return T.leaf([rng.uniform(-limit, limit) for _ in range(n)], shape, name)


def zeros_leaf(shape, name):
    return T.leaf([0.0] * T.nelem(shape), shape, name)


@dataclass
class GruParams:
    """Gate and candidate weights; w_* consume the input, u_* the state."""
    w_hx: T.Tensor
    u_hh: T.Tensor
    b_h: T.Tensor
    w_ux: T.Tensor
    u_uu: T.Tensor
    b_u: T.Tensor
    w_rx: T.Tensor
    u_rr: T.Tensor
    b_r: T.Tensor

    @classmethod
    def init(cls, input_dim, hidden, rng, prefix):
        def w(name):
            return glorot(rng, hidden, input_dim, (hidden, input_dim),
                          prefix + "." + name)

        def u(name):
            return glorot(rng, hidden, hidden, (hidden, hidden),
                          prefix + "." + name)

        return cls(
            w_hx=w("w_hx"), u_hh=u("u_hh"), b_h=zeros_leaf((hidden,), prefix + ".b_h"),
            w_ux=w("w_ux"), u_uu=u("u_uu"), b_u=zeros_leaf((hidden,), prefix + ".b_u"),
            w_rx=w("w_rx"), u_rr=u("u_rr"), b_r=zeros_leaf((hidden,), prefix + ".b_r"),
        )

    def named(self, prefix):
        return {
            prefix + ".w_hx": self.w_hx, prefix + ".u_hh": self.u_hh,
            prefix + ".b_h": self.b_h, prefix + ".w_ux": self.w_ux,
            prefix + ".u_uu": self.u_uu, prefix + ".b_u": self.b_u,
            prefix + ".w_rx": self.w_rx, prefix + ".u_rr": self.u_rr,
            prefix + ".b_r": self.b_r,
        }


def gru_step(x, h_prev, p):
    """One recurrence step for a batch of rows.

    update u and reset r gate the previous state; the new state is the
    convex combination u*h_prev + (1-u)*tanh(W x + U (r*h_prev) + b).
    """
    if x.shape[0] != h_prev.shape[0]:
        raise DimensionError("batch mismatch: x %r vs h %r"
                             % (x.shape, h_prev.shape))
    u = T.sigmoid(T.add(T.linear(x, p.w_ux, p.b_u), T.linear(h_prev, p.u_uu)))
    r = T.sigmoid(T.add(T.linear(x, p.w_rx, p.b_r), T.linear(h_prev, p.u_rr)))
    cand = T.tanh(T.add(T.linear(x, p.w_hx, p.b_h),
                        T.linear(T.mul(r, h_prev), p.u_hh)))
    return T.add(T.mul(u, h_prev), T.mul(T.affine(u, -1.0, 1.0), cand))


@dataclass
class ConvBank:
    """Per-width filter banks plus the head mapping flat maps to hidden."""
    filters: list          # one [F, width, embed] tensor per width
    widths: tuple
    w_fc: T.Tensor
    b_fc: T.Tensor

    @classmethod
    def init(cls, widths, n_filters, embed_dim, window, hidden, rng, prefix):
        widths = tuple(widths)
        for w in widths:
            if not 1 <= w <= window:
                raise DimensionError("filter width %d outside [1,%d]" % (w, window))
        filters = [
            glorot(rng, n_filters, w * embed_dim, (n_filters, w, embed_dim),
                   "%s.w%d" % (prefix, w))
            for w in widths
        ]
        flat = sum((window - w + 1) * n_filters for w in widths)
        return cls(
            filters=filters, widths=widths,
            w_fc=glorot(rng, hidden, flat, (hidden, flat), prefix + ".w_fc"),
            b_fc=zeros_leaf((hidden,), prefix + ".b_fc"),
        )

    def named(self, prefix):
        out = {"%s.w%d" % (prefix, w): f
               for w, f in zip(self.widths, self.filters)}
        out[prefix + ".w_fc"] = self.w_fc
        out[prefix + ".b_fc"] = self.b_fc
        return out


@dataclass
class EncoderParams:
    e_c: T.Tensor          # char embedding [|V_c|, embed]
    gru: GruParams
    conv: ConvBank
    w_f: T.Tensor          # fusion [hidden, 2*hidden]
    b_f: T.Tensor

    @classmethod
    def init(cls, char_vocab, embed_dim, hidden, window, widths, n_filters, rng):
        return cls(
            e_c=glorot(rng, char_vocab, embed_dim, (char_vocab, embed_dim),
                       "enc.e_c"),
            gru=GruParams.init(embed_dim, hidden, rng, "enc.gru"),
            conv=ConvBank.init(widths, n_filters, embed_dim, window, hidden,
                               rng, "enc.conv"),
            w_f=glorot(rng, hidden, 2 * hidden, (hidden, 2 * hidden), "enc.w_f"),
            b_f=zeros_leaf((hidden,), "enc.b_f"),
        )

    def named(self):
        out = {"enc.e_c": self.e_c}
        out.update(self.gru.named("enc.gru"))
        out.update(self.conv.named("enc.conv"))
        out["enc.w_f"] = self.w_f
        out["enc.b_f"] = self.b_f
        return out

    @property
    def hidden(self):
        return self.w_f.shape[0]


@dataclass
class EncoderOutput:
    h_seq: T.Tensor        # [B, T, hidden], one state per character
    s0: T.Tensor           # [B, hidden] fused initial decoder state


def run_char_gru(embedded, p):
    """Iterate the GRU over [B, T, embed]; h_0 is zero."""
    B, T_len, _ = embedded.shape
    hidden = p.gru.u_uu.shape[0]
    h = T.zeros((B, hidden))
    states = []
    for t in range(T_len):
        h = gru_step(T.select_t(embedded, t), h, p.gru)
        states.append(h)
    return T.stack_t(states), h


def run_cnn(embedded, p):
    """Convolve every width over [B, T, embed], flatten, map to hidden."""
    B, T_len, _ = embedded.shape
    if max(p.conv.widths) > T_len:
        raise DimensionError("window %d shorter than widest filter %d"
                             % (T_len, max(p.conv.widths)))
    flats = []
    for f in p.conv.filters:
        fmap = T.conv1d(embedded, f, stride=1)
        _, y_len, nf = fmap.shape
        flats.append(T.reshape(fmap, (B, y_len * nf)))
    joined = flats[0]
    for extra in flats[1:]:
        joined = T.concat(joined, extra)
    return T.linear(joined, p.conv.w_fc, p.conv.b_fc)


def encode(char_ids, batch, window, p, dropout_rate=0.0, rng=None,
           training=False):
    """Full encoder pass over a flat id buffer of batch*window characters."""
    embedded = T.embed(p.e_c, char_ids, (batch, window))
    h_seq, h_t = run_char_gru(embedded, p)
    cnn = run_cnn(embedded, p)
    s0 = T.linear(T.concat(h_t, cnn), p.w_f, p.b_f)
    s0 = T.dropout(s0, dropout_rate, rng, training)
    return EncoderOutput(h_seq=h_seq, s0=s0)


def cnn_activations(char_ids, window, p):
    """Per-width feature maps for one sequence, for visualization export.

    Returns {width: [[feature values] per position]}.
    """
    embedded = T.embed(p.e_c, char_ids, (1, window))
    out = {}
    for width, f in zip(p.conv.widths, p.conv.filters):
        fmap = T.conv1d(embedded, f, stride=1)
        _, y_len, nf = fmap.shape
        rows = [[fmap.data[y * nf + j] for j in range(nf)] for y in range(y_len)]
        out[width] = rows
    return out


def export_embeddings(table, tokens, path):
    """Write one "token<TAB>v1<TAB>v2..." line per vocabulary entry."""
    rows, dim = table.shape
    if rows != len(tokens):
        raise DimensionError("%d tokens for %d embedding rows"
                             % (len(tokens), rows))
    with open(path, "w", encoding="utf-8") as fh:
        for i, tok in enumerate(tokens):
            vec = "\t".join("%.8g" % table.data[i * dim + j] for j in range(dim))
            label = {"\t": "<TAB>", "\n": "<NL>", "\r": "<CR>",
                     " ": "<SPACE>"}.get(tok, tok)
            fh.write(label + "\t" + vec + "\n")
