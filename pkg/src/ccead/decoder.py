"""Word-level GRU decoder with additive attention over the encoder's
character states and a softmax head over the word vocabulary."""

from dataclasses import dataclass, field

from . import tensor as T
from .encoder import GruParams, glorot, gru_step, zeros_leaf
from .errors import DimensionError
from .textcodec import WORD_EOS, WORD_GO, WORD_UNK


@dataclass
class AttentionParams:
    w_s: T.Tensor      # decoder-state transform [score, hidden]
    w_h: T.Tensor      # encoder-state transform [score, hidden]
    b: T.Tensor        # score bias [score]
    v: T.Tensor        # scalar projection [score]

    @classmethod
    def init(cls, hidden, score_dim, rng):
        return cls(
            w_s=glorot(rng, score_dim, hidden, (score_dim, hidden), "dec.attn.w_s"),
            w_h=glorot(rng, score_dim, hidden, (score_dim, hidden), "dec.attn.w_h"),
            b=zeros_leaf((score_dim,), "dec.attn.b"),
            v=glorot(rng, 1, score_dim, (score_dim,), "dec.attn.v"),
        )

    def named(self):
        return {"dec.attn.w_s": self.w_s, "dec.attn.w_h": self.w_h,
                "dec.attn.b": self.b, "dec.attn.v": self.v}


@dataclass
class DecoderParams:
    e_w: T.Tensor      # word embedding [|V_w|, embed]
    gru: GruParams     # input = word embed + context
    attn: AttentionParams
    p_out: T.Tensor    # output embedding [hidden, |V_w|]
    b_out: T.Tensor    # output bias [|V_w|]

    @classmethod
    def init(cls, word_vocab, embed_dim, hidden, rng, score_dim=None):
        score_dim = score_dim or hidden
        return cls(
            e_w=glorot(rng, word_vocab, embed_dim, (word_vocab, embed_dim),
                       "dec.e_w"),
            gru=GruParams.init(embed_dim + hidden, hidden, rng, "dec.gru"),
            attn=AttentionParams.init(hidden, score_dim, rng),
            p_out=glorot(rng, hidden, word_vocab, (hidden, word_vocab), "dec.p_out"),
            b_out=zeros_leaf((word_vocab,), "dec.b_out"),
        )

    def named(self):
        out = {"dec.e_w": self.e_w}
        out.update(self.gru.named("dec.gru"))
        out.update(self.attn.named())
        out["dec.p_out"] = self.p_out
        out["dec.b_out"] = self.b_out
        return out


def attention_keys(h_seq, attn):
    """Precompute W_h h_j + b for every encoder state, once per window."""
    return T.linear(h_seq, attn.w_h, attn.b)


def attend(s_prev, h_seq, attn, keys=None):
    """Additive attention: weights over encoder states and their mixture.

    Score per position is v . tanh(W_s s_prev + W_h h_j + b); the weights
    are the softmax over positions.
    """
    if len(h_seq.shape) != 3 or h_seq.shape[1] == 0:
        raise DimensionError("attend needs [B,T,H] encoder states, got %r"
                             % (h_seq.shape,))
    if keys is None:
        keys = attention_keys(h_seq, attn)
    q = T.linear(s_prev, attn.w_s)
    scores = T.dotv(T.tanh(T.add_bt(keys, q)), attn.v)
    alpha = T.softmax(scores)
    context = T.weighted_sum(alpha, h_seq)
    return context, alpha


def decode_step(w_prev, s_prev, h_seq, p, keys=None, dropout_rate=0.0,
                rng=None, training=False):
    """One decoder step for a batch.

    w_prev is a flat id buffer of batch entries. Returns the distribution
    over the vocabulary, the new state, and the attention weights.
    """
    batch = s_prev.shape[0]
    emb = T.embed(p.e_w, w_prev, (batch,))
    emb = T.dropout(emb, dropout_rate, rng, training)
    context, alpha = attend(s_prev, h_seq, p.attn, keys)
    s_new = gru_step(T.concat(emb, context), s_prev, p.gru)
    logits = T.add_rowvec(T.matmul(s_new, p.p_out), p.b_out)
    return T.softmax(logits), s_new, alpha


@dataclass
class DecodeResult:
    """Greedy decode output: emitted word ids with their probabilities and
    one attention row per executed step (the stop step included)."""
    tokens: list = field(default_factory=list)
    token_probs: list = field(default_factory=list)
    attention_maps: list = field(default_factory=list)


def _argmax_row(probs, suppress_unk=True):
    """Index and value of the largest entry; ties take the lowest index.

    The unknown-word token is never chosen; the runner-up is used instead.
    """
    data = probs.data
    best = second = -1
    for j in range(len(data)):
        if best < 0 or data[j] > data[best]:
            second = best
            best = j
        elif second < 0 or data[j] > data[second]:
            second = j
    if suppress_unk and best == WORD_UNK and second >= 0:
        best = second
    return best, data[best]


def greedy_decode(encoded, p, max_len=5):
    """Argmax decoding from <GO> until <EOS> or max_len tokens."""
    if max_len < 1:
        raise DimensionError("max_len must be >= 1, got %d" % max_len)
    if encoded.s0.shape[0] != 1:
        raise DimensionError("greedy decode expects a single sequence")
    keys = attention_keys(encoded.h_seq, p.attn)
    s = encoded.s0
    w_prev = WORD_GO
    result = DecodeResult()
    for _ in range(max_len):
        probs, s, alpha = decode_step(
            T.int_vec([w_prev]), s, encoded.h_seq, p, keys)
        idx, prob = _argmax_row(probs)
        result.attention_maps.append(alpha.tolist())
        if idx == WORD_EOS:
            break
        result.tokens.append(idx)
        result.token_probs.append(prob)
        w_prev = idx
    return result


def complete(encoded, p, emitted_prefix, max_len=5):
    """Continue decoding past an already-emitted prefix.

    The prefix tokens are replayed as decoder inputs; only the continuation
    (up to max_len total steps) is returned.
    """
    if encoded.s0.shape[0] != 1:
        raise DimensionError("complete expects a single sequence")
    keys = attention_keys(encoded.h_seq, p.attn)
    s = encoded.s0
    w_prev = WORD_GO
    for tok in emitted_prefix:
        if tok == WORD_EOS:
            return DecodeResult()
        _, s, _ = decode_step(T.int_vec([w_prev]), s, encoded.h_seq, p, keys)
        w_prev = tok
    result = DecodeResult()
    for _ in range(max_len - len(emitted_prefix)):
        probs, s, alpha = decode_step(
            T.int_vec([w_prev]), s, encoded.h_seq, p, keys)
        idx, prob = _argmax_row(probs)
        result.attention_maps.append(alpha.tolist())
        if idx == WORD_EOS:
            break
        result.tokens.append(idx)
        result.token_probs.append(prob)
        w_prev = idx
    return result
