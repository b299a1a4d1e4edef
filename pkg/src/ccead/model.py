"""The full correction model: parameter container, teacher-forced training
loss, and the text-in text-out inference path."""

import logging
import random

from . import tensor as T
from . import decoder, encoder
from .config import ModelConfig
from .checkpoint import load_checkpoint, save_checkpoint
from .errors import CheckpointError, PairingError
from .textcodec import (WORD_PAD, WordVocab, decode_words, encode_chars,
                        encode_words)

log = logging.getLogger(__name__)

# separator for the word list embedded in a checkpoint config block;
# vocabulary tokens are whitespace-split so it can never collide
_VOCAB_SEP = "\x1f"


class Model:
    """Encoder plus decoder parameters behind one config."""

    def __init__(self, config, seed=0):
        self.config = config
        rng = random.Random(seed)
        self.enc = encoder.EncoderParams.init(
            config.char_vocab, config.embed_dim, config.hidden,
            config.char_window, config.widths, config.filters, rng)
        self.dec = decoder.DecoderParams.init(
            config.word_vocab, config.embed_dim, config.hidden, rng)

    def named_params(self):
        out = self.enc.named()
        out.update(self.dec.named())
        return out

    def loss_batch(self, pairs, training=False, rng=None):
        """Teacher-forced cross-entropy, averaged over the batch.

        Returns (loss tensor, number of non-pad target slots).  An all-pad
        batch contributes nothing to learn from; it yields a zero loss and
        a warning instead of a division by nonsense.
        """
        if not pairs:
            raise PairingError("empty batch")
        cfg = self.config
        B = len(pairs)
        flat_chars = []
        for p in pairs:
            if len(p.noisy_chars) != cfg.char_window:
                raise PairingError("pair has %d chars, window is %d"
                                   % (len(p.noisy_chars), cfg.char_window))
            flat_chars.extend(p.noisy_chars)
        enc_out = encoder.encode(
            T.int_vec(flat_chars), B, cfg.char_window, self.enc,
            cfg.dropout, rng, training)
        keys = decoder.attention_keys(enc_out.h_seq, self.dec.attn)
        s = enc_out.s0
        total = None
        n_tokens = 0
        for t in range(cfg.word_window):
            w_prev = T.int_vec([p.decoder_input[t] for p in pairs])
            targets = [p.target[t] for p in pairs]
            mask_vals = [0.0 if y == WORD_PAD else 1.0 for y in targets]
            n_tokens += sum(1 for m in mask_vals if m)
            probs, s, _ = decoder.decode_step(
                w_prev, s, enc_out.h_seq, self.dec, keys,
                cfg.dropout, rng, training)
            step = T.sum_all(T.nll(probs, T.int_vec(targets),
                                   T.constant(mask_vals, (B,))))
            total = step if total is None else T.add(total, step)
        if n_tokens == 0:
            log.warning("batch of %d pairs contains only padding", B)
        return T.affine(total, 1.0 / B), n_tokens

    def encode_text(self, text):
        """Encode one window of raw text (inference, batch of one)."""
        ids = encode_chars(text, self.config.char_window, strict=False)
        return encoder.encode(T.int_vec(ids), 1, self.config.char_window,
                              self.enc)


def correct_once(model, vocab, text, max_completions=1):
    """Correct a line of text and propose completions.

    The input is split into windows of word_window words.  Each window is
    encoded and greedily decoded; the first len(window) decoded tokens are
    the corrections.  Completions continue the final window's decode past
    its input words.  Returns (corrected text, completions, per-word
    probabilities).
    """
    words = text.lower().split()
    if not words:
        return "", [], []
    w = model.config.word_window
    chunks = [words[i:i + w] for i in range(0, len(words), w)]
    corrected, probs = [], []
    completions = []
    for i, chunk in enumerate(chunks):
        enc_out = model.encode_text(" ".join(chunk))
        result = decoder.greedy_decode(enc_out, model.dec, max_len=w)
        aligned = result.tokens[:len(chunk)]
        corrected.extend(decode_words(aligned, vocab).split())
        probs.extend(result.token_probs[:len(aligned)])
        if i == len(chunks) - 1 and max_completions > 0:
            tail = decoder.complete(enc_out, model.dec, aligned, max_len=w)
            extra = tail.tokens[:max_completions]
            completions = decode_words(extra, vocab).split()
            probs.extend(tail.token_probs[:len(extra)])
    return " ".join(corrected), completions, probs


def checkpoint_config(model, vocab, extra=None):
    cfg = model.config.to_flat()
    cfg["vocab_words"] = _VOCAB_SEP.join(vocab.words)
    if extra:
        cfg.update({str(k): str(v) for k, v in extra.items()})
    return cfg


def save_model(path, model, vocab, extra=None, moments=None):
    """Persist parameters, config, and vocabulary in one file.

    Optimizer moments (name -> (shape, values)) ride along under the
    adam.* namespace so training can resume exactly.
    """
    tensors = dict(model.named_params())
    if moments:
        for name, pair in moments.items():
            tensors["adam." + name] = pair
    save_checkpoint(path, checkpoint_config(model, vocab, extra), tensors)


def load_model(path):
    """Rebuild a Model and its WordVocab from a checkpoint.

    Returns (model, vocab, extras) where extras holds the config keys that
    are not structural (training metadata, optimizer step count, ...).
    """
    cfg, tensors = load_checkpoint(path)
    if "vocab_words" not in cfg:
        raise CheckpointError("checkpoint carries no vocabulary")
    words = cfg.pop("vocab_words").split(_VOCAB_SEP)
    vocab = WordVocab(words)
    structural = {f: cfg.pop(f) for f in list(cfg)
                  if f in ModelConfig.__dataclass_fields__}
    model = Model(ModelConfig.from_flat(structural))
    params = model.named_params()
    missing = [n for n in params if n not in tensors]
    if missing:
        raise CheckpointError("checkpoint is missing tensors: %s"
                              % ", ".join(sorted(missing)[:5]))
    for name, t in params.items():
        shape, values = tensors[name]
        if shape != t.shape:
            raise CheckpointError("tensor %r: stored shape %r, model expects %r"
                                  % (name, shape, t.shape))
        t.data[:] = values
    moments = {name[len("adam."):]: pair for name, pair in tensors.items()
               if name.startswith("adam.")}
    return model, vocab, {"metadata": cfg, "moments": moments}


def windows_for_eval(noisy_line, clean_line, vocab, config):
    """Split one (noisy, clean) sentence pair into aligned eval windows.

    Returns a list of (noisy window text, clean window text, CorpusPair).
    """
    from .textcodec import CorpusPair
    noisy_words = noisy_line.lower().split()
    clean_words = clean_line.lower().split()
    if len(noisy_words) != len(clean_words):
        raise PairingError("line has %d noisy words vs %d clean"
                           % (len(noisy_words), len(clean_words)))
    out = []
    w = config.word_window
    for i in range(0, len(clean_words), w):
        n_chunk = " ".join(noisy_words[i:i + w])
        c_chunk = " ".join(clean_words[i:i + w])
        dec_in, target = encode_words(c_chunk, vocab, w)
        out.append((n_chunk, c_chunk, CorpusPair(
            noisy_chars=encode_chars(n_chunk, config.char_window, strict=False),
            decoder_input=dec_in, target=target)))
    return out
