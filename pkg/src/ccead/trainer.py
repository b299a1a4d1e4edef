"""Training loop: Adam, gradient clipping, per-epoch dev evaluation, and
best-checkpoint retention, plus the shared evaluation entry points."""

import logging
import math
import random
from array import array
from dataclasses import dataclass, field

from . import tensor as T
from . import decoder
from .errors import NonFiniteError, PairingError
from .metrics import EvalReport, accuracy, cer_by_position, levenshtein, smooth_cer
from .model import save_model, windows_for_eval
from .tensor.backend import kernels as K
from .tensor.core import nelem
from .textcodec import WORD_EOS, WORD_PAD, decode_words, window_sentences

log = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

# per-line and per-epoch RNG streams share this stride
SEED_STRIDE = 1_000_003


class AdamState:
    """First and second moment buffers plus the shared step counter."""

    def __init__(self, named_params, moments=None, t=0):
        self.t = t
        self.m = {}
        self.v = {}
        for name, p in named_params.items():
            n = nelem(p.shape)
            self.m[name] = array("d", bytes(8 * n))
            self.v[name] = array("d", bytes(8 * n))
        if moments:
            for name, buf in self.m.items():
                if "m." + name in moments:
                    buf[:] = moments["m." + name][1]
            for name, buf in self.v.items():
                if "v." + name in moments:
                    buf[:] = moments["v." + name][1]

    def export(self, named_params):
        out = {}
        for name, p in named_params.items():
            out["m." + name] = (p.shape, self.m[name])
            out["v." + name] = (p.shape, self.v[name])
        return out


def adam_step(named_params, state, lr,
              b1=ADAM_BETA1, b2=ADAM_BETA2, eps=ADAM_EPS):
    """One in-place update over every parameter; raises on non-finite
    gradients so divergence never silently poisons the weights."""
    state.t += 1
    for name in sorted(named_params):
        p = named_params[name]
        grad = p.ensure_grad()
        n = nelem(p.shape)
        if not K.isfinite_buf(grad, n):
            raise NonFiniteError("non-finite gradient in %s at step %d"
                                 % (name, state.t))
        K.adam_update(p.data, grad, state.m[name], state.v[name],
                      n, state.t, lr, b1, b2, eps)


def _pred_slots(tokens, window):
    # mirror of the target layout: words, <EOS> when it fits, then pads
    s = list(tokens[:window])
    if len(s) < window:
        s = s + [WORD_EOS] + [WORD_PAD] * (window - len(s) - 1)
    return s


def evaluate(model, vocab, line_pairs, context=None, input_cer=None):
    """Greedy-decode every window of (noisy, clean) line pairs.

    CER pools edit distance over all windows; accuracies compare the
    decoded token slots against the fixed-window targets. When a context
    scorer is given the smooth CER variant is reported as well, using
    input_cer (defaults to the corpus noise CER) as the baseline.
    """
    cfg = model.config
    preds, targets = [], []
    word_pairs = []
    dist_sum = 0
    truth_len = 0
    noise_dist = 0
    probs_all = []
    for noisy_line, clean_line in line_pairs:
        for n_chunk, c_chunk, pair in windows_for_eval(
                noisy_line, clean_line, vocab, cfg):
            enc_out = model.encode_text(n_chunk)
            result = decoder.greedy_decode(enc_out, model.dec, cfg.word_window)
            preds.append(_pred_slots(result.tokens, cfg.word_window))
            targets.append(pair.target)
            decoded = decode_words(result.tokens, vocab)
            dist_sum += levenshtein(decoded, c_chunk)
            noise_dist += levenshtein(n_chunk, c_chunk)
            truth_len += len(c_chunk)
            probs_all.extend(result.token_probs)
            pred_words = decoded.split()
            truth_words = c_chunk.split()
            for i, tw in enumerate(truth_words):
                pw = pred_words[i] if i < len(pred_words) else ""
                word_pairs.append((pw, tw))
    if not targets:
        raise PairingError("nothing to evaluate")
    word_acc, seq_acc = accuracy(preds, targets, pad=WORD_PAD)
    table, qualifying = cer_by_position(word_pairs)
    report = EvalReport(
        cer_percent=100.0 * dist_sum / max(1, truth_len),
        word_accuracy=word_acc,
        sequence_accuracy=seq_acc,
        sample_count=len(targets),
        per_position=table,
        position_count=qualifying,
    )
    if context is not None and probs_all:
        baseline = input_cer if input_cer is not None \
            else 100.0 * noise_dist / max(1, truth_len)
        scores = [context.score((), w) for w, _ in word_pairs] or [context.score((), "")]
        res = smooth_cer(report.cer_percent, baseline, scores)
        report.s_cer = res.s_cer
        report.s_cer_negated = res.s_cer_negated
    return report


def evaluate_identity(line_pairs):
    """Score the do-nothing corrector: prediction equals the noisy input.

    Its CER is exactly the corpus noise rate, which makes it the anchor for
    sanity-checking any trained model's report.
    """
    dist_sum = 0
    truth_len = 0
    n_words = 0
    n_correct = 0
    n_lines_correct = 0
    word_pairs = []
    count = 0
    for noisy_line, clean_line in line_pairs:
        noisy = " ".join(noisy_line.lower().split())
        clean = " ".join(clean_line.lower().split())
        dist_sum += levenshtein(noisy, clean)
        truth_len += len(clean)
        count += 1
        n_toks, c_toks = noisy.split(), clean.split()
        if len(n_toks) != len(c_toks):
            raise PairingError("identity eval needs aligned token counts")
        n_words += len(c_toks)
        matches = sum(1 for a, b in zip(n_toks, c_toks) if a == b)
        n_correct += matches
        n_lines_correct += 1 if matches == len(c_toks) else 0
        word_pairs.extend(zip(n_toks, c_toks))
    table, qualifying = cer_by_position(word_pairs)
    return EvalReport(
        cer_percent=100.0 * dist_sum / max(1, truth_len),
        word_accuracy=n_correct / max(1, n_words),
        sequence_accuracy=n_lines_correct / max(1, count),
        sample_count=count,
        per_position=table,
        position_count=qualifying,
    )


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    per_token_ce: float
    dev_word_acc: float
    dev_seq_acc: float


@dataclass
class TrainResult:
    history: list = field(default_factory=list)
    best_epoch: int = -1
    best_dev_word_acc: float = -1.0
    aborted: bool = False

    @property
    def final(self):
        return self.history[-1] if self.history else None


def _serialize_params(named_params):
    out = {}
    for name, p in named_params.items():
        out[name] = (p.shape, array("d", p.data))
    return out


def train(model, vocab, train_pairs, dev_line_pairs, tconfig,
          checkpoint_path=None, log_path=None, resume_moments=None,
          progress=None):
    """Run the optimization loop.

    train_pairs are pre-windowed CorpusPairs; dev_line_pairs are raw
    (noisy, clean) sentence pairs decoded greedily once per epoch. The
    checkpoint at checkpoint_path always holds the best dev-accuracy
    weights seen so far; if the loss ever turns non-finite the last
    healthy epoch's weights are written there before aborting.
    """
    train_pairs = list(train_pairs)
    if not train_pairs:
        raise PairingError("no training pairs")
    params = model.named_params()
    state = AdamState(params, moments=resume_moments)
    result = TrainResult()
    log_fh = open(log_path, "w", encoding="utf-8") if log_path else None
    last_good = None
    try:
        for epoch in range(1, tconfig.epochs + 1):
            order = list(range(len(train_pairs)))
            random.Random(tconfig.seed * SEED_STRIDE + epoch).shuffle(order)
            drop_rng = random.Random(tconfig.seed * SEED_STRIDE + epoch + 7919)
            loss_sum = 0.0
            token_sum = 0
            n_batches = 0
            for start in range(0, len(order), tconfig.batch_size):
                batch = [train_pairs[i] for i in order[start:start + tconfig.batch_size]]
                for p in params.values():
                    p.zero_grad()
                with T.Graph() as g:
                    loss, n_tok = model.loss_batch(batch, training=True,
                                                   rng=drop_rng)
                    value = loss.item()
                    if not math.isfinite(value):
                        _abort(checkpoint_path, last_good, model, vocab,
                               state, params, epoch, result)
                        raise NonFiniteError(
                            "loss is %r at epoch %d batch %d"
                            % (value, epoch, n_batches + 1))
                    g.backward(loss)
                T.clip_grad_norm(list(params.values()), tconfig.clip_norm)
                try:
                    adam_step(params, state, tconfig.learning_rate)
                except NonFiniteError:
                    _abort(checkpoint_path, last_good, model, vocab,
                           state, params, epoch, result)
                    raise
                loss_sum += value * len(batch)
                token_sum += n_tok
                n_batches += 1
            dev = evaluate(model, vocab, dev_line_pairs) if dev_line_pairs else None
            stats = EpochStats(
                epoch=epoch,
                train_loss=loss_sum / len(train_pairs),
                per_token_ce=loss_sum / max(1, token_sum),
                dev_word_acc=dev.word_accuracy if dev else 0.0,
                dev_seq_acc=dev.sequence_accuracy if dev else 0.0,
            )
            result.history.append(stats)
            line = "%d\t%.6f\t%.6f\t%.6f" % (
                stats.epoch, stats.train_loss, stats.dev_word_acc,
                stats.dev_seq_acc)
            if log_fh:
                log_fh.write(line + "\n")
                log_fh.flush()
            log.info("epoch %s", line)
            if progress:
                progress(stats)
            last_good = (_serialize_params(params), state.t, epoch)
            # ties go to the later epoch: with a flat or empty dev set the
            # checkpoint should hold the most-trained weights, not epoch 1
            if stats.dev_word_acc >= result.best_dev_word_acc:
                result.best_dev_word_acc = stats.dev_word_acc
                result.best_epoch = epoch
                if checkpoint_path:
                    save_model(checkpoint_path, model, vocab,
                               extra={"epoch": epoch,
                                      "dev_word_acc": "%.6f" % stats.dev_word_acc,
                                      "adam_t": state.t},
                               moments=state.export(params))
    finally:
        if log_fh:
            log_fh.close()
    return result


def _abort(checkpoint_path, last_good, model, vocab, state, params,
           epoch, result):
    """Roll parameters back to the newest finite epoch and persist them."""
    result.aborted = True
    if not checkpoint_path:
        return
    if last_good is None:
        log.error("diverged in epoch %d before any epoch finished; "
                  "no checkpoint written", epoch)
        return
    snapshot, t, good_epoch = last_good
    for name, p in params.items():
        p.data[:] = snapshot[name][1]
    save_model(checkpoint_path, model, vocab,
               extra={"epoch": good_epoch, "aborted_after": epoch,
                      "adam_t": t},
               moments=state.export(params))
    log.error("training diverged in epoch %d; checkpoint rolled back to "
              "epoch %d", epoch, good_epoch)


def make_training_pairs(noisy_lines, clean_lines, vocab, config):
    return list(window_sentences(noisy_lines, clean_lines, vocab,
                                 config.char_window, config.word_window))
