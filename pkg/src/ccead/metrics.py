"""Evaluation: weighted edit distance, CER, accuracies, per-position error
tables, and the smooth context-weighted CER variant."""

import math
from dataclasses import dataclass, field

from .errors import ContractError, PairingError


def _unit(_ch):
    return 1.0


def _unit2(_a, _b):
    return 1.0


@dataclass
class EditCosts:
    """Per-character edit costs; all three must return nonnegative values."""
    w_del: callable = _unit
    w_ins: callable = _unit
    w_sub: callable = _unit2


_UNIT_COSTS = EditCosts()


def levenshtein(s, t, costs=None):
    """Weighted edit distance from s to t.

    Row i walks t, column j walks s. Matching characters pass the diagonal
    value through; otherwise the cell is the cheapest of deleting t[i],
    inserting s[j], or substituting s[j] for t[i].
    """
    c = costs or _UNIT_COSTS
    n, m = len(s), len(t)
    prev = [0.0] * (n + 1)
    for j in range(1, n + 1):
        w = c.w_ins(s[j - 1])
        if w < 0:
            raise ContractError("negative insertion cost for %r" % s[j - 1])
        prev[j] = prev[j - 1] + w
    for i in range(1, m + 1):
        ti = t[i - 1]
        wd = c.w_del(ti)
        if wd < 0:
            raise ContractError("negative deletion cost for %r" % ti)
        cur = [prev[0] + wd] + [0.0] * n
        for j in range(1, n + 1):
            sj = s[j - 1]
            if sj == ti:
                cur[j] = prev[j - 1]
            else:
                ws = c.w_sub(sj, ti)
                wi = c.w_ins(sj)
                if ws < 0 or wi < 0:
                    raise ContractError("negative edit cost")
                cur[j] = min(prev[j] + wd, cur[j - 1] + wi, prev[j - 1] + ws)
        prev = cur
    return prev[n]


def cer(pred, truth, costs=None):
    """Character error rate as a percentage of the truth length (floor 1)."""
    return 100.0 * levenshtein(pred, truth, costs) / max(1, len(truth))


def accuracy(predictions, targets, pad=None):
    """Word- and sequence-level exact-match accuracy.

    Slots where the target equals ``pad`` are ignored. Word accuracy is
    matched slots over counted target slots, comparing positionally (a
    missing prediction slot counts as a miss). A sequence is correct when
    prediction and target agree after pad slots are dropped from both.
    """
    if len(predictions) != len(targets):
        raise PairingError("%d predictions vs %d targets"
                           % (len(predictions), len(targets)))
    word_hits = word_total = seq_hits = 0
    for pred, tgt in zip(predictions, targets):
        for i, tok in enumerate(tgt):
            if pad is not None and tok == pad:
                continue
            word_total += 1
            if i < len(pred) and pred[i] == tok:
                word_hits += 1
        p_clean = [x for x in pred if pad is None or x != pad]
        t_clean = [x for x in tgt if pad is None or x != pad]
        if p_clean == t_clean:
            seq_hits += 1
    word_acc = word_hits / word_total if word_total else 0.0
    seq_acc = seq_hits / len(targets) if targets else 0.0
    return word_acc, seq_acc


def edit_script(pred, truth):
    """Unit-cost edit operations turning pred into truth.

    Returns (op, truth_pos) tuples with op in {"sub", "del", "ins"}:
    "del" means truth[truth_pos] is missing from pred, "ins" means pred has
    an extra character arriving before truth[truth_pos]. Backtrace prefers
    match, then substitution, then deletion, then insertion.
    """
    n, m = len(pred), len(truth)
    d = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        d[i][0] = i
    for j in range(1, n + 1):
        d[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if pred[j - 1] == truth[i - 1]:
                d[i][j] = d[i - 1][j - 1]
            else:
                d[i][j] = 1 + min(d[i - 1][j], d[i][j - 1], d[i - 1][j - 1])
    ops = []
    i, j = m, n
    while i > 0 or j > 0:
        if i > 0 and j > 0 and pred[j - 1] == truth[i - 1] \
                and d[i][j] == d[i - 1][j - 1]:
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + 1:
            ops.append(("sub", i - 1))
            i -= 1
            j -= 1
        elif i > 0 and d[i][j] == d[i - 1][j] + 1:
            ops.append(("del", i - 1))
            i -= 1
        else:
            ops.append(("ins", min(i, m - 1) if m else 0))
            j -= 1
    ops.reverse()
    return ops


def cer_by_position(pairs, word_length=5):
    """Per-position error-rate table over (predicted, truth) word pairs.

    Only pairs whose truth word has exactly word_length characters count.
    Each cell is 100 * (errors of that type at that truth position) /
    (qualifying pair count); insertions are attributed to the truth position
    they precede, clipped to the last column.

    Returns (table, count) where table maps edit type to a list of
    word_length rates.
    """
    counts = {op: [0] * word_length for op in ("sub", "ins", "del")}
    qualifying = 0
    for pred, truth in pairs:
        if len(truth) != word_length:
            continue
        qualifying += 1
        for op, pos in edit_script(pred, truth):
            counts[op][min(pos, word_length - 1)] += 1
    if qualifying == 0:
        return {op: [0.0] * word_length for op in counts}, 0
    table = {op: [100.0 * c / qualifying for c in row]
             for op, row in counts.items()}
    return table, qualifying


@dataclass
class SmoothCerResult:
    r_c: float
    h_sc: float
    s_cer: float
    s_cer_negated: float
    zero_baseline_fallback: bool


def smooth_cer(p_cer, o_cer, context_probs):
    """Context-weighted CER variant.

    r_c is 1 when the prediction's CER does not exceed the input's;
    otherwise exp(p_cer/o_cer) * exp(1 - exp(P)) with P the mean context
    probability. H = (1/N) sum log2(p) over the per-step probabilities, so
    H <= 0; the headline score is r_c * H and a sign-flipped variant is
    reported alongside. A zero o_cer with a worse prediction has no defined
    ratio; the penalty then uses exp(p_cer) alone and sets a flag.
    """
    if p_cer < 0 or o_cer < 0:
        raise ContractError("CER values must be nonnegative")
    if not context_probs:
        raise ContractError("need at least one context probability")
    for p in context_probs:
        if not 0.0 < p <= 1.0:
            raise ContractError("context probability %r outside (0,1]" % p)
    n = len(context_probs)
    h_sc = sum(math.log2(p) for p in context_probs) / n
    mean_p = sum(context_probs) / n
    fallback = False
    if p_cer <= o_cer:
        r_c = 1.0
    elif o_cer == 0.0:
        r_c = math.exp(p_cer) * math.exp(1.0 - math.exp(mean_p))
        fallback = True
    else:
        r_c = math.exp(p_cer / o_cer) * math.exp(1.0 - math.exp(mean_p))
    s = r_c * h_sc
    return SmoothCerResult(r_c, h_sc, s, -s, fallback)


class UniformContext:
    """Context scorer stub assigning one fixed probability to every word."""

    def __init__(self, p=1.0):
        if not 0.0 < p <= 1.0:
            raise ContractError("probability %r outside (0,1]" % p)
        self.p = p

    def score(self, prefix_words, word):
        return self.p


@dataclass
class EvalReport:
    """Aggregate evaluation results with TSV serialization."""
    cer_percent: float
    word_accuracy: float
    sequence_accuracy: float
    sample_count: int
    per_position: dict = field(default_factory=dict)
    position_count: int = 0
    s_cer: float | None = None
    s_cer_negated: float | None = None

    SUMMARY_COLUMNS = ("cer_percent", "word_accuracy", "sequence_accuracy",
                       "s_cer", "s_cer_negated", "sample_count")

    def save(self, summary_path, positions_path=None):
        with open(summary_path, "w", encoding="utf-8") as fh:
            fh.write("\t".join(self.SUMMARY_COLUMNS) + "\n")
            row = [
                "%.6f" % self.cer_percent,
                "%.6f" % self.word_accuracy,
                "%.6f" % self.sequence_accuracy,
                "" if self.s_cer is None else "%.6f" % self.s_cer,
                "" if self.s_cer_negated is None else "%.6f" % self.s_cer_negated,
                str(self.sample_count),
            ]
            fh.write("\t".join(row) + "\n")
        if positions_path and self.per_position:
            width = len(next(iter(self.per_position.values())))
            with open(positions_path, "w", encoding="utf-8") as fh:
                fh.write("edit_type\t" + "\t".join(
                    "pos%d" % i for i in range(width)) + "\n")
                for op in sorted(self.per_position):
                    fh.write(op + "\t" + "\t".join(
                        "%.6f" % v for v in self.per_position[op]) + "\n")
