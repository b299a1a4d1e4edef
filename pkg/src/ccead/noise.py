"""Typo statistics, noise injection, and synthetic keyboard data.

Three data sources feed training:
  1. single-edit typo pairs, classified and tallied into conditional error
     distributions,
  2. a clean corpus with that noise injected back in (by dictionary lookup
     or by sampling character edits),
  3. words retyped through a Gaussian-fingered simulated keyboard.

Spaces are never created or destroyed by injection, so noisy and clean
lines always stay word-aligned.
"""

import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .errors import ConfigError, EstimationError, PairingError

WORD_START_CONTEXT = " "
_MAX_RETRIES = 20


@dataclass
class EditRecord:
    """One classified single-character edit (correction -> typo)."""
    kind: str           # "sub" | "ins" | "del"
    position: int       # 0-based index into the correction
    orig: str           # correction-side character ("" for insertions)
    typo_char: str      # typo-side character ("" for deletions)
    context: str = ""   # left character for insertions


def classify_edit(typo, correction):
    """Identify the single edit separating the strings, or None.

    Alignment scans from the left and classifies at the first divergence;
    the remainder must then match exactly, which doubles as the
    edit-distance-1 check. Insertions record the correction character to
    their left, or a space at word start.
    """
    if typo == correction:
        return None
    nt, nc = len(typo), len(correction)
    if abs(nt - nc) > 1:
        return None
    i = 0
    limit = min(nt, nc)
    while i < limit and typo[i] == correction[i]:
        i += 1
    if nt == nc:
        if typo[i + 1:] == correction[i + 1:]:
            return EditRecord("sub", i, correction[i], typo[i])
        return None
    if nt == nc + 1:
        if typo[i + 1:] == correction[i:]:
            ctx = correction[i - 1] if i > 0 else WORD_START_CONTEXT
            return EditRecord("ins", i, "", typo[i], ctx)
        return None
    if typo[i:] == correction[i + 1:]:
        return EditRecord("del", i, correction[i], "")
    return None


def _normalize(counts):
    total = sum(counts.values())
    return {k: v / total for k, v in counts.items()}


class ErrorDistribution:
    """Conditional typo frequencies with their raw counts.

    substitution[orig][repl], insertion[left_ctx][char], deletion[char]
    (a single marginal row over deleted characters), and a prior over the
    three edit kinds. Rows exist only where counts do.
    """

    def __init__(self, sub_counts, ins_counts, del_counts, rejects=None):
        if not (sub_counts or ins_counts or del_counts):
            raise EstimationError("no accepted typo pairs to estimate from")
        self.sub_counts = {k: dict(v) for k, v in sub_counts.items()}
        self.ins_counts = {k: dict(v) for k, v in ins_counts.items()}
        self.del_counts = dict(del_counts)
        self.rejects = list(rejects or [])
        self.substitution = {k: _normalize(v) for k, v in self.sub_counts.items()}
        self.insertion = {k: _normalize(v) for k, v in self.ins_counts.items()}
        self.deletion = _normalize(self.del_counts) if self.del_counts else {}
        kind_counts = {
            "sub": sum(sum(v.values()) for v in self.sub_counts.values()),
            "ins": sum(sum(v.values()) for v in self.ins_counts.values()),
            "del": sum(self.del_counts.values()),
        }
        self.type_counts = {k: v for k, v in kind_counts.items() if v}
        self.edit_type_prior = _normalize(self.type_counts)

    def save(self, path):
        """Versioned plain-text count tables, one record per line."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("noise-model-counts v1\n")
            for kind, n in sorted(self.type_counts.items()):
                fh.write("type\t%s\t%d\n" % (kind, n))
            for orig in sorted(self.sub_counts):
                for repl, n in sorted(self.sub_counts[orig].items()):
                    fh.write("sub\t%s\t%s\t%d\n" % (_esc(orig), _esc(repl), n))
            for ctx in sorted(self.ins_counts):
                for ch, n in sorted(self.ins_counts[ctx].items()):
                    fh.write("ins\t%s\t%s\t%d\n" % (_esc(ctx), _esc(ch), n))
            for ch, n in sorted(self.del_counts.items()):
                fh.write("del\t%s\t%d\n" % (_esc(ch), n))

    @classmethod
    def load(cls, path):
        sub = defaultdict(Counter)
        ins = defaultdict(Counter)
        dele = Counter()
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            if header != "noise-model-counts v1":
                raise EstimationError("unrecognized noise table header %r" % header)
            for lineno, line in enumerate(fh, 2):
                parts = line.rstrip("\n").split("\t")
                if parts[0] == "type":
                    continue
                if parts[0] == "sub" and len(parts) == 4:
                    sub[_unesc(parts[1])][_unesc(parts[2])] += int(parts[3])
                elif parts[0] == "ins" and len(parts) == 4:
                    ins[_unesc(parts[1])][_unesc(parts[2])] += int(parts[3])
                elif parts[0] == "del" and len(parts) == 3:
                    dele[_unesc(parts[1])] += int(parts[2])
                else:
                    raise EstimationError(
                        "%s:%d: malformed record %r" % (path, lineno, line))
        return cls(sub, ins, dele)


def _esc(ch):
    return ch.replace("\\", "\\\\").replace("\t", "\\t") \
             .replace("\n", "\\n").replace("\r", "\\r").replace(" ", "\\s")


def _unesc(s):
    out = []
    i = 0
    while i < len(s):
        if s[i] == "\\" and i + 1 < len(s):
            out.append({"\\": "\\", "t": "\t", "n": "\n",
                        "r": "\r", "s": " "}[s[i + 1]])
            i += 2
        else:
            out.append(s[i])
            i += 1
    return "".join(out)


def estimate_error_distribution(pairs):
    """Tally classified edits from (typo, correction) pairs.

    Pairs that are not a single-character edit land in the result's rejects
    list instead of being dropped.
    """
    sub = defaultdict(Counter)
    ins = defaultdict(Counter)
    dele = Counter()
    rejects = []
    for typo, correction in pairs:
        rec = classify_edit(typo, correction)
        if rec is None:
            rejects.append((typo, correction))
        elif rec.kind == "sub":
            sub[rec.orig][rec.typo_char] += 1
        elif rec.kind == "ins":
            ins[rec.context][rec.typo_char] += 1
        else:
            dele[rec.orig] += 1
    if not (sub or ins or dele):
        raise EstimationError("no accepted typo pairs to estimate from")
    return ErrorDistribution(sub, ins, dele, rejects)


def read_typo_pairs(path):
    """Read tab-separated "typo<TAB>correction" lines."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise PairingError("%s:%d: expected two tab-separated fields"
                                   % (path, lineno))
            out.append((parts[0].lower(), parts[1].lower()))
    return out


def build_typo_dict(pairs):
    """Map each correction to its observed typos (with multiplicity)."""
    d = defaultdict(list)
    for typo, correction in pairs:
        if " " in typo or " " in correction:
            continue
        d[correction].append(typo)
    return dict(d)


def _weighted_choice(rng, row):
    keys = sorted(row)
    return rng.choices(keys, weights=[row[k] for k in keys])[0]


def _line_rng(seed, index):
    return random.Random(seed * 1_000_003 + index)


def _apply_sampled_edits(line, dist, rate, rng):
    chars = list(line)
    n_edits = sum(1 for _ in range(len(chars)) if rng.random() < rate)
    kinds = sorted(dist.edit_type_prior)
    kind_weights = [dist.edit_type_prior[k] for k in kinds]
    for _ in range(n_edits):
        for _attempt in range(_MAX_RETRIES):
            kind = rng.choices(kinds, weights=kind_weights)[0]
            if kind == "sub" and _try_sub(chars, dist, rng):
                break
            if kind == "ins" and _try_ins(chars, dist, rng):
                break
            if kind == "del" and _try_del(chars, dist, rng):
                break
    return "".join(chars)


def _try_sub(chars, dist, rng):
    sites = [i for i, c in enumerate(chars) if c != " " and c in dist.substitution]
    if not sites:
        return False
    i = rng.choice(sites)
    chars[i] = _weighted_choice(rng, dist.substitution[chars[i]])
    return True


def _try_ins(chars, dist, rng):
    # any boundary works; the left context is a space at word starts
    if not dist.insertion:
        return False
    i = rng.randrange(len(chars) + 1)
    ctx = chars[i - 1] if i > 0 else WORD_START_CONTEXT
    row = dist.insertion.get(ctx)
    if row is None:
        return False
    ch = _weighted_choice(rng, row)
    if ch == " ":
        return False
    chars.insert(i, ch)
    return True


def _word_span_len(chars, i):
    lo = i
    while lo > 0 and chars[lo - 1] != " ":
        lo -= 1
    hi = i
    while hi < len(chars) and chars[hi] != " ":
        hi += 1
    return hi - lo


def _try_del(chars, dist, rng):
    if not dist.deletion:
        return False
    ch = _weighted_choice(rng, dist.deletion)
    # a word must keep at least one character, or alignment breaks
    sites = [i for i, c in enumerate(chars)
             if c == ch and c != " " and _word_span_len(chars, i) >= 2]
    if not sites:
        return False
    del chars[rng.choice(sites)]
    return True


def inject_noise(clean_lines, typo_dict=None, dist=None, mode="dict",
                 rate=1.0, seed=0):
    """Produce noisy lines aligned one-to-one with the clean input.

    dict mode swaps whole words for observed typos with probability rate;
    sampled mode applies character edits drawn from dist, with the edit
    count per line binomial at the given per-character rate. Both are
    deterministic for a given seed, with independent per-line streams.
    """
    if not 0.0 <= rate <= 1.0:
        raise ConfigError("rate must be in [0,1], got %r" % rate)
    if mode == "dict":
        if typo_dict is None:
            raise ConfigError("dict mode needs a typo dictionary")
    elif mode == "sampled":
        if dist is None:
            raise ConfigError("sampled mode needs an error distribution")
    else:
        raise ConfigError("unknown injection mode %r" % mode)
    out = []
    for idx, line in enumerate(clean_lines):
        line = line.lower()
        rng = _line_rng(seed, idx)
        if mode == "dict":
            words = line.split(" ")
            for w_i, word in enumerate(words):
                typos = typo_dict.get(word)
                if typos and rng.random() < rate:
                    words[w_i] = typos[rng.randrange(len(typos))]
            out.append(" ".join(words))
        else:
            out.append(_apply_sampled_edits(line, dist, rate, rng))
    return out


# ----- simulated keyboard -----

_KEY_ROWS = (
    ("qwertyuiop", 0.0, 0.0),
    ("asdfghjkl", 0.25, 1.0),
    ("zxcvbnm", 0.75, 2.0),
)
_SPACE_CENTER = (4.0, 3.0)


class KeyboardLayout:
    """Three-row keyboard geometry in key-pitch units."""

    def __init__(self):
        centers = {}
        for row, x0, y in _KEY_ROWS:
            for i, ch in enumerate(row):
                centers[ch] = (x0 + i, y)
        centers[" "] = _SPACE_CENTER
        self.centers = centers
        self._letters = sorted(c for c in centers if c != " ")

    def center(self, ch):
        return self.centers[ch]

    def nearest(self, x, y, include_space=False):
        """Closest key to a point; ties resolve to the lowest character."""
        keys = self._letters if not include_space else sorted(self.centers)
        best, best_d = None, math.inf
        for ch in keys:
            cx, cy = self.centers[ch]
            d = (x - cx) ** 2 + (y - cy) ** 2
            if d < best_d:
                best, best_d = ch, d
        return best


def gen_synthetic(words, layout=None, sigma=1.0, seed=0, variants_per_word=27):
    """Retype each word through Gaussian-smeared key presses.

    Every letter is replaced by the key nearest to a point drawn from a
    Normal centered on its key, with the given standard deviation in
    key-pitch units. Characters without a key pass through unchanged.
    Returns (noisy, word) pairs, variants_per_word per input word.
    """
    if not words:
        raise ConfigError("empty word list")
    if sigma <= 0:
        raise ConfigError("sigma must be positive, got %r" % sigma)
    layout = layout or KeyboardLayout()
    rng = random.Random(seed)
    pairs = []
    for word in words:
        word = word.lower()
        for _ in range(variants_per_word):
            noisy = []
            for ch in word:
                if ch not in layout.centers or ch == " ":
                    noisy.append(ch)
                    continue
                cx, cy = layout.center(ch)
                x = rng.gauss(cx, sigma)
                y = rng.gauss(cy, sigma)
                noisy.append(layout.nearest(x, y))
            pairs.append(("".join(noisy), word))
    return pairs


# ----- dataset assembly -----

@dataclass
class DatasetSplits:
    """Aligned (noisy, clean) line pairs, partitioned for training."""
    train: list = field(default_factory=list)
    dev: list = field(default_factory=list)
    test: list = field(default_factory=list)


def split_pairs(pairs, seed=0, fractions=(0.90, 0.05, 0.05)):
    """Seeded random partition into train/dev/test."""
    if abs(sum(fractions) - 1.0) > 1e-9 or len(fractions) != 3:
        raise ConfigError("split fractions must be three values summing to 1")
    order = list(range(len(pairs)))
    random.Random(seed).shuffle(order)
    n = len(pairs)
    n_train = int(fractions[0] * n)
    n_dev = int(fractions[1] * n)
    splits = DatasetSplits()
    splits.train = [pairs[i] for i in order[:n_train]]
    splits.dev = [pairs[i] for i in order[n_train:n_train + n_dev]]
    splits.test = [pairs[i] for i in order[n_train + n_dev:]]
    return splits


def build_opentypo(clean_lines, typo_pairs, seed=0, rate=1.0,
                   fractions=(0.90, 0.05, 0.05)):
    """Clean corpus + typo pairs -> noisy/clean line pairs, split 90/5/5.

    Words observed in the typo corpus are replaced by sampled typos; all
    other words pass through. Returns DatasetSplits of (noisy, clean).
    """
    clean_lines = [ln.lower() for ln in clean_lines]
    typo_dict = build_typo_dict(typo_pairs)
    noisy = inject_noise(clean_lines, typo_dict=typo_dict, mode="dict",
                         rate=rate, seed=seed)
    pairs = list(zip(noisy, clean_lines))
    return split_pairs(pairs, seed=seed, fractions=fractions)
