"""Character and word vocabularies, padding, reversal, and windowing.

The character table is a fixed 69-entry map; the word vocabulary is built
from corpus frequency with four reserved tokens at the lowest indices.
Encoded character sequences are left-padded and reversed: the sequence reads
pads, then the boundary marker, then the text back to front.
"""

from collections import Counter
from dataclasses import dataclass

from .errors import EncodingError, PairingError, VocabBuildError

CHAR_TABLE = (
    "\t", "\n", "\r", " ", "!", '"', "#", "$", "%", "&", "'", "(", ")",
    "*", "+", ",", ".", "/", "0", "1", "2", "3", "4", "5", "6", "7", "8",
    "9", ":", ";", "=", ">", "?", "@", "[", "]", "_", "`", "a", "b", "c",
    "d", "e", "f", "g", "h", "i", "j", "k", "l", "m", "n", "o", "p", "q",
    "r", "s", "t", "u", "v", "w", "x", "y", "z", "{", "|", "}",
    "<GO>", "<PAD>",
)

CHAR_GO = 67
CHAR_PAD = 68
# the table has one combined start/boundary symbol; both names resolve to it
CHAR_EOS = CHAR_GO

_CHAR_INDEX = {ch: i for i, ch in enumerate(CHAR_TABLE) if len(ch) == 1}

WORD_PAD = 0
WORD_GO = 1
WORD_EOS = 2
WORD_UNK = 3
RESERVED_WORDS = ("<PAD>", "<GO>", "<EOS>", "<UNK>")


class CharVocab:
    """Bijective character<->index map over the fixed table."""

    def __init__(self):
        self.table = CHAR_TABLE
        self.index = _CHAR_INDEX

    def __len__(self):
        return len(self.table)

    def encode(self, ch):
        try:
            return self.index[ch]
        except KeyError:
            raise EncodingError("character %r is not encodable" % ch) from None

    def decode(self, idx):
        if not 0 <= idx < len(self.table):
            raise EncodingError("character index %d out of range" % idx)
        return self.table[idx]


def encode_chars(text, window, strict=True):
    """Encode text into a fixed-length reversed index sequence.

    Layout is [pad..., boundary, reversed text]; text longer than window-1
    keeps its head. Unknown characters raise in strict mode and are dropped
    otherwise. Input is lowercased first.
    """
    if window < 1:
        raise EncodingError("window must be >= 1, got %d" % window)
    text = text.lower()
    ids = []
    for ch in text:
        idx = _CHAR_INDEX.get(ch)
        if idx is None:
            if strict:
                raise EncodingError("character %r is not encodable" % ch)
            continue
        ids.append(idx)
    ids = ids[: window - 1]
    seq = [CHAR_PAD] * (window - 1 - len(ids))
    seq.append(CHAR_EOS)
    seq.extend(reversed(ids))
    return seq


def decode_chars(seq):
    """Invert encode_chars: strip pads and the boundary, un-reverse."""
    i = 0
    while i < len(seq) and seq[i] == CHAR_PAD:
        i += 1
    if i >= len(seq) or seq[i] != CHAR_EOS:
        raise EncodingError("sequence lacks the boundary marker")
    out = []
    for idx in seq[i + 1:]:
        if not 0 <= idx < CHAR_GO:
            raise EncodingError("index %d is not a plain character" % idx)
        out.append(CHAR_TABLE[idx])
    out.reverse()
    return "".join(out)


class WordVocab:
    """Frequency-built word<->index map with reserved low indices."""

    def __init__(self, words):
        for i, tok in enumerate(RESERVED_WORDS):
            if words[i] != tok:
                raise VocabBuildError(
                    "reserved token %r missing from index %d" % (tok, i))
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise VocabBuildError("duplicate word in vocabulary")

    def __len__(self):
        return len(self.words)

    @classmethod
    def build(cls, lines, capacity=50000):
        """Top-(capacity-4) corpus words by frequency, ties lexicographic."""
        if capacity <= len(RESERVED_WORDS):
            raise VocabBuildError("capacity %d leaves no room for words" % capacity)
        counts = Counter()
        for line in lines:
            counts.update(line.lower().split())
        if not counts:
            raise VocabBuildError("empty corpus")
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        kept = [w for w, _ in ranked[: capacity - len(RESERVED_WORDS)]]
        return cls(list(RESERVED_WORDS) + kept)

    def encode_word(self, word):
        return self.index.get(word, WORD_UNK)

    def decode(self, idx):
        if not 0 <= idx < len(self.words):
            raise EncodingError("word index %d out of range" % idx)
        return self.words[idx]

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for w in self.words:
                fh.write(w + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            words = [line.rstrip("\n") for line in fh]
        while words and words[-1] == "":
            words.pop()
        if len(words) < len(RESERVED_WORDS):
            raise VocabBuildError("vocabulary file %s is too short" % path)
        return cls(words)


def encode_words(sentence, vocab, window):
    """Sentence -> (decoder_input, target) index lists of fixed length.

    target is words plus <EOS> padded to window; decoder_input is <GO> plus
    words padded likewise. A sentence of window or more words fills every
    slot and displaces <EOS>.
    """
    if window < 1:
        raise EncodingError("window must be >= 1, got %d" % window)
    tokens = sentence.lower().split()
    ids = [vocab.encode_word(t) for t in tokens]
    target = ids[:window]
    if len(target) < window:
        target = target + [WORD_EOS] + [WORD_PAD] * (window - len(target) - 1)
    dec_in = [WORD_GO] + ids[: window - 1]
    dec_in = dec_in + [WORD_PAD] * (window - len(dec_in))
    return dec_in, target


def decode_words(ids, vocab):
    """Index list -> sentence, stopping at <EOS> and skipping pads."""
    out = []
    for idx in ids:
        if idx == WORD_EOS:
            break
        if idx == WORD_PAD or idx == WORD_GO:
            continue
        out.append(vocab.decode(idx))
    return " ".join(out)


@dataclass
class CorpusPair:
    """One training example: encoded noisy chars and clean word window."""
    noisy_chars: list
    decoder_input: list
    target: list


_SENTINEL = object()


def window_sentences(noisy_lines, clean_lines, vocab, char_window,
                     word_window, strict=False):
    """Split aligned noisy/clean lines into fixed-size training pairs.

    Each clean sentence is cut into consecutive word windows; the matching
    noisy tokens render the character side. Token-count or line-count
    mismatches between the two corpora raise a pairing error.
    """
    from itertools import zip_longest

    for lineno, (noisy, clean) in enumerate(
            zip_longest(noisy_lines, clean_lines, fillvalue=_SENTINEL), 1):
        if noisy is _SENTINEL or clean is _SENTINEL:
            raise PairingError("corpora differ in length at line %d" % lineno)
        n_toks = noisy.lower().split()
        c_toks = clean.lower().split()
        if len(n_toks) != len(c_toks):
            raise PairingError(
                "line %d: %d noisy tokens vs %d clean tokens"
                % (lineno, len(n_toks), len(c_toks)))
        for start in range(0, len(c_toks), word_window):
            n_chunk = " ".join(n_toks[start:start + word_window])
            c_chunk = " ".join(c_toks[start:start + word_window])
            chars = encode_chars(n_chunk, char_window, strict=strict)
            dec_in, target = encode_words(c_chunk, vocab, word_window)
            yield CorpusPair(chars, dec_in, target)
