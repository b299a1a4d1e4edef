"""Regenerate cer_vectors.json from the reference implementation.

The browser client bundles its own edit-distance code; this file is the
contract that keeps the two implementations interchangeable. Values are
float64 and the client must reproduce them exactly, not approximately.

    python3 frontend/shared/make_vectors.py > frontend/shared/cer_vectors.json
"""

import json

from ccead.metrics import cer, levenshtein

PAIRS = [
    ("thanka i will", "thanks i will"),
    ("", ""),
    ("", "hello"),
    ("hello", ""),
    ("hello", "hello"),
    ("helo wrld how are yuo", "hello world how are you"),
    ("kitten", "sitting"),
    ("sunday", "saturday"),
    ("abc", "cba"),
    ("the cta sat on hte mat", "the cat sat on the mat"),
    ("a", "b"),
    ("aaaa", "aa"),
    ("aa", "aaaa"),
    ("café", "cafe"),
    ("naïve bayes", "naive bayes"),
    # the emoji is outside the basic plane: distances count code points,
    # not UTF-16 units, and this row catches clients that get it wrong
    ("\U0001f642 ok", "ok"),
    ("peace", "piece"),
    ("correcton and completon", "correction and completion"),
    ("what tiem wrks for yuo", "what time works for you"),
    ("zzzzzzzzzz", "abcdefghij"),
]


def main():
    rows = [{"pred": p, "truth": t,
             "distance": levenshtein(p, t), "cer": cer(p, t)}
            for p, t in PAIRS]
    print(json.dumps({"vectors": rows}, indent=2, ensure_ascii=False))


if __name__ == "__main__":
    main()
