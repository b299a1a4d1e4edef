"""Compare the compiled kernel extension against the pure-Python fallback.

Times each hot kernel at shapes a desk-scale model actually produces
(batch 16, word window 3, hidden 64, embed 32, char window 24), checks
that both backends return bitwise-identical buffers first, then reports
per-call latency and the speedup. A final section times one full
training step (forward, backward, clip, Adam) per backend in a child
process, since the backend is fixed at import time.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --min-time 0.5 --skip-step
"""

import argparse
import math
import os
import random
import subprocess
import sys
import time
from array import array

from ccead.tensor import pykernels

try:
    from ccead.tensor import ckernels
except ImportError:
    ckernels = None

# model-representative shapes
B = 16          # windows per batch
WIN = 3         # words per window
ROWS = B * WIN  # decoder rows in flight
HIDDEN = 64
GATES = 3 * HIDDEN
EMBED = 32
CHAR_WINDOW = 24
CHAR_VOCAB = 69
WORD_VOCAB = 304
CONV_FILTERS = 4
CONV_WIDTH = 3
CONV_OUT = CHAR_WINDOW - CONV_WIDTH + 1


def _randbuf(rng, n, lo=-1.0, hi=1.0):
    return array("d", [rng.uniform(lo, hi) for _ in range(n)])


def _zeros(n):
    return array("d", bytes(8 * n))


class Case:
    """One kernel invocation: fresh argument sets per backend so in-place
    mutation cannot leak between the parity check and the timings."""

    def __init__(self, name, shape_note, kernel, make_args):
        self.name = name
        self.shape_note = shape_note
        self.kernel = kernel
        self.make_args = make_args

    def args_for(self, seed):
        return self.make_args(random.Random(seed))


def build_cases():
    cases = []

    def case(name, note, make_args):
        cases.append(Case(name, note, name, make_args))

    # fused linear forward: x @ W^T at GRU-gate width
    case("matmul_nt", "(%dx%d)(%dx%d)^T" % (ROWS, HIDDEN, GATES, HIDDEN),
         lambda r: (_randbuf(r, ROWS * HIDDEN), _randbuf(r, GATES * HIDDEN),
                    _zeros(ROWS * GATES), ROWS, HIDDEN, GATES))
    # linear backward, input gradient
    case("matmul_nn_acc", "(%dx%d)(%dx%d)" % (ROWS, GATES, GATES, HIDDEN),
         lambda r: (_randbuf(r, ROWS * GATES), _randbuf(r, GATES * HIDDEN),
                    _zeros(ROWS * HIDDEN), ROWS, GATES, HIDDEN))
    # linear backward, weight gradient
    case("matmul_tn_acc", "(%dx%d)^T(%dx%d)" % (ROWS, HIDDEN, ROWS, GATES),
         lambda r: (_randbuf(r, ROWS * HIDDEN), _randbuf(r, ROWS * GATES),
                    _zeros(HIDDEN * GATES), ROWS, HIDDEN, GATES))
    # char convolution over the encoder window
    case("conv1d_fwd", "B%d l%d e%d F%d k%d" % (B, CHAR_WINDOW, EMBED,
                                                CONV_FILTERS, CONV_WIDTH),
         lambda r: (_randbuf(r, B * CHAR_WINDOW * EMBED),
                    _randbuf(r, CONV_FILTERS * CONV_WIDTH * EMBED),
                    _zeros(B * CONV_OUT * CONV_FILTERS),
                    B, CHAR_WINDOW, EMBED, CONV_FILTERS, CONV_WIDTH, 1))
    case("conv1d_bwd_f", "same as fwd",
         lambda r: (_randbuf(r, B * CHAR_WINDOW * EMBED),
                    _randbuf(r, B * CONV_OUT * CONV_FILTERS),
                    _zeros(CONV_FILTERS * CONV_WIDTH * EMBED),
                    B, CHAR_WINDOW, EMBED, CONV_FILTERS, CONV_WIDTH, 1))
    # output distribution over the word vocabulary
    case("softmax_rows", "%dx%d" % (ROWS, WORD_VOCAB),
         lambda r: (_randbuf(r, ROWS * WORD_VOCAB, -4.0, 4.0),
                    _zeros(ROWS * WORD_VOCAB), ROWS, WORD_VOCAB))
    case("softmax_rows_bwd_acc", "%dx%d" % (ROWS, WORD_VOCAB),
         lambda r: (array("d", [1.0 / WORD_VOCAB] * (ROWS * WORD_VOCAB)),
                    _randbuf(r, ROWS * WORD_VOCAB),
                    _zeros(ROWS * WORD_VOCAB), ROWS, WORD_VOCAB))
    # gate activations
    case("sigmoid_v", "n=%d" % (ROWS * 2 * HIDDEN),
         lambda r: (_randbuf(r, ROWS * 2 * HIDDEN, -6.0, 6.0),
                    _zeros(ROWS * 2 * HIDDEN), ROWS * 2 * HIDDEN))
    case("tanh_v", "n=%d" % (ROWS * HIDDEN),
         lambda r: (_randbuf(r, ROWS * HIDDEN, -3.0, 3.0),
                    _zeros(ROWS * HIDDEN), ROWS * HIDDEN))
    # char embedding gather for a full batch of windows
    case("embed_fwd", "%d ids, dim %d" % (B * CHAR_WINDOW, EMBED),
         lambda r: (_randbuf(r, CHAR_VOCAB * EMBED),
                    array("q", [r.randrange(CHAR_VOCAB)
                                for _ in range(B * CHAR_WINDOW)]),
                    _zeros(B * CHAR_WINDOW * EMBED), B * CHAR_WINDOW, EMBED))
    # attention scores for one decode step
    case("dotv_fwd", "B%d T%d S%d" % (B, CONV_OUT, HIDDEN),
         lambda r: (_randbuf(r, B * CONV_OUT * HIDDEN), _randbuf(r, HIDDEN),
                    _zeros(B * CONV_OUT), B, CONV_OUT, HIDDEN))
    # optimizer update over one gate weight matrix
    case("adam_update", "n=%d" % (HIDDEN * GATES),
         lambda r: (_randbuf(r, HIDDEN * GATES),
                    _randbuf(r, HIDDEN * GATES, -0.1, 0.1),
                    _zeros(HIDDEN * GATES), _zeros(HIDDEN * GATES),
                    HIDDEN * GATES, 10, 1e-3, 0.9, 0.999, 1e-8))
    # gradient-norm scan across every parameter
    case("sumsq", "n=200000",
         lambda r: (_randbuf(r, 200_000), 200_000))
    return cases


def check_parity(case):
    """Both backends on identical inputs must agree on every output and
    every mutated buffer, byte for byte."""
    args_p = case.args_for(1234)
    args_c = case.args_for(1234)
    getattr(pykernels, case.kernel)(*args_p)
    getattr(ckernels, case.kernel)(*args_c)
    for bp, bc in zip(args_p, args_c):
        if isinstance(bp, array) and bp.tobytes() != bc.tobytes():
            return False
    return True


def time_kernel(fn, make_args, min_time, repeats):
    """Best per-call seconds over `repeats` measured runs, with the rep
    count calibrated so each run lasts at least `min_time`."""
    args = make_args(random.Random(99))
    t0 = time.perf_counter()
    fn(*args)
    once = time.perf_counter() - t0
    reps = max(1, int(math.ceil(min_time / max(once, 1e-9))))
    best = float("inf")
    for _ in range(repeats):
        args = make_args(random.Random(99))
        t0 = time.perf_counter()
        for _ in range(reps):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / reps)
    return best


def fmt_time(seconds):
    if seconds < 1e-3:
        return "%8.1f us" % (seconds * 1e6)
    if seconds < 1.0:
        return "%8.2f ms" % (seconds * 1e3)
    return "%8.2f s " % seconds


def run_kernel_table(min_time, repeats):
    header = "%-22s %-26s %11s %11s %9s" % (
        "kernel", "shape", "pure", "compiled", "speedup")
    print(header)
    print("-" * len(header))
    for case in build_cases():
        if not check_parity(case):
            print("%-22s %-26s parity FAILED, backends disagree"
                  % (case.name, case.shape_note))
            continue
        t_pure = time_kernel(getattr(pykernels, case.kernel),
                             case.make_args, min_time, repeats)
        t_comp = time_kernel(getattr(ckernels, case.kernel),
                             case.make_args, min_time, repeats)
        print("%-22s %-26s %s %s %8.1fx" % (
            case.name, case.shape_note,
            fmt_time(t_pure), fmt_time(t_comp), t_pure / t_comp))


# ----- end-to-end training step -----

PROBE_LINES = [
    "the cat sat on the mat",
    "please send the report today",
    "see you at the office soon",
    "what time works for you then",
    "call me when you can talk",
    "thanks i will call you back",
    "the report is ready for review",
    "hello there how are you doing",
]


def run_step_probe(steps):
    """Child-process mode: time full training steps under whatever
    backend CCEAD_BACKEND selected, print best seconds per step."""
    from ccead import tensor as T
    from ccead import trainer
    from ccead.config import ModelConfig
    from ccead.model import Model
    from ccead.textcodec import WordVocab, window_sentences

    vocab = WordVocab.build(PROBE_LINES, capacity=64)
    cfg = ModelConfig(word_vocab=len(vocab), embed_dim=EMBED, hidden=HIDDEN,
                      filters=CONV_FILTERS, widths=(2, 3, 4),
                      char_window=CHAR_WINDOW, word_window=WIN, dropout=0.1)
    model = Model(cfg, seed=1)
    params = model.named_params()
    state = trainer.AdamState(params)
    pairs = list(window_sentences(PROBE_LINES, PROBE_LINES, vocab,
                                  cfg.char_window, cfg.word_window))[:B]
    rng = random.Random(7)

    def step():
        for p in params.values():
            p.zero_grad()
        with T.Graph() as g:
            loss, _ = model.loss_batch(pairs, training=True, rng=rng)
            g.backward(loss)
        T.clip_grad_norm(list(params.values()), 5.0)
        trainer.adam_step(params, state, 1e-3)

    step()  # warm up
    best = float("inf")
    for _ in range(steps):
        t0 = time.perf_counter()
        step()
        best = min(best, time.perf_counter() - t0)
    print("%.6f" % best)


def run_step_comparison(steps):
    print()
    print("full training step (batch %d windows, hidden %d, embed %d)"
          % (B, HIDDEN, EMBED))
    results = {}
    for backend in ("pure", "compiled"):
        env = dict(os.environ, CCEAD_BACKEND=backend)
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--step-probe", str(steps)],
            env=env, capture_output=True, text=True, check=True)
        results[backend] = float(out.stdout.strip().splitlines()[-1])
        print("  %-9s %s per step" % (backend, fmt_time(results[backend]).strip()))
    print("  speedup   %.1fx" % (results["pure"] / results["compiled"]))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-time", type=float, default=0.15,
                    help="seconds each timing run must last (default 0.15)")
    ap.add_argument("--repeats", type=int, default=3,
                    help="measured runs per kernel, best is kept (default 3)")
    ap.add_argument("--skip-step", action="store_true",
                    help="kernel table only, no end-to-end training step")
    ap.add_argument("--steps", type=int, default=3,
                    help="training steps to time per backend (default 3)")
    ap.add_argument("--step-probe", type=int, metavar="STEPS",
                    help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.step_probe is not None:
        run_step_probe(args.step_probe)
        return

    if ckernels is None:
        sys.exit("compiled kernels are not built; reinstall the package "
                 "(pip install -e .) before benchmarking")

    print("kernel backends: pure=ccead.tensor.pykernels  "
          "compiled=ccead.tensor.ckernels")
    print("parity is checked per kernel before timing; a listed speedup "
          "implies bitwise-identical outputs")
    print()
    run_kernel_table(args.min_time, args.repeats)
    if not args.skip_step:
        run_step_comparison(args.steps)


if __name__ == "__main__":
    main()
