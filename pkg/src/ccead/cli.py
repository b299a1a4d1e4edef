"""Command-line entry points for the data pipeline, training, evaluation,
one-shot correction, and the inference server."""

import argparse
import logging
import os
import sys

from . import __version__
from .config import ModelConfig, TrainConfig, load_flat
from .errors import CceadError, ConfigError
from .model import Model, correct_once, load_model
from .noise import (ErrorDistribution, build_typo_dict, estimate_error_distribution,
                    gen_synthetic, inject_noise, read_typo_pairs, split_pairs)
from .textcodec import CHAR_TABLE, WordVocab
from .trainer import evaluate, evaluate_identity, make_training_pairs, train

log = logging.getLogger(__name__)


def _read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def _write_lines(lines, path):
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def _checkpoint_arg(args):
    path = args.checkpoint or os.environ.get("CCEAD_CHECKPOINT")
    if not path:
        raise ConfigError("no checkpoint: pass --checkpoint or set CCEAD_CHECKPOINT")
    return path


def cmd_build_noise(args):
    pairs = read_typo_pairs(args.pairs)
    dist = estimate_error_distribution(pairs)
    dist.save(args.out)
    print("estimated from %d pairs (%d rejected as multi-edit)"
          % (len(pairs) - len(dist.rejects), len(dist.rejects)))
    return 0


def cmd_inject(args):
    clean = _read_lines(args.clean)
    typo_dict = None
    dist = None
    if args.mode == "dict":
        if not args.pairs:
            raise ConfigError("dict mode needs --pairs")
        typo_dict = build_typo_dict(read_typo_pairs(args.pairs))
    else:
        if not args.noise:
            raise ConfigError("sampled mode needs --noise")
        dist = ErrorDistribution.load(args.noise)
    noisy = inject_noise(clean, typo_dict=typo_dict, dist=dist,
                         mode=args.mode, rate=args.rate, seed=args.seed)
    _write_lines(noisy, args.out)
    print("wrote %d lines to %s" % (len(noisy), args.out))
    return 0


def cmd_gen_synthetic(args):
    words = [w for w in _read_lines(args.words) if w.strip()]
    pairs = gen_synthetic(words, sigma=args.sigma, seed=args.seed,
                          variants_per_word=args.variants)
    _write_lines(["%s\t%s" % (noisy, word) for noisy, word in pairs], args.out)
    print("wrote %d pairs to %s" % (len(pairs), args.out))
    return 0


def cmd_build_vocab(args):
    vocab = WordVocab.build(_read_lines(args.corpus), capacity=args.vocab_size)
    vocab.save(args.out)
    print("vocabulary of %d tokens written to %s" % (len(vocab), args.out))
    return 0


def cmd_train(args):
    flat = load_flat(args.config)
    noisy = _read_lines(args.noisy)
    clean = _read_lines(args.clean)
    if args.seed is not None:
        flat["seed"] = str(args.seed)
    tconfig = TrainConfig.from_flat(flat)
    # word_vocab in the config is the capacity; the built size may be smaller
    capacity = int(flat["word_vocab"]) if "word_vocab" in flat else args.vocab_size
    vocab = WordVocab.build(clean, capacity=capacity)
    flat["word_vocab"] = str(len(vocab))
    mconfig = ModelConfig.from_flat(flat)
    splits = split_pairs(list(zip(noisy, clean)), seed=tconfig.seed)
    train_noisy = [n for n, _ in splits.train]
    train_clean = [c for _, c in splits.train]
    pairs = make_training_pairs(train_noisy, train_clean, vocab, mconfig)
    model = Model(mconfig, seed=tconfig.seed)
    ckpt = _checkpoint_arg(args)
    result = train(model, vocab, pairs, splits.dev, tconfig,
                   checkpoint_path=ckpt, log_path=ckpt + ".log")
    final = result.final
    print("trained %d epochs over %d pairs; best dev word acc %.4f (epoch %d)"
          % (final.epoch, len(pairs), result.best_dev_word_acc,
             result.best_epoch))
    print("checkpoint: %s  metric log: %s.log" % (ckpt, ckpt))
    return 0


def cmd_eval(args):
    noisy = _read_lines(args.noisy)
    clean = _read_lines(args.clean)
    line_pairs = list(zip(noisy, clean))
    if args.identity:
        report = evaluate_identity(line_pairs)
    else:
        model, vocab, _ = load_model(_checkpoint_arg(args))
        report = evaluate(model, vocab, line_pairs)
    print("\t".join(report.SUMMARY_COLUMNS))
    print("%.6f\t%.6f\t%.6f\t%s\t%s\t%d" % (
        report.cer_percent, report.word_accuracy, report.sequence_accuracy,
        "" if report.s_cer is None else "%.6f" % report.s_cer,
        "" if report.s_cer_negated is None else "%.6f" % report.s_cer_negated,
        report.sample_count))
    if args.out:
        report.save(args.out, args.positions)
    return 0


def cmd_correct(args):
    model, vocab, _ = load_model(_checkpoint_arg(args))
    corrected, completions, _ = correct_once(
        model, vocab, args.text, args.max_completions)
    print(corrected)
    if completions:
        print(" ".join(completions))
    return 0


def cmd_serve(args):
    from .server import serve
    logging.basicConfig(level=logging.INFO)
    serve(_checkpoint_arg(args), args.port, host=args.host,
          timeout=args.timeout)
    return 0


def cmd_export_embeddings(args):
    from .encoder import export_embeddings
    model, vocab, _ = load_model(_checkpoint_arg(args))
    if args.table == "char":
        export_embeddings(model.enc.e_c, list(CHAR_TABLE), args.out)
    else:
        export_embeddings(model.dec.e_w, vocab.words, args.out)
    print("wrote %s embeddings to %s" % (args.table, args.out))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ccead",
        description="Keyboard text correction and completion toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-noise",
                       help="estimate an error distribution from typo pairs")
    p.add_argument("pairs", help="TSV of typo<TAB>correction pairs")
    p.add_argument("out", help="output distribution file")
    p.set_defaults(func=cmd_build_noise)

    p = sub.add_parser("inject", help="add noise to a clean corpus")
    p.add_argument("clean", help="clean corpus, one sentence per line")
    p.add_argument("out", help="noisy corpus output path")
    p.add_argument("--mode", choices=("dict", "sampled"), default="dict")
    p.add_argument("--pairs", help="typo pair TSV (dict mode)")
    p.add_argument("--noise", help="error distribution file (sampled mode)")
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("gen-synthetic",
                       help="generate Gaussian-keyboard typing variants")
    p.add_argument("words", help="word list, one per line")
    p.add_argument("out", help="output TSV of noisy<TAB>word pairs")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variants", type=int, default=27)
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("build-vocab", help="build a word vocabulary")
    p.add_argument("corpus", help="text corpus, one sentence per line")
    p.add_argument("out", help="vocabulary output path")
    p.add_argument("--vocab-size", type=int, default=50000)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("noisy", help="noisy corpus aligned with clean")
    p.add_argument("clean", help="clean corpus")
    p.add_argument("--config", required=True, help="flat key=value config file")
    p.add_argument("--checkpoint", help="output checkpoint path")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.add_argument("--vocab-size", type=int, default=50000)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on aligned corpora")
    p.add_argument("noisy")
    p.add_argument("clean")
    p.add_argument("--checkpoint")
    p.add_argument("--identity", action="store_true",
                   help="score the echo model instead of a checkpoint")
    p.add_argument("--out", help="write the summary TSV here")
    p.add_argument("--positions", help="write the per-position table here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("correct", help="correct one line of text")
    p.add_argument("text")
    p.add_argument("--checkpoint")
    p.add_argument("--max-completions", type=int, default=0)
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("serve", help="run the HTTP inference service")
    p.add_argument("--checkpoint")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--timeout", type=float, default=10.0,
                   help="per-request decode budget in seconds")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export-embeddings",
                       help="dump learned embeddings as TSV")
    p.add_argument("out")
    p.add_argument("--checkpoint")
    p.add_argument("--table", choices=("char", "word"), default="char")
    p.set_defaults(func=cmd_export_embeddings)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CceadError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
