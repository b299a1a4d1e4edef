import random

import pytest

from ccead.config import ModelConfig, TrainConfig
from ccead.model import Model
from ccead.textcodec import WordVocab
from ccead.trainer import make_training_pairs, train

CLEAN_LINES = [
    "hello world how are you",
    "the cat sat on the mat",
    "please send the report",
    "thanks i will call you",
    "see you at the office",
    "what time works for you",
    "call me when you can",
    "the report is ready now",
]
NOISY_LINES = [
    "helo wrld how are yuo",
    "the cta sat on hte mat",
    "plese send teh reprot",
    "thanka i will cal you",
    "see yuo at the ofice",
    "waht time wrks for you",
    "cal me wehn you can",
    "teh reprot is redy now",
]


@pytest.fixture(scope="session")
def tiny_corpus():
    return list(NOISY_LINES), list(CLEAN_LINES)


@pytest.fixture(scope="session")
def tiny_vocab():
    return WordVocab.build(CLEAN_LINES, capacity=64)


@pytest.fixture(scope="session")
def mini_config(tiny_vocab):
    return ModelConfig(word_vocab=len(tiny_vocab), embed_dim=12, hidden=16,
                       char_window=30, word_window=5, filters=3, dropout=0.1)


@pytest.fixture(scope="session")
def mini_checkpoint(tmp_path_factory, tiny_vocab, mini_config):
    """A small model overfit on the fixture corpus, saved to disk once."""
    model = Model(mini_config, seed=1)
    pairs = make_training_pairs(NOISY_LINES, CLEAN_LINES, tiny_vocab,
                                mini_config)
    path = str(tmp_path_factory.mktemp("ckpt") / "mini.ckpt")
    tconfig = TrainConfig(learning_rate=0.01, batch_size=4, epochs=60, seed=3)
    train(model, tiny_vocab, pairs, list(zip(NOISY_LINES, CLEAN_LINES)),
          tconfig, checkpoint_path=path)
    return path


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get(
        "tests.test_acceptance")
    results = getattr(mod, "RESULTS", [])
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion, ok, detail in results:
        tr.write_line("%s: %s  (%s)" % (criterion, "PASS" if ok else "FAIL",
                                        detail))
