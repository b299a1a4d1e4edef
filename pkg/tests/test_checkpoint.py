"""Binary checkpoint format: byte-exact round trips and corruption handling."""

import hashlib
import struct

import pytest

from ccead import CHECKPOINT_MAGIC
from ccead.checkpoint import load_checkpoint, save_checkpoint
from ccead.config import ModelConfig
from ccead.errors import CheckpointError
from ccead.model import Model, load_model, save_model
from ccead.textcodec import WordVocab


def sha(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


@pytest.fixture
def sample(tmp_path):
    path = str(tmp_path / "t.ckpt")
    tensors = {
        "b.bias": ((3,), [0.25, -1.5, 2.0]),
        "a.weight": ((2, 2), [1.0, 0.5, -0.5, 0.0]),
    }
    save_checkpoint(path, {"hidden": "8", "note": "x=y"}, tensors)
    return path


class TestRawFormat:
    def test_header_layout(self, sample):
        blob = open(sample, "rb").read()
        assert blob[:6] == CHECKPOINT_MAGIC
        version, = struct.unpack("<I", blob[6:10])
        assert version == 1

    def test_roundtrip_values_and_order(self, sample):
        config, tensors = load_checkpoint(sample)
        assert config == {"hidden": "8", "note": "x=y"}
        # names come back sorted
        assert list(tensors) == ["a.weight", "b.bias"]
        shape, data = tensors["b.bias"]
        assert shape == (3,)
        assert list(data) == [0.25, -1.5, 2.0]

    def test_save_load_save_is_byte_identical(self, sample, tmp_path):
        config, tensors = load_checkpoint(sample)
        again = str(tmp_path / "again.ckpt")
        save_checkpoint(again, config, tensors)
        assert sha(again) == sha(sample)

    def test_f32_quantization_is_sticky(self, sample, tmp_path):
        # first save rounds f64 to f32; after that the values are fixed
        _, tensors = load_checkpoint(sample)
        perturbed = {n: (s, [v for v in d]) for n, (s, d) in tensors.items()}
        path2 = str(tmp_path / "p.ckpt")
        save_checkpoint(path2, {}, perturbed)
        _, back = load_checkpoint(path2)
        for name in perturbed:
            assert list(back[name][1]) == list(tensors[name][1])

    def test_bad_magic_rejected(self, sample, tmp_path):
        blob = bytearray(open(sample, "rb").read())
        blob[0] ^= 0xFF
        bad = tmp_path / "bad.ckpt"
        bad.write_bytes(bytes(blob))
        with pytest.raises(CheckpointError, match="magic"):
            load_checkpoint(str(bad))

    def test_unknown_version_rejected(self, sample, tmp_path):
        blob = bytearray(open(sample, "rb").read())
        blob[6:10] = struct.pack("<I", 99)
        bad = tmp_path / "v99.ckpt"
        bad.write_bytes(bytes(blob))
        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(str(bad))

    def test_truncation_detected(self, sample, tmp_path):
        blob = open(sample, "rb").read()
        for cut in (4, 9, len(blob) // 2, len(blob) - 1):
            bad = tmp_path / ("cut%d.ckpt" % cut)
            bad.write_bytes(blob[:cut])
            with pytest.raises(CheckpointError):
                load_checkpoint(str(bad))

    def test_trailing_garbage_detected(self, sample, tmp_path):
        bad = tmp_path / "extra.ckpt"
        bad.write_bytes(open(sample, "rb").read() + b"\x00")
        with pytest.raises(CheckpointError):
            load_checkpoint(str(bad))

    def test_empty_dim_rejected_on_save(self, tmp_path):
        with pytest.raises(CheckpointError):
            save_checkpoint(str(tmp_path / "z.ckpt"), {},
                            {"w": ((0,), [])})

    def test_size_mismatch_rejected_on_save(self, tmp_path):
        with pytest.raises(CheckpointError):
            save_checkpoint(str(tmp_path / "z.ckpt"), {},
                            {"w": ((2,), [1.0, 2.0, 3.0])})


class TestModelCheckpoints:
    def test_model_roundtrip_preserves_everything(self, tmp_path, tiny_vocab):
        cfg = ModelConfig(word_vocab=len(tiny_vocab), embed_dim=6, hidden=8,
                          char_window=20, word_window=3, filters=2,
                          widths=(2, 3), dropout=0.0)
        model = Model(cfg, seed=5)
        path = str(tmp_path / "m.ckpt")
        save_model(path, model, tiny_vocab, extra={"epoch": "7"})
        loaded, vocab2, extras = load_model(path)
        assert vocab2.words == tiny_vocab.words
        assert extras["metadata"]["epoch"] == "7"
        assert loaded.config == model.config
        # weights survive modulo the f32 storage grid
        for name, p in model.named_params().items():
            q = loaded.named_params()[name]
            assert q.shape == p.shape
            assert max(abs(a - b) for a, b in zip(p.data, q.data)) < 1e-6

    def test_double_save_of_loaded_model_identical(self, mini_checkpoint,
                                                   tmp_path):
        model, vocab, extras = load_model(mini_checkpoint)
        path2 = str(tmp_path / "re.ckpt")
        extra = {k: v for k, v in extras["metadata"].items()
                 if k not in ("saved_extras",)}
        save_model(path2, model, vocab, extra=extra,
                   moments=extras.get("moments") or None)
        assert sha(path2) == sha(mini_checkpoint)

    def test_moments_roundtrip(self, tmp_path, tiny_vocab):
        cfg = ModelConfig(word_vocab=len(tiny_vocab), embed_dim=6, hidden=8,
                          char_window=20, word_window=3, filters=2,
                          widths=(2, 3), dropout=0.0)
        model = Model(cfg, seed=5)
        moments = {}
        for name, p in model.named_params().items():
            n = len(p.data)
            moments["m." + name] = (p.shape, [0.125] * n)
            moments["v." + name] = (p.shape, [0.5] * n)
        path = str(tmp_path / "m.ckpt")
        save_model(path, model, tiny_vocab, moments=moments)
        _, _, extras = load_model(path)
        got = extras["moments"]
        assert set(got) == set(moments)
        name = sorted(got)[0]
        assert list(got[name][1]) == list(moments[name][1])

    def test_missing_tensor_rejected(self, mini_checkpoint, tmp_path):
        config, tensors = load_checkpoint(mini_checkpoint)
        victim = sorted(t for t in tensors if not t.startswith("adam."))[0]
        del tensors[victim]
        bad = str(tmp_path / "missing.ckpt")
        save_checkpoint(bad, config, tensors)
        with pytest.raises(CheckpointError, match="missing"):
            load_model(bad)

    def test_shape_mismatch_rejected(self, mini_checkpoint, tmp_path):
        config, tensors = load_checkpoint(mini_checkpoint)
        victim = sorted(t for t in tensors
                        if not t.startswith("adam.")
                        and len(tensors[t][0]) > 1)[0]
        shape, data = tensors[victim]
        tensors[victim] = ((len(data),), data)
        bad = str(tmp_path / "shape.ckpt")
        save_checkpoint(bad, config, tensors)
        with pytest.raises(CheckpointError, match="shape"):
            load_model(bad)

    def test_vocab_words_embedded(self, mini_checkpoint):
        config, _ = load_checkpoint(mini_checkpoint)
        words = config["vocab_words"].split("\x1f")
        assert words[:4] == ["<PAD>", "<GO>", "<EOS>", "<UNK>"]
        vocab = WordVocab(words)
        assert vocab.words == words
