"""Recurrence and convolution head against scalar references, plus the
state fusion and embedding export."""

import math
import random

import pytest

import ccead.tensor as T
from ccead.encoder import (ConvBank, EncoderParams, GruParams,
                           cnn_activations, encode, export_embeddings,
                           gru_step, run_cnn)
from ccead.errors import DimensionError
from ccead.tensor.core import nelem
from ccead.textcodec import encode_chars

import oracles


def _fill(t, rng):
    for i in range(nelem(t.shape)):
        t.data[i] = rng.uniform(-0.8, 0.8)


def _rows(t):
    rows, cols = t.shape
    flat = t.tolist()
    return [flat[r * cols:(r + 1) * cols] for r in range(rows)]


def _mat(t):
    return _rows(t)


class TestGruStep:
    def test_matches_scalar_reference(self, rng):
        E, H, B = 3, 4, 2
        p = GruParams.init(E, H, random.Random(5), "g")
        for t in (p.w_hx, p.u_hh, p.b_h, p.w_ux, p.u_uu, p.b_u,
                  p.w_rx, p.u_rr, p.b_r):
            _fill(t, rng)
        x = T.leaf([rng.uniform(-1, 1) for _ in range(B * E)], (B, E))
        h = T.leaf([rng.uniform(-1, 1) for _ in range(B * H)], (B, H))
        got = _rows(gru_step(x, h, p))
        xs, hs = _rows(x), _rows(h)
        for b in range(B):
            want = oracles.gru_step_ref(
                xs[b], hs[b], _mat(p.w_hx), _mat(p.u_hh), p.b_h.tolist(),
                _mat(p.w_ux), _mat(p.u_uu), p.b_u.tolist(),
                _mat(p.w_rx), _mat(p.u_rr), p.b_r.tolist())
            assert got[b] == pytest.approx(want, abs=1e-12)

    def test_zero_parameters_halve_the_state(self):
        # u = r = sigmoid(0) = 0.5 and the candidate is tanh(0) = 0,
        # so the next state is exactly half the previous one
        E, H = 2, 3
        p = GruParams.init(E, H, random.Random(0), "g")
        for t in (p.w_hx, p.u_hh, p.b_h, p.w_ux, p.u_uu, p.b_u,
                  p.w_rx, p.u_rr, p.b_r):
            for i in range(nelem(t.shape)):
                t.data[i] = 0.0
        x = T.leaf([5.0, -2.0], (1, E))
        h = T.leaf([0.8, -0.4, 0.2], (1, H))
        out = gru_step(x, h, p)
        assert out.tolist() == pytest.approx([0.4, -0.2, 0.1])


class TestConvHead:
    def test_bank_flat_size(self):
        bank = ConvBank.init((2, 3), 4, 5, window=10, hidden=6,
                             rng=random.Random(1), prefix="c")
        # width 2 gives 9 positions, width 3 gives 8, times 4 filters
        assert bank.w_fc.shape == (6, (9 + 8) * 4)

    def test_max_width_must_fit_window(self):
        with pytest.raises(DimensionError):
            ConvBank.init((2, 12), 2, 4, window=10, hidden=6,
                          rng=random.Random(1), prefix="c")

    def test_cnn_output_matches_manual_assembly(self, rng):
        E, H, B, W = 3, 5, 2, 8
        p = EncoderParams.init(12, E, H, W, (2, 3), 2, random.Random(3))
        ids = [rng.randrange(12) for _ in range(B * W)]
        embedded = T.embed(p.e_c, T.int_vec(ids), (B, W))
        got = run_cnn(embedded, p)
        assert got.shape == (B, H)
        flats = []
        for f in p.conv.filters:
            conv = T.conv1d(embedded, f, 1)
            Bc, L, F = conv.shape
            flats.append(T.reshape(conv, (Bc, L * F)))
        joined = flats[0]
        for extra in flats[1:]:
            joined = T.concat(joined, extra)
        want = T.linear(joined, p.conv.w_fc, p.conv.b_fc)
        assert got.tolist() == pytest.approx(want.tolist(), abs=0)

    def test_activation_map_shapes(self):
        W = 10
        p = EncoderParams.init(69, 4, 6, W, (2, 3, 4, 5), 3, random.Random(2))
        ids = encode_chars("hello", W)
        acts = cnn_activations(T.int_vec(ids), W, p)
        assert sorted(acts) == [2, 3, 4, 5]
        for width, rows in acts.items():
            assert len(rows) == W - width + 1
            assert all(len(r) == 3 for r in rows)


class TestEncode:
    def test_shapes_and_fusion_linearity(self, rng):
        W, E, H, B = 12, 4, 6, 3
        p = EncoderParams.init(69, E, H, W, (2, 3), 2, random.Random(8))
        ids = []
        for _ in range(B):
            ids.extend(encode_chars("abc", W))
        out = encode(T.int_vec(ids), B, W, p)
        assert out.h_seq.shape == (B, W, H)
        assert out.s0.shape == (B, H)
        # fusion is affine: doubling w_f and b_f doubles s0 exactly
        for t in (p.w_f, p.b_f):
            for i in range(nelem(t.shape)):
                t.data[i] *= 2.0
        out2 = encode(T.int_vec(ids), B, W, p)
        assert out2.s0.tolist() == pytest.approx(
            [2.0 * v for v in out.s0.tolist()], rel=1e-12)

    def test_dropout_only_when_training(self, rng):
        W, E, H = 10, 3, 4
        p = EncoderParams.init(69, E, H, W, (2,), 2, random.Random(4))
        ids = T.int_vec(encode_chars("hi", W))
        a = encode(ids, 1, W, p, dropout_rate=0.9, rng=rng, training=False)
        b = encode(ids, 1, W, p)
        assert a.s0.tolist() == b.s0.tolist()
        c = encode(ids, 1, W, p, dropout_rate=0.9,
                   rng=random.Random(1), training=True)
        assert c.s0.tolist() != b.s0.tolist()


class TestEmbeddingExport:
    def test_tsv_with_escaped_labels(self, tmp_path):
        table = T.leaf([0.25, -0.5, 1.0, 2.0, 3.5, -1.25], (3, 2))
        path = str(tmp_path / "emb.tsv")
        export_embeddings(table, ["a", " ", "\t"], path)
        lines = open(path).read().splitlines()
        assert len(lines) == 3
        assert lines[0].split("\t") == ["a", "0.25", "-0.5"]
        assert lines[1].split("\t")[0] == "<SPACE>"
        assert lines[2].split("\t")[0] == "<TAB>"
