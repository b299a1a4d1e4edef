"""Edit classification, distribution estimation, noise injection, and the
Gaussian keyboard generator."""

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from ccead.errors import ConfigError, EstimationError
from ccead.noise import (ErrorDistribution, KeyboardLayout, build_opentypo,
                         build_typo_dict, classify_edit,
                         estimate_error_distribution, gen_synthetic,
                         inject_noise, read_typo_pairs, split_pairs)

WORD = st.text(alphabet="abcdefgh", min_size=1, max_size=8)


class TestClassifyEdit:
    def test_substitution(self):
        rec = classify_edit("cst", "cat")
        assert (rec.kind, rec.position, rec.orig, rec.typo_char) == \
            ("sub", 1, "a", "s")

    def test_insertion_records_left_context(self):
        rec = classify_edit("wavve", "wave")
        assert rec.kind == "ins"
        assert rec.typo_char == "v"
        assert rec.context == "v"

    def test_insertion_at_word_start(self):
        rec = classify_edit("aword", "word")
        assert rec.kind == "ins"
        assert rec.context == " "

    def test_deletion(self):
        rec = classify_edit("wrd", "word")
        assert (rec.kind, rec.orig) == ("del", "o")

    def test_identical_and_multi_edit_rejected(self):
        assert classify_edit("same", "same") is None
        assert classify_edit("abcd", "dcba") is None
        assert classify_edit("ab", "abcd") is None

    @given(WORD, st.integers(min_value=0, max_value=7),
           st.sampled_from("abcdefgh"))
    def test_synthesized_substitution_recovered(self, word, pos, ch):
        pos = pos % len(word)
        if word[pos] == ch:
            return
        typo = word[:pos] + ch + word[pos + 1:]
        rec = classify_edit(typo, word)
        assert rec is not None and rec.kind == "sub"
        # reapplying the recorded edit reproduces the typo
        assert word[:rec.position] + rec.typo_char + \
            word[rec.position + 1:] == typo

    @given(WORD, st.integers(min_value=0, max_value=8),
           st.sampled_from("abcdefgh"))
    def test_synthesized_insertion_recovered(self, word, pos, ch):
        pos = pos % (len(word) + 1)
        typo = word[:pos] + ch + word[pos:]
        rec = classify_edit(typo, word)
        assert rec is not None and rec.kind == "ins"
        assert word[:rec.position] + rec.typo_char + \
            word[rec.position:] == typo

    @given(WORD, st.integers(min_value=0, max_value=7))
    def test_synthesized_deletion_recovered(self, word, pos):
        pos = pos % len(word)
        typo = word[:pos] + word[pos + 1:]
        rec = classify_edit(typo, word)
        assert rec is not None and rec.kind == "del"
        assert word[:rec.position] + word[rec.position + 1:] == typo


class TestEstimation:
    PAIRS = [("thw", "the"), ("helo", "hello"), ("wrld", "world"),
             ("cct", "cat"), ("catt", "cat"), ("teh", "the"),
             ("abcd", "dcba")]

    def test_counts_and_rejects(self):
        dist = estimate_error_distribution(self.PAIRS)
        # transpositions are two edits, so "teh" joins the outright mismatch
        assert dist.rejects == [("teh", "the"), ("abcd", "dcba")]
        assert dist.edit_type_prior["del"] == pytest.approx(2 / 5)
        assert dist.edit_type_prior["sub"] == pytest.approx(2 / 5)
        assert dist.edit_type_prior["ins"] == pytest.approx(1 / 5)

    def test_conditionals_normalized(self):
        dist = estimate_error_distribution(self.PAIRS)
        for row in dist.substitution.values():
            assert sum(row.values()) == pytest.approx(1.0)
        for row in dist.insertion.values():
            assert sum(row.values()) == pytest.approx(1.0)
        assert sum(dist.deletion.values()) == pytest.approx(1.0)

    def test_all_rejected_raises(self):
        with pytest.raises(EstimationError):
            estimate_error_distribution([("abcd", "dcba")])

    def test_save_load_roundtrip(self, tmp_path):
        dist = estimate_error_distribution(self.PAIRS)
        p = str(tmp_path / "noise.tsv")
        dist.save(p)
        again = ErrorDistribution.load(p)
        assert again.substitution == dist.substitution
        assert again.insertion == dist.insertion
        assert again.deletion == dist.deletion
        assert again.edit_type_prior == dist.edit_type_prior

    def test_escaped_characters_survive_roundtrip(self, tmp_path):
        pairs = [("a\tb", "a b"), ("x  y", "x y"), ("m\\n", "mn")]
        dist = estimate_error_distribution(pairs)
        p = str(tmp_path / "weird.tsv")
        dist.save(p)
        again = ErrorDistribution.load(p)
        assert again.substitution == dist.substitution
        assert again.insertion == dist.insertion

    def test_read_typo_pairs(self, tmp_path):
        p = tmp_path / "pairs.tsv"
        p.write_text("teh\tthe\nhelo\thello\n")
        assert read_typo_pairs(str(p)) == [("teh", "the"), ("helo", "hello")]

    def test_build_typo_dict_skips_phrases(self):
        d = build_typo_dict([("teh", "the"), ("ther e", "there"),
                             ("thw", "the")])
        assert d == {"the": ["teh", "thw"]}


@pytest.fixture(scope="module")
def dist():
    return estimate_error_distribution(TestEstimation.PAIRS[:-1])


class TestInjection:
    CLEAN = ["the cat sat on the mat", "hello world again",
             "a quick brown fox jumps over the lazy dog"] * 40

    def test_rate_zero_is_identity(self, dist):
        out = inject_noise(self.CLEAN, dist=dist, mode="sampled", rate=0.0,
                           seed=9)
        assert out == self.CLEAN

    def test_deterministic_per_seed(self, dist):
        a = inject_noise(self.CLEAN, dist=dist, mode="sampled", rate=0.1,
                         seed=4)
        b = inject_noise(self.CLEAN, dist=dist, mode="sampled", rate=0.1,
                         seed=4)
        c = inject_noise(self.CLEAN, dist=dist, mode="sampled", rate=0.1,
                         seed=5)
        assert a == b
        assert a != c

    def test_line_alignment_and_word_structure(self, dist):
        out = inject_noise(self.CLEAN, dist=dist, mode="sampled", rate=0.15,
                           seed=2)
        assert len(out) == len(self.CLEAN)
        for noisy, clean in zip(out, self.CLEAN):
            # spaces are never edited, so word counts survive
            assert len(noisy.split(" ")) == len(clean.split(" "))
            # deletions keep at least one character per word
            assert all(w for w in noisy.split(" "))

    def test_dict_mode_replaces_whole_words(self):
        typo_dict = {"the": ["teh"], "cat": ["cta"]}
        out = inject_noise(["the cat sat"], typo_dict=typo_dict, mode="dict",
                           rate=1.0, seed=0)
        assert out == ["teh cta sat"]

    def test_dict_mode_rate_zero(self):
        out = inject_noise(["the cat"], typo_dict={"the": ["teh"]},
                           mode="dict", rate=0.0, seed=0)
        assert out == ["the cat"]

    def test_mode_validation(self, dist):
        with pytest.raises(ConfigError):
            inject_noise(["x"], mode="nope")
        with pytest.raises(ConfigError):
            inject_noise(["x"], dist=dist, mode="sampled", rate=1.5)
        with pytest.raises(ConfigError):
            inject_noise(["x"], mode="sampled")  # needs a distribution

    def test_build_opentypo_splits(self):
        pairs = [("teh", "the"), ("helo", "hello"), ("wrld", "world")]
        splits = build_opentypo(self.CLEAN, pairs, seed=3, rate=0.8)
        total = len(splits.train) + len(splits.dev) + len(splits.test)
        assert total == len(self.CLEAN)
        assert len(splits.train) == int(0.9 * len(self.CLEAN))
        for noisy, clean in splits.train[:5]:
            assert len(noisy.split()) == len(clean.split())


class TestKeyboard:
    def test_row_geometry(self):
        kb = KeyboardLayout()
        assert kb.center("q") == (0.0, 0.0)
        assert kb.center("p") == (9.0, 0.0)
        assert kb.center("a") == (0.25, 1.0)
        assert kb.center("z") == (0.75, 2.0)
        assert kb.center("m") == (6.75, 2.0)
        assert kb.center(" ") == (4.0, 3.0)

    def test_nearest_at_center_is_identity(self):
        kb = KeyboardLayout()
        for ch in "qwertyuiopasdfghjklzxcvbnm":
            x, y = kb.center(ch)
            assert kb.nearest(x, y) == ch

    def test_nearest_tie_breaks_to_lowest(self):
        kb = KeyboardLayout()
        # midpoint between q (0,0) and w (1,0)
        assert kb.nearest(0.5, 0.0) == "q"

    def test_space_excluded_unless_asked(self):
        kb = KeyboardLayout()
        assert kb.nearest(4.0, 3.0) != " "
        assert kb.nearest(4.0, 3.0, include_space=True) == " "

    def test_gen_synthetic_shape_and_determinism(self):
        words = ["hello", "world"]
        a = gen_synthetic(words, sigma=0.5, seed=1, variants_per_word=5)
        b = gen_synthetic(words, sigma=0.5, seed=1, variants_per_word=5)
        assert a == b
        assert len(a) == 10
        assert all(truth in words for _, truth in a)
        assert all(len(noisy) == len(truth) for noisy, truth in a)

    def test_gen_synthetic_small_sigma_barely_corrupts(self):
        pairs = gen_synthetic(["keyboard"], sigma=0.05, seed=2,
                              variants_per_word=50)
        assert all(noisy == "keyboard" for noisy, _ in pairs)

    def test_gen_synthetic_passthrough_chars(self):
        pairs = gen_synthetic(["don't"], sigma=0.01, seed=0,
                              variants_per_word=3)
        assert all(noisy == "don't" for noisy, _ in pairs)

    def test_gen_synthetic_validation(self):
        with pytest.raises(ConfigError):
            gen_synthetic([], sigma=1.0)
        with pytest.raises(ConfigError):
            gen_synthetic(["a"], sigma=0.0)

    def test_sigma_one_error_rate_plausible(self):
        # at sigma=1 the nearest-key identity should hold well under half
        # the time but far above never; loose envelope, seeded
        kb = KeyboardLayout()
        rng = random.Random(11)
        hits = 0
        n = 4000
        for _ in range(n):
            ch = rng.choice("qwertyuiopasdfghjklzxcvbnm")
            cx, cy = kb.center(ch)
            if kb.nearest(rng.gauss(cx, 1.0), rng.gauss(cy, 1.0)) == ch:
                hits += 1
        assert 0.15 < hits / n < 0.45


class TestSplits:
    def test_partition_is_exact_and_seeded(self):
        pairs = [(str(i), str(i)) for i in range(200)]
        s1 = split_pairs(pairs, seed=7)
        s2 = split_pairs(pairs, seed=7)
        assert s1.train == s2.train and s1.dev == s2.dev and s1.test == s2.test
        assert len(s1.train) == 180 and len(s1.dev) == 10 and len(s1.test) == 10
        together = sorted(s1.train + s1.dev + s1.test)
        assert together == sorted(pairs)

    def test_fraction_validation(self):
        with pytest.raises(ConfigError):
            split_pairs([("a", "a")], fractions=(0.5, 0.2, 0.2))
