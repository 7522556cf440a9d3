import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from phasemark import payload as pl
from phasemark.payload import KeySet

logos = arrays(np.uint8, (pl.LOGO_HEIGHT, pl.LOGO_WIDTH), elements=st.integers(0, 1))


def reference_xorshift(seed, count):
    x = seed or 0x9E3779B9
    out = []
    for _ in range(count):
        x ^= (x << 13) % 2**32
        x ^= x >> 17
        x ^= (x << 5) % 2**32
        out.append(x)
    return out


class TestPN:
    def test_published_first_output(self):
        # first xorshift32 output for Marsaglia's example seed
        assert pl.xorshift32_words(2463534242, 1) == [723471715]

    @pytest.mark.parametrize("seed", [1, 2, 12345, 2**32 - 1])
    def test_matches_reference(self, seed):
        assert pl.xorshift32_words(seed, 50) == reference_xorshift(seed, 50)

    def test_msb_first(self):
        word = pl.xorshift32_words(7, 1)[0]
        expected = [(word >> (31 - k)) & 1 for k in range(32)]
        assert pl.pn_bits(7, 32).tolist() == expected

    def test_zero_seed_is_not_degenerate(self):
        bits = pl.pn_bits(0)
        assert 600 < bits.sum() < 1000

    def test_length(self):
        assert pl.pn_pattern(KeySet()).shape == (36, 44)


class TestKeySet:
    def test_defaults(self):
        k = KeySet()
        assert (k.pn_scramble_seed, k.block_order_seed, k.frame_select_seed) == (2, 0, 0)

    @pytest.mark.parametrize("bad", [-1, 2**32])
    def test_range(self, bad):
        with pytest.raises(ValueError):
            KeySet(pn_scramble_seed=bad)


class TestScramble:
    @settings(max_examples=50, deadline=None)
    @given(logos, st.integers(0, 2**32 - 1))
    def test_involution(self, logo, seed):
        k = KeySet(seed)
        assert np.array_equal(pl.descramble(pl.scramble(logo, k), k), logo)

    def test_zero_logo_gives_pattern(self):
        k = KeySet(99)
        assert np.array_equal(pl.scramble(np.zeros((36, 44), np.uint8), k), pl.pn_pattern(k))

    def test_distinct_seeds_are_uncorrelated(self):
        logo = np.zeros((36, 44), np.uint8)
        seeds = np.random.default_rng(5).integers(1, 2**32, (100, 2))
        dists = [
            int((pl.scramble(logo, KeySet(int(a))) != pl.scramble(logo, KeySet(int(b)))).sum())
            for a, b in seeds
        ]
        sigma = np.sqrt(1584 * 0.25)
        assert all(abs(d - 792) < 3.5 * sigma for d in dists)
        assert abs(np.mean(dists) - 792) < 3 * sigma / np.sqrt(100)

    def test_patterns_are_linear_in_the_seed(self):
        # xorshift is linear over GF(2): the pattern of a ^ b is the XOR of both patterns
        a, b = 0x1234, 0xBEEF
        assert np.array_equal(pl.pn_bits(a) ^ pl.pn_bits(b), pl.pn_bits(a ^ b))

    @pytest.mark.parametrize("shape", [(30, 40), (44, 36)])
    def test_wrong_shape(self, shape):
        with pytest.raises(ValueError, match="36x44"):
            pl.scramble(np.zeros(shape, np.uint8), KeySet())

    def test_non_binary(self):
        logo = np.zeros((36, 44), np.uint8)
        logo[0, 0] = 2
        with pytest.raises(ValueError):
            pl.validate_logo(logo)


class TestSpread:
    def test_codewords(self):
        assert pl.spread_bits([1]).tolist() == [1, -1, 1]
        assert pl.spread_bits([0]).tolist() == [-1, 1, -1]

    def test_full_length_enforced(self):
        with pytest.raises(ValueError):
            pl.spread(np.ones(10))
        assert pl.spread(np.ones(1584)).size == 4752

    def test_exhaustive_10_bit_round_trip(self):
        for bits in itertools.product((0, 1), repeat=10):
            out, conf = pl.despread_chips(pl.spread_bits(bits))
            assert out.tolist() == list(bits)
            assert np.all(conf == 1.0)

    @pytest.mark.parametrize("bit", [0, 1])
    @pytest.mark.parametrize("pos", [0, 1, 2])
    def test_single_flip_corrected(self, bit, pos):
        chips = pl.spread_bits([bit]).astype(float)
        chips[pos] = -chips[pos]
        out, conf = pl.despread_chips(chips)
        assert out[0] == bit
        assert conf[0] == pytest.approx(1 / 3)

    def test_all_minus_ones(self):
        out, conf = pl.despread_chips([-1, -1, -1])
        assert out[0] == 0
        assert conf[0] == pytest.approx(1 / 3)

    def test_tie_resolves_to_one(self):
        out, conf = pl.despread_chips([0.0, 0.0, 0.0])
        assert out[0] == 1 and conf[0] == 0

    def test_bad_lengths(self):
        with pytest.raises(ValueError):
            pl.despread_chips(np.ones(4))
        with pytest.raises(ValueError):
            pl.despread(np.ones(30))


class TestRaster:
    def test_round_trip(self, rng):
        logo = rng.integers(0, 2, (36, 44)).astype(np.uint8)
        assert np.array_equal(pl.raster_deserialize(pl.raster_serialize(logo)), logo)

    @pytest.mark.parametrize("pos, index", [((0, 1), 1), ((1, 0), 44), ((35, 43), 1583)])
    def test_row_major(self, pos, index):
        logo = np.zeros((36, 44), np.uint8)
        logo[pos] = 1
        assert np.flatnonzero(pl.raster_serialize(logo)).tolist() == [index]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            pl.raster_deserialize(np.zeros(100))


class TestCodec:
    @settings(max_examples=30, deadline=None)
    @given(logos, st.integers(0, 2**32 - 1))
    def test_encode_decode(self, logo, seed):
        k = KeySet(seed)
        out, conf = pl.decode_chips(pl.encode_logo(logo, k), k)
        assert np.array_equal(out, logo)
        assert np.all(conf == 1.0)

    def test_wrong_key_is_near_chance(self, logo):
        out, _ = pl.decode_chips(pl.encode_logo(logo, KeySet(5)), KeySet(6))
        assert 650 < (out != logo).sum() < 950


class TestPBM:
    @pytest.mark.parametrize("plain", [False, True])
    def test_round_trip(self, tmp_path, logo, plain):
        path = tmp_path / "logo.pbm"
        pl.write_pbm(path, logo, plain=plain)
        assert np.array_equal(pl.load_logo(path), logo)

    def test_comments_and_odd_width(self, tmp_path):
        path = tmp_path / "c.pbm"
        path.write_text("P1\n# a comment\n3 2\n1 0 1\n0 1 0\n")
        assert pl.read_pbm(path).tolist() == [[1, 0, 1], [0, 1, 0]]
        pl.write_pbm(tmp_path / "r.pbm", np.array([[1, 0, 1], [0, 1, 0]]))
        assert pl.read_pbm(tmp_path / "r.pbm").tolist() == [[1, 0, 1], [0, 1, 0]]

    def test_wrong_size_logo(self, tmp_path):
        path = tmp_path / "small.pbm"
        pl.write_pbm(path, np.zeros((30, 40), np.uint8))
        with pytest.raises(ValueError, match="40x30"):
            pl.load_logo(path)

    def test_not_pbm(self, tmp_path):
        path = tmp_path / "x.pbm"
        path.write_bytes(b"P5\n1 1\n255\n\x00")
        with pytest.raises(ValueError):
            pl.read_pbm(path)
