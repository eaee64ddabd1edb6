"""
Unit tests for Bernoulli further-encoding and its payload.
"""

import unittest

import numpy as np

from qcslab.errors import InvalidArgumentError, PayloadError
from qcslab.models.encoder import Encoder
from qcslab.models.quantization import MidriseAlphabet
from qcslab.services.encode import (
    PAYLOAD_MAGIC,
    bits_required,
    code_width,
    decode_payload,
    decoded_measurements,
    direct_bits,
    encode,
    encode_payload,
    encoder_rotation,
    make_encoder,
    norm_event_frequency,
    payload_integers,
    singular_value_event_frequency,
)
from qcslab.services.operators import diff_inv_matrix
from qcslab.services.quantize import quantize_measurements
from qcslab.services.serialization import unframe
from qcslab.services.theory import encoded_rows


def _random_q(rng, m, alphabet):
    return alphabet.values(rng.integers(1, alphabet.size + 1, size=m))


class TestEncoder(unittest.TestCase):
    """Tests for the encoder matrix and E(q)."""

    def test_entries_and_determinism(self):
        a = make_encoder(8, 20, 1, seed=5)
        b = make_encoder(8, 20, 1, seed=5)
        self.assertTrue(np.array_equal(a.B, b.B))
        self.assertTrue(np.all(np.isin(a.B, [-1.0, 1.0])))
        self.assertEqual((a.L, a.m), (8, 20))

    def test_more_rows_than_columns(self):
        with self.assertRaises(InvalidArgumentError):
            make_encoder(21, 20, 1, seed=0)
        with self.assertRaises(InvalidArgumentError):
            Encoder(np.ones((3, 2)), 1)

    def test_entries_must_be_signs(self):
        with self.assertRaises(InvalidArgumentError):
            Encoder(np.array([[1.0, 0.5]]), 1)

    def test_zero_input(self):
        enc = make_encoder(4, 10, 2, seed=1)
        self.assertTrue(np.array_equal(encode(enc, np.zeros(10)), np.zeros(4)))

    def test_all_ones_row(self):
        """One all-ones row, r = 1, q = δ·1: δ m(m+1)/2."""
        m, delta = 9, 0.1
        enc = Encoder(np.ones((1, m)), 1)
        self.assertAlmostEqual(encode(enc, delta * np.ones(m))[0], delta * m * (m + 1) / 2)

    def test_linearity(self):
        rng = np.random.default_rng(2)
        enc = make_encoder(6, 15, 2, seed=2)
        q1, q2 = rng.standard_normal(15), rng.standard_normal(15)
        self.assertLess(np.max(np.abs(encode(enc, q1 + q2) - encode(enc, q1) - encode(enc, q2))), 1e-12)

    def test_sup_norm_bound(self):
        rng = np.random.default_rng(3)
        alphabet = MidriseAlphabet(0.1, 3)
        for r in (1, 2):
            enc = make_encoder(5, 16, r, seed=r)
            bound = 16 ** (r + 1) * 3 * 0.1
            for _ in range(500):
                self.assertLessEqual(np.max(np.abs(encode(enc, _random_q(rng, 16, alphabet)))), bound)

    def test_length_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            encode(make_encoder(2, 5, 1, seed=0), np.zeros(4))


class TestBitAccounting(unittest.TestCase):
    """Tests for the bit budgets."""

    def test_smallest_case(self):
        self.assertEqual(bits_required(1, 2, 1, 1), 3)

    def test_doubling_m_adds_bits(self):
        for L, r, K in ((4, 1, 2), (10, 2, 3), (7, 3, 1)):
            with self.subTest(L=L, r=r, K=K):
                self.assertEqual(bits_required(L, 128, r, K) - bits_required(L, 64, r, K), L * (r + 1))

    def test_direct_bits(self):
        self.assertEqual(direct_bits(541, 2), 1082)
        self.assertEqual(direct_bits(10, 1), 10)

    def test_encoded_against_direct(self):
        """At p = m = 541 the default L is capped at m, so encoding costs more than direct coding."""
        L, capped = encoded_rows(541, 541)
        self.assertTrue(capped)
        self.assertGreater(bits_required(L, 541, 2, 2), direct_bits(541, 2))
        self.assertLess(bits_required(20, 541, 2, 2), direct_bits(541, 2))

    def test_invalid_arguments(self):
        with self.assertRaises(InvalidArgumentError):
            bits_required(0, 2, 1, 1)

    def test_code_width_covers_range(self):
        for m, r, K in ((2, 1, 1), (16, 2, 3), (100, 1, 7)):
            with self.subTest(m=m, r=r, K=K):
                width = code_width(m, r, K)
                self.assertLess(2 * K * m ** (r + 1) - 2, 2 ** width)
                self.assertGreaterEqual(2 * K * m ** (r + 1) - 1, 2 ** (width - 1))


class TestPayload(unittest.TestCase):
    """Tests for the bit-packed payload."""

    def setUp(self):
        rng = np.random.default_rng(4)
        y = rng.uniform(-0.4, 0.4, 20)
        self.result = quantize_measurements(y, 2, 0.1)
        self.encoder = make_encoder(6, 20, 2, seed=9)

    def test_round_trip(self):
        alphabet = self.result['alphabet']
        blob = encode_payload(self.encoder, self.result['q'], alphabet)
        header, c = decode_payload(blob)
        self.assertEqual(header['L'], 6)
        self.assertEqual(header['seed'], 9)
        self.assertEqual(header['K'], alphabet.levels_per_side)
        expected = payload_integers(self.encoder, alphabet.indices(self.result['q'])[0], alphabet.levels_per_side)
        self.assertTrue(np.array_equal(c[0], expected))
        decoded = decoded_measurements(self.encoder, c, alphabet.delta)
        self.assertLess(np.max(np.abs(decoded - encode(self.encoder, self.result['q']))), 1e-9)

    def test_body_size(self):
        alphabet = self.result['alphabet']
        blob = encode_payload(self.encoder, self.result['q'], alphabet)
        header, _ = decode_payload(blob)
        width = code_width(20, 2, alphabet.levels_per_side)
        self.assertEqual(header['width'], width)
        _, body = unframe(blob, PAYLOAD_MAGIC)
        self.assertEqual(len(body), (width * 6 + 7) // 8)

    def test_complex_round_trip(self):
        rng = np.random.default_rng(5)
        y = rng.uniform(-0.4, 0.4, 20) + 1j * rng.uniform(-0.4, 0.4, 20)
        result = quantize_measurements(y, 1, 0.1)
        enc = make_encoder(6, 20, 1, seed=1)
        header, c = decode_payload(encode_payload(enc, result['q'], result['alphabet']))
        self.assertEqual(header['channels'], 2)
        self.assertEqual(c.shape, (2, 6))
        decoded = decoded_measurements(enc, c, 0.1)
        expected = encode(enc, result['q'].real) + 1j * encode(enc, result['q'].imag)
        self.assertLess(np.max(np.abs(decoded - expected)), 1e-9)

    def test_off_alphabet_input(self):
        with self.assertRaises(InvalidArgumentError):
            encode_payload(self.encoder, np.full(20, 0.1), MidriseAlphabet(0.1, 3))

    def test_corrupted_payloads(self):
        blob = encode_payload(self.encoder, self.result['q'], self.result['alphabet'])
        with self.assertRaises(PayloadError):
            decode_payload(blob[:-1])
        with self.assertRaises(PayloadError):
            decode_payload(b"XXXX" + blob[4:])
        with self.assertRaises(PayloadError):
            decode_payload(blob[:6])


class TestEncoderGeometry(unittest.TestCase):
    """Tests for the rotation and the two success events."""

    def test_rotation_aligns_row_space(self):
        enc = make_encoder(5, 12, 1, seed=3)
        R = encoder_rotation(enc)
        self.assertTrue(np.allclose(R.T @ R, np.eye(12), atol=1e-10))
        rotated = enc.B @ diff_inv_matrix(1, 12) @ R
        self.assertLess(np.max(np.abs(rotated[:, 5:])), 1e-9)

    def test_norm_event_frequency(self):
        self.assertGreaterEqual(norm_event_frequency(32, 128, draws=1000, seed=0), 0.99)

    def test_singular_value_event_frequency_is_a_fraction(self):
        freq = singular_value_event_frequency(8, 32, 2, draws=20, seed=0)
        self.assertTrue(0.0 <= freq <= 1.0)
        self.assertEqual(freq, singular_value_event_frequency(8, 32, 2, draws=20, seed=0))
