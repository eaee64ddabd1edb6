"""
Unit tests for MSQ, greedy Σ∆ and the digital-buffer pipeline.
"""

import unittest

import numpy as np

from qcslab.errors import InvalidArgumentError
from qcslab.models.quantization import BufferConfig, MidriseAlphabet
from qcslab.services.operators import apply_diff, orthogonal_factor
from qcslab.services.quantize import (
    buffer_pipeline,
    msq,
    quantize_measurements,
    required_levels,
    sigma_delta,
    sigma_delta_complex,
)


class TestAlphabet(unittest.TestCase):
    """Tests for the midrise alphabet."""

    def test_levels(self):
        levels = MidriseAlphabet(0.1, 3).levels()
        self.assertTrue(np.allclose(levels, [-0.25, -0.15, -0.05, 0.05, 0.15, 0.25]))
        self.assertTrue(np.allclose(np.diff(levels), 0.1))
        self.assertFalse(np.any(levels == 0))

    def test_invalid_alphabet(self):
        with self.assertRaises(InvalidArgumentError):
            MidriseAlphabet(0.0, 3)
        with self.assertRaises(InvalidArgumentError):
            MidriseAlphabet(0.1, 0)

    def test_contains(self):
        alphabet = MidriseAlphabet(0.1, 2)
        self.assertTrue(alphabet.contains(np.array([-0.15, 0.05])))
        self.assertFalse(alphabet.contains(np.array([0.1])))
        self.assertFalse(alphabet.contains(np.array([0.25])))


class TestMsq(unittest.TestCase):
    """Tests for memoryless scalar quantization."""

    def setUp(self):
        self.alphabet = MidriseAlphabet(0.1, 3)

    def test_nearest_level(self):
        q, saturated = msq(np.array([0.23, 0.0, 0.04, -0.04, -0.16]), self.alphabet)
        self.assertTrue(np.allclose(q, [0.25, 0.05, 0.05, -0.05, -0.15]))
        self.assertFalse(saturated)

    def test_cell_radius(self):
        y = np.random.default_rng(0).uniform(-0.3, 0.3, 500)
        q, _ = msq(y, self.alphabet)
        self.assertLessEqual(np.max(np.abs(y - q)), 0.05 + 1e-15)

    def test_saturation(self):
        q, saturated = msq(np.array([0.9, -0.9]), self.alphabet)
        self.assertTrue(saturated)
        self.assertTrue(np.allclose(q, [0.25, -0.25]))


class TestSigmaDelta(unittest.TestCase):
    """Tests for the greedy Σ∆ recursion."""

    def test_hand_recursion(self):
        trace = sigma_delta(np.array([0.07, 0.07]), 1, MidriseAlphabet(0.1, 1))
        self.assertTrue(np.allclose(trace.q, [0.05, 0.05]))
        self.assertTrue(np.allclose(trace.u, [0.02, 0.04]))
        self.assertFalse(trace.overload_flag)

    def test_alphabet_input_has_zero_state(self):
        y = np.array([0.05, -0.15, 0.25, 0.05])
        trace = sigma_delta(y, 1, MidriseAlphabet(0.1, 3))
        self.assertTrue(np.allclose(trace.q, y))
        self.assertLess(np.max(np.abs(trace.u)), 1e-15)

    def test_exact_recursion(self):
        rng = np.random.default_rng(7)
        for r in (1, 2, 3):
            for _ in range(20):
                with self.subTest(r=r):
                    y = rng.uniform(-1, 1, 100)
                    result = quantize_measurements(y, r, 0.1)
                    trace = result['traces'][0]
                    self.assertLessEqual(np.max(np.abs((y - trace.q) - apply_diff(r, trace.u))), 1e-12)

    def test_stability_with_headroom(self):
        rng = np.random.default_rng(8)
        for r in (1, 2):
            with self.subTest(r=r):
                y = rng.uniform(-0.3, 0.3, 200)
                result = quantize_measurements(y, r, 0.1)
                self.assertFalse(result['overload'])
                self.assertLessEqual(np.max(np.abs(result['traces'][0].u)), 0.05 * (1 + 1e-12))
                self.assertTrue(result['alphabet'].contains(result['q']))

    def test_required_levels(self):
        self.assertEqual(required_levels(np.array([0.3, -0.05]), 0.1, 2), 3 + 4)

    def test_overload_flag(self):
        trace = sigma_delta(np.full(10, 5.0), 1, MidriseAlphabet(0.1, 1))
        self.assertTrue(trace.overload_flag)
        self.assertTrue(trace.saturated)

    def test_invalid_order(self):
        with self.assertRaises(InvalidArgumentError):
            sigma_delta(np.ones(3), 0, MidriseAlphabet(0.1, 1))

    def test_complex_channels(self):
        rng = np.random.default_rng(9)
        y = rng.uniform(-0.5, 0.5, 64) + 1j * rng.uniform(-0.5, 0.5, 64)
        alphabet = MidriseAlphabet(0.1, 12)
        re, im = sigma_delta_complex(y, 2, alphabet)
        stacked = np.concatenate([y.real - re.q, y.imag - im.q])
        shaped = np.concatenate([apply_diff(2, re.u), apply_diff(2, im.u)])
        self.assertLessEqual(np.max(np.abs(stacked - shaped)), 1e-12)

    def test_complex_conjugation(self):
        rng = np.random.default_rng(10)
        y = rng.uniform(-0.5, 0.5, 32) + 1j * rng.uniform(-0.5, 0.5, 32)
        alphabet = MidriseAlphabet(0.1, 10)
        re, im = sigma_delta_complex(y, 1, alphabet)
        re_c, im_c = sigma_delta_complex(np.conj(y), 1, alphabet)
        self.assertTrue(np.allclose(re.q, re_c.q))
        self.assertTrue(np.allclose(im.q, -im_c.q))

    def test_real_input_imaginary_channel(self):
        _, im = sigma_delta_complex(np.array([0.3, 0.1, -0.2]), 1, MidriseAlphabet(0.1, 4))
        # zero input alternates between the two smallest levels
        self.assertTrue(np.allclose(im.q, [0.05, -0.05, 0.05]))

    def test_quantize_complex_measurements(self):
        y = np.array([0.1 + 0.2j, -0.3 + 0.05j, 0.0 - 0.4j])
        result = quantize_measurements(y, 1, 0.1)
        self.assertTrue(np.iscomplexobj(result['q']))
        self.assertEqual(len(result['traces']), 2)


class TestBufferPipeline(unittest.TestCase):
    """Tests for MSQ → U → Σ∆."""

    def test_delta_prime(self):
        cfg = BufferConfig(0.1, 1, 70)
        self.assertAlmostEqual(cfg.delta_prime, 0.013464, places=6)
        self.assertAlmostEqual(cfg.delta_dprime, cfg.delta_prime / 2)

    def test_delta_dprime_includes_noise(self):
        cfg = BufferConfig(0.1, 2, 100, eps=0.01)
        self.assertAlmostEqual(cfg.delta_dprime, 0.01 + cfg.delta_prime / 2)

    def test_too_many_measurements(self):
        with self.assertRaises(InvalidArgumentError):
            buffer_pipeline(np.zeros(80), BufferConfig(0.1, 1, 70))

    def test_fine_msq_approaches_plain_sigma_delta(self):
        rng = np.random.default_rng(11)
        y = rng.uniform(-0.5, 0.5, 20)
        cfg = BufferConfig(0.1, 1, 10 ** 6)
        U = orthogonal_factor(20, 1, 0.1)
        buffered = buffer_pipeline(y, cfg, U)
        plain = quantize_measurements(U @ y, 1, 0.1, levels_per_side=buffered['alphabet'].levels_per_side)
        self.assertTrue(np.allclose(buffered['q'], plain['q']))
        self.assertTrue(buffered['y_msq_discarded'])

    def test_msq_error_after_rotation(self):
        rng = np.random.default_rng(12)
        m = 50
        y = rng.uniform(-1, 1, m)
        cfg = BufferConfig(0.1, 1, 70)
        U = orthogonal_factor(m, 1, 0.1, cfg.delta_dprime)
        alphabet = MidriseAlphabet(cfg.delta_prime, int(np.ceil(1 / cfg.delta_prime)) + 1)
        y_msq, _ = msq(y, alphabet)
        self.assertLessEqual(np.linalg.norm(U @ y_msq - U @ y), cfg.delta_prime / 2 * np.sqrt(m) + 1e-12)

    def test_complex_buffer(self):
        rng = np.random.default_rng(13)
        y = rng.standard_normal(30) + 1j * rng.standard_normal(30)
        result = buffer_pipeline(y, BufferConfig(0.1, 2, 40))
        self.assertTrue(np.iscomplexobj(result['q']))
        self.assertFalse(result['overload'])
