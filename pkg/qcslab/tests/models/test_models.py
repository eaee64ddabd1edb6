"""
Unit tests for the model records.
"""

import unittest

import numpy as np

from qcslab.errors import ConfigError, InvalidArgumentError
from qcslab.models.encoder import Encoder
from qcslab.models.ensemble import CoherenceReport, MeasurementEnsemble
from qcslab.models.experiment import ExperimentConfig, TrialRecord
from qcslab.models.operators import DifferenceOperator
from qcslab.models.problem import OneStageProblem, RecoverySolution
from qcslab.models.quantization import BufferConfig, MidriseAlphabet
from qcslab.models.signal import SparseSignal


class TestMidriseAlphabet(unittest.TestCase):
    """Tests for level indexing."""

    def test_index_ends(self):
        alphabet = MidriseAlphabet(0.1, 3)
        self.assertAlmostEqual(alphabet.values(1), -0.25)
        self.assertAlmostEqual(alphabet.values(6), 0.25)
        self.assertAlmostEqual(alphabet.max_level, 0.25)

    def test_indices_saturation_mask(self):
        idx, saturated = MidriseAlphabet(0.1, 2).indices(np.array([-1.0, 0.0, 0.19, 1.0]))
        self.assertEqual(idx.tolist(), [1, 3, 4, 4])
        self.assertEqual(saturated.tolist(), [True, False, False, True])

    def test_dict_round_trip(self):
        alphabet = MidriseAlphabet.from_dict(MidriseAlphabet(0.2, 5).to_dict())
        self.assertEqual((alphabet.delta, alphabet.levels_per_side), (0.2, 5))
        self.assertEqual(str(alphabet), "MidriseAlphabet(delta=0.2, K=5)")


class TestRecords(unittest.TestCase):
    """String forms and dictionaries."""

    def test_signal(self):
        signal = SparseSignal(np.array([0.0, 2.0, 0.0, -1.0]), [1, 3], 2)
        self.assertEqual(signal.n, 4)
        self.assertEqual(signal.to_dict(), {'n': 4, 'k': 2, 'support': [1, 3]})
        self.assertIn("support=[1, 3]", str(signal))
        self.assertEqual(signal.best_k_term_error(1), 1.0)

    def test_ensemble(self):
        ensemble = MeasurementEnsemble("gaussian", np.ones((2, 3)), seed=7)
        self.assertEqual((ensemble.m, ensemble.n), (2, 3))
        self.assertFalse(ensemble.is_complex)
        self.assertEqual(ensemble.probe_rows(2).tolist(), [0, 1])
        self.assertEqual(str(ensemble), "MeasurementEnsemble(kind=gaussian, m=2, n=3, seed=7)")
        self.assertEqual(ensemble.header()['complex_flag'], False)

    def test_chirp_probe_rows_wrap(self):
        ensemble = MeasurementEnsemble("chirp_sub", np.ones((5, 10), dtype=complex))
        self.assertEqual(ensemble.probe_rows(5).tolist(), [1, 2, 3, 4, 0])

    def test_coherence_report(self):
        report = CoherenceReport(0.5, (1, 4), 7)
        self.assertEqual(report.to_dict(), {'mu': 0.5, 'argpair': [1, 4], 'ell': 7})

    def test_difference_operator(self):
        with self.assertRaises(InvalidArgumentError):
            DifferenceOperator(0, 4)
        self.assertEqual(DifferenceOperator(2, 5).to_dict(), {'order': 2, 'dim': 5})

    def test_encoder(self):
        encoder = Encoder(np.array([[1.0, -1.0, 1.0]]), 2, seed=3)
        self.assertEqual(encoder.to_dict(), {'L': 1, 'm': 3, 'r': 2, 'seed': 3})
        with self.assertRaises(InvalidArgumentError):
            Encoder(np.ones((1, 3)), 0)

    def test_problem_header(self):
        problem = OneStageProblem(np.ones((4, 2)), np.zeros(4), 2, 0.3, 0.1, channels=2)
        self.assertEqual(problem.m, 2)
        self.assertEqual(problem.header()['channels'], 2)
        with self.assertRaises(InvalidArgumentError):
            OneStageProblem(np.ones((3, 2)), np.zeros(3), 1, 0.1, 0.0, channels=2)
        with self.assertRaises(InvalidArgumentError):
            OneStageProblem(np.ones((2, 2)), np.zeros(2), 1, 0.1, 0.0, variant="encoded",
                            B=np.array([[1.0, 0.0]]))

    def test_solution(self):
        solution = RecoverySolution(np.zeros(2), np.zeros(2), 1.5, {'ball_1': -0.1, 'ball_2': 0.2}, 10, True)
        self.assertEqual(solution.max_violation, 0.2)
        self.assertEqual(solution.to_dict()['objective'], 1.5)
        self.assertNotIn('x_hat', solution.to_dict())
        self.assertEqual(RecoverySolution(np.zeros(1), np.zeros(1), 0, {}, 0, False).max_violation, 0.0)

    def test_buffer_config(self):
        data = BufferConfig(0.1, 1, 70).to_dict()
        self.assertEqual(data['m_max'], 70)
        self.assertAlmostEqual(data['delta_dprime'], data['delta_prime'] / 2)


class TestExperimentConfig(unittest.TestCase):
    """Tests for config defaults and overrides."""

    def test_paper_scale_overrides_explicit_lists(self):
        cfg = ExperimentConfig("fig_chirp_p_sweep", p_list=[61, 137], paper_scale=True)
        self.assertEqual(cfg.p_list, [61, 137, 223, 307, 397, 487, 593, 677, 787])
        cfg = ExperimentConfig("fig_chirp_p_sweep", p_list=[61, 137])
        self.assertEqual(cfg.p_list, [61, 137])

    def test_desk_defaults(self):
        cfg = ExperimentConfig("fig_modified")
        self.assertEqual(cfg.n, 200)
        self.assertEqual(cfg.sweep_name, "m")
        self.assertEqual(cfg.sweep_values, cfg.m_list)

    def test_defaults_are_not_shared(self):
        a = ExperimentConfig("fig_modified")
        a.m_list.append(999)
        self.assertNotIn(999, ExperimentConfig("fig_modified").m_list)

    def test_unknown_experiment_and_key(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig("fig_lasso")
        with self.assertRaises(ConfigError):
            ExperimentConfig("fig_modified", n_rows=10)

    def test_from_dict_overrides(self):
        data = {'experiment': 'fig_chirp_k_sweep', 'p_list': [13], 'k_list': [1], 'force': False}
        self.assertTrue(ExperimentConfig.from_dict(data, force=True).force)
        self.assertFalse(ExperimentConfig.from_dict(data, force=None).force)
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_dict({'p_list': [13]})

    def test_to_dict_round_trip(self):
        cfg = ExperimentConfig("distortion_rate", k=1, p_list=[13], l_list=[4, 8])
        again = ExperimentConfig.from_dict(cfg.to_dict())
        self.assertEqual(again.to_dict(), cfg.to_dict())
        self.assertEqual(again.sweep_name, "L")

    def test_seed_family(self):
        self.assertEqual(ExperimentConfig("fig_buffer").seed_family, "partial_fourier")
        self.assertEqual(ExperimentConfig("fig_chirp_p_sweep").seed_family, "fig_chirp_p_sweep")


class TestTrialRecord(unittest.TestCase):
    """Tests for TrialRecord."""

    def test_failed(self):
        self.assertFalse(TrialRecord("fig_modified", 20, 0, 1, 5, 0.1).failed)
        self.assertTrue(TrialRecord("fig_modified", 20, 0, 1, 5, 0.1, converged=False).failed)
        self.assertTrue(TrialRecord("fig_modified", 20, 0, 1, 5, float("nan")).failed)

    def test_to_dict(self):
        record = TrialRecord("fig_buffer", 30, 2, 2, 9, 0.05, wall_time=1.5, extra={'delta_prime': 0.01})
        data = record.to_dict()
        self.assertEqual(data['delta_prime'], 0.01)
        self.assertEqual(data['wall_time'], 1.5)
        self.assertEqual(record.sort_key, (2, 30, 2))
        self.assertIn("sweep=30", str(record))
