"""
Models for qcslab.
"""

from qcslab.models.encoder import Encoder
from qcslab.models.ensemble import CoherenceReport, MeasurementEnsemble
from qcslab.models.experiment import ExperimentConfig, TrialRecord
from qcslab.models.operators import DifferenceOperator, NoiseShapingMatrix, SvdFactors
from qcslab.models.problem import OneStageProblem, RecoverySolution
from qcslab.models.quantization import BufferConfig, MidriseAlphabet, SigmaDeltaTrace
from qcslab.models.signal import SparseSignal

__all__ = [
    "Encoder",
    "CoherenceReport",
    "MeasurementEnsemble",
    "ExperimentConfig",
    "TrialRecord",
    "DifferenceOperator",
    "NoiseShapingMatrix",
    "SvdFactors",
    "OneStageProblem",
    "RecoverySolution",
    "BufferConfig",
    "MidriseAlphabet",
    "SigmaDeltaTrace",
    "SparseSignal",
]
