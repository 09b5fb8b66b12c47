"""Keyed quantum-noise communication: simulators, attacks and key metrics."""
from .keystream import LfsrSpec, RunningKey, expand_key, berlekamp_massey
from .qubit import DensityMatrix2, QkConstellation
from .qk import QkConfig, TrialRecord
from .qumode import CoherentAmplitude
from .alpha_eta import AlphaEtaConfig
from .cppm import CppmConfig, ModeAmplitudes
from .metrics import DiscreteJoint, ErrorProfile
from .stats import Estimate

__all__ = [
    "AlphaEtaConfig", "CoherentAmplitude", "CppmConfig", "DensityMatrix2", "DiscreteJoint",
    "ErrorProfile", "Estimate", "LfsrSpec", "ModeAmplitudes", "QkConfig", "QkConstellation",
    "RunningKey", "TrialRecord", "berlekamp_massey", "expand_key",
]
__version__ = "0.1.0"
