"""Link-level simulator for LoRa and DLoRa chirp channels.

Measures the SIR at which a reference packet still meets a target BER
under a fully overlapping interferer, for every pair of the twelve
spreading-factor/chirp-direction channels.
"""

__version__ = "0.1.0"

from .phy import ALL_CHANNELS, Channel, ChirpFamily, PhyParams, make_params  # noqa: E402
from .sweep import SweepConfig, ThresholdMatrix, build_matrix, sweep_pair  # noqa: E402

__all__ = [
    "ALL_CHANNELS",
    "Channel",
    "ChirpFamily",
    "PhyParams",
    "SweepConfig",
    "ThresholdMatrix",
    "build_matrix",
    "make_params",
    "sweep_pair",
]
