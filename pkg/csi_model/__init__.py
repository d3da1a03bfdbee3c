from .cfr import (
    AmplitudeTensor,
    ComplexCfr,
    CsiSequence,
    cfr_amplitude,
    cfr_phase,
    conjugate,
    extract_amplitudes,
    packet_permuted,
)

# Subcarrier count reported per antenna pair by the common 802.11n CSI tool.
DEFAULT_N_SUB = 30
